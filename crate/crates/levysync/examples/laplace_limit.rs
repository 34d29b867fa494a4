//! Brownian components with exponential clocks: the pair difference at a
//! large horizon against the Laplace law, by empirical CF and KS.

use levysync::levy::LevySpec;
use levysync::limits_stats::{cf_distance, default_lambda_grid, empirical_cf, ks_test_laplace, LimitLaw};
use levysync::me_dist::MeDistribution;
use levysync::simulator::{sample_differences, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let n = 5;
    let sys = SyncSystemConfig::new(n, LevySpec::brownian(1.0), MeDistribution::exponential(1.0)?, 60.0);
    let sample = sample_differences(&sys, (0, 1), 5000, 3)?;
    let c0 = 2f64.sqrt();
    let law = LimitLaw::Laplace1d { c0 };
    let table = empirical_cf(&sample, &default_lambda_grid(1))?.with_theory(|l| Ok(law.cf(l)))?;
    let d = cf_distance(&table)?;
    println!("sup |ecf - 1/(1 + 2 lambda^2)| = {:.4}, largest |Im| / SE = {:.2}", d.sup_re, d.max_im_z);
    let ks = ks_test_laplace(&sample, c0, None)?;
    println!("KS = {:.5} vs critical {:.5}: {}", ks.statistic, ks.critical, if ks.pass { "accept" } else { "reject" });
    Ok(())
}
