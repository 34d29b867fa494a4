//! Heavy-tailed Pareto components: rescale the difference by the stable
//! normalization and fit a Linnik scale at fixed alpha.

use levysync::levy::LevySpec;
use levysync::limits_stats::{empirical_cf, fit_linnik_scale, lambda_grid_from_magnitudes, rescale, RescaleRule};
use levysync::me_dist::MeDistribution;
use levysync::simulator::{sample_differences, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let n = 10;
    let levy = LevySpec::pareto_walk(1.0, 1.5);
    let target = levy.attraction_target()?;
    let b = target.b_rule.b(n)?;
    let sys = SyncSystemConfig::new(n, levy, MeDistribution::erlang(2, 1.0)?, 60.0);
    let raw = sample_differences(&sys, (0, 1), 4000, 12)?;
    let scaled = rescale(&raw, &RescaleRule::Scalar { b }, n)?;
    let mags: Vec<f64> = (0..15).map(|i| 0.1 * 30f64.powf(i as f64 / 14.0)).collect();
    let table = empirical_cf(&scaled, &lambda_grid_from_magnitudes(1, &mags))?;
    let fit = fit_linnik_scale(&table, target.alpha, 0.1, 3.0)?;
    println!("alpha = {}, b_N = {b:.4}: fitted c = {:.4}, sup residual {:.4} over {} probes", target.alpha, fit.c, fit.sup_residual, fit.probes);
    Ok(())
}
