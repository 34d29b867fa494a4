//! Exponential clocks: the closed-form difference CF over time against the
//! Monte Carlo mean of the V-statistic.

use levysync::analytic::{chi_markov_inf, chi_markov_t};
use levysync::levy::LevySpec;
use levysync::me_dist::MeDistribution;
use levysync::simulator::{chi_mc, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let n = 5;
    let sys = SyncSystemConfig::new(n, LevySpec::brownian(1.0), MeDistribution::exponential(1.0)?, 20.0);
    let lambdas = vec![vec![0.5], vec![1.0], vec![2.0]];
    let times = [0.5, 2.0, 5.0, 20.0];
    let rows = chi_mc(&sys, &lambdas, 4000, 7, &times)?;
    println!("{:>6} {:>6} {:>10} {:>8} {:>10}", "t", "lambda", "MC", "SE", "exact");
    for r in &rows {
        let eta = sys.levy.eta(&r.lambda);
        println!("{:6.1} {:6.2} {:10.5} {:8.5} {:10.5}", r.t, r.lambda[0], r.estimate, r.se, chi_markov_t(n, 1.0, eta, r.t, 1.0));
    }
    for l in &lambdas {
        println!("stationary CF at lambda {}: {:.6}", l[0], chi_markov_inf(n, 1.0, sys.levy.eta(l)));
    }
    Ok(())
}
