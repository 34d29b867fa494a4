//! Synchronization switched off: the mean V-statistic decays like
//! e^(-s eta) from a fixed start.

use levysync::levy::LevySpec;
use levysync::me_dist::MeDistribution;
use levysync::simulator::{v_statistic, v_trajectory, InitialState, Routing, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let x: Vec<Vec<f64>> = (0..5).map(|i| vec![0.5 * i as f64]).collect();
    let v0 = |l: f64| v_statistic(&x.concat(), 5, 1, &[l]);
    let sys = SyncSystemConfig::new(5, LevySpec::brownian(1.0), MeDistribution::exponential(1.0)?, 2.0)
        .with_routing(Routing::Disabled)
        .with_initial(InitialState::Fixed { x: x.clone() });
    let rows = v_trajectory(&sys, &[vec![0.5], vec![1.0]], &[0.5, 1.0, 2.0], 4000, 9)?;
    for r in &rows {
        let l = r.lambda[0];
        let exact = v0(l) * (-r.t * l * l).exp();
        println!("s = {:.1}, lambda = {l}: mean V {:.5} +- {:.5}, exact {exact:.5}", r.t, r.estimate, r.se);
    }
    Ok(())
}
