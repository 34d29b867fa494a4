//! Erlang-2 clocks with the two sender rules. When the component whose
//! clock rang sends, the configuration correlates with clock ages and the
//! stationary CF moves away from l_N J_N. A uniformly drawn sender
//! reproduces it.

use levysync::analytic::GeneralModel;
use levysync::levy::LevySpec;
use levysync::me_dist::MeDistribution;
use levysync::simulator::{chi_mc, SenderRule, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let n = 10;
    let dist = MeDistribution::erlang(2, 1.0)?;
    let model = GeneralModel::new(&dist, n)?;
    let horizon = 150.0;
    let lambdas = vec![vec![0.2], vec![0.45], vec![1.0]];
    for rule in [SenderRule::ClockOwner, SenderRule::UniformPair] {
        let sys = SyncSystemConfig::new(n, LevySpec::brownian(1.0), dist.clone(), horizon).with_sender(rule);
        println!("{rule:?}");
        for r in chi_mc(&sys, &lambdas, 2000, 21, &[horizon])? {
            let eta = r.lambda[0] * r.lambda[0];
            println!("  lambda {:4}: mean V {:.4} +- {:.4}, l_N J_N {:.4}", r.lambda[0], r.estimate, r.se, model.chi_inf(eta)?);
        }
    }
    Ok(())
}
