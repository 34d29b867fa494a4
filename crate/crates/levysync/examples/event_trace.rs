//! Step through one replica of the synchronization system and watch the
//! sender's state being copied to the recipient.

use levysync::levy::LevySpec;
use levysync::me_dist::MeDistribution;
use levysync::simulator::{SimulationState, SyncSystemConfig};

fn main() -> levysync::Result<()> {
    let sys = SyncSystemConfig::new(4, LevySpec::brownian(1.0), MeDistribution::erlang(2, 1.0)?, 3.0);
    sys.validate()?;
    let mut state = SimulationState::new(&sys, 42, 0)?;
    while state.next_epoch().is_some_and(|t| t <= sys.horizon) {
        let e = state.step().expect("an epoch is pending");
        let j = e.recipient.expect("symmetric routing always picks a recipient");
        println!("t = {:.4}: {} -> {}   x_{} = {:+.4}", e.time, e.sender, j, j, state.component(j)[0]);
    }
    state.run_until(sys.horizon);
    state.sync_all();
    println!("events {}, positions at T: {:+.4?}", state.event_count, state.positions());
    println!("V(x(T); lambda = 1) = {:.4}", state.v_statistic(&[1.0]));
    Ok(())
}
