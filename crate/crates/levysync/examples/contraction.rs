//! Averaging the V-statistic over every ordered synchronization pair
//! contracts it by exactly k_N = 1 - 2/((N-1)N).

use levysync::k_n;
use levysync::simulator::contraction_oracle;

fn main() -> levysync::Result<()> {
    let configs = [
        vec![vec![0.0], vec![1.0]],
        vec![vec![0.3], vec![-1.2], vec![2.5], vec![0.9]],
        vec![vec![0.1, 0.2], vec![1.0, -0.5], vec![-0.7, 0.4], vec![2.0, 1.1], vec![0.0, -1.4], vec![0.5, 0.5]],
    ];
    for x in &configs {
        let d = x[0].len();
        let lam = vec![0.9; d];
        let (avg, expect) = contraction_oracle(x, &lam)?;
        println!("N = {}, d = {d}: pair average {avg:.15}, k_N V0 {expect:.15}, k_N = {:.6}", x.len(), k_n(x.len()));
    }
    Ok(())
}
