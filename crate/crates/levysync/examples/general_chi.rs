//! Non-exponential clocks: the slowest decay root kappa_N, the quadrature
//! CF l_N J_N, its geometric-stable approximation, and finite-time values.

use levysync::analytic::GeneralModel;
use levysync::me_dist::MeDistribution;

fn main() -> levysync::Result<()> {
    let dist = MeDistribution::erlang(2, 1.0)?;
    for n in [5, 10, 40] {
        let model = GeneralModel::new(&dist, n)?;
        let c = model.constants();
        println!("N = {n}: kappa_N = {:.9}, theta_1 = {:.6}, theta_3 = {:+.3e}", model.roots().kappa_n, c.theta1_n, c.theta3_n);
        for eta in [0.1, 1.0, 10.0] {
            println!(
                "  eta {eta:5}: l_N J_N = {:.8}  approx {:.8}",
                model.chi_inf(eta)?,
                model.chi_asymptotic(eta)
            );
        }
    }
    let model = GeneralModel::new(&dist, 10)?;
    for t in [1.0, 5.0, 20.0, 80.0] {
        println!("N = 10, eta = 0.5, t = {t:4}: chi(t) = {:.8}", model.chi_t(0.5, t, 1.0)?);
    }
    println!("stationary value {:.8}", model.chi_inf(0.5)?);
    Ok(())
}
