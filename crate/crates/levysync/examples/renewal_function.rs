//! Matrix-exponential inter-event laws: moments, density, and the renewal
//! function from the partial fractions of p*/(1 - p*).

use levysync::me_dist::MeDistribution;

fn main() -> levysync::Result<()> {
    let laws = [
        ("exponential(1)", MeDistribution::exponential(1.0)?),
        ("Erlang-2(1)", MeDistribution::erlang(2, 1.0)?),
        ("hyperexp(0.3/0.7)", MeDistribution::hyper_exponential(vec![0.3, 0.7], vec![2.5, 1.0 / 1.75])?),
        ("Coxian-2", MeDistribution::coxian(vec![3.0, 1.5], vec![0.4, 1.0])?),
    ];
    for (name, d) in &laws {
        let m: Vec<f64> = (1..=3).map(|r| d.moment(r)).collect::<levysync::Result<_>>()?;
        println!("{name}: m1 = {:.6}, m2 = {:.6}, m3 = {:.6}", m[0], m[1], m[2]);
        let h = d.renewal_density()?;
        for t in [0.1, 1.0, 10.0] {
            // H(t) - t/m tends to m2/(2 m^2) - 1
            println!("  H({t:>4}) = {:.10}   H - t/m = {:+.6}", h.integral(t).re, h.integral(t).re - t / m[0]);
        }
        println!("  limit m2/(2 m^2) - 1 = {:+.6}", m[1] / (2.0 * m[0] * m[0]) - 1.0);
    }

    let erl = MeDistribution::erlang(2, 1.0)?.renewal_density()?;
    let t = 1.0;
    println!("Erlang-2: H(1) = {:.15}, t - (1 - e^-4t)/4 = {:.15}", erl.integral(t).re, t - (1.0 - (-4.0f64 * t).exp()) / 4.0);
    Ok(())
}
