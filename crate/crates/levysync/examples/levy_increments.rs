//! Increments of the three Levy families against their exponents:
//! the empirical mean of cos(lambda X_t) should approach e^(-t eta / 2).

use levysync::levy::LevySpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> levysync::Result<()> {
    let specs = [
        ("Brownian sigma=1", LevySpec::brownian(1.0)),
        ("Pareto walk a=1.5", LevySpec::pareto_walk(1.0, 1.5)),
        ("stable alpha=1.2", LevySpec::isotropic_stable(1.2, 1.0, 1)),
    ];
    let (dt, reps) = (0.7, 200_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, spec) in &specs {
        spec.validate()?;
        let mut x = Vec::with_capacity(reps);
        let mut out = [0.0];
        for _ in 0..reps {
            out[0] = 0.0;
            spec.sample_increment(dt, &mut rng, &mut out);
            x.push(out[0]);
        }
        println!("{name}");
        for lam in [0.25, 1.0, 2.0] {
            let ecf = x.iter().map(|v| (lam * v).cos()).sum::<f64>() / reps as f64;
            let theory = (dt * spec.rho(&[lam])).exp().re;
            println!("  lambda {lam:4}: empirical {ecf:.4}  exact {theory:.4}  eta {:.4}", spec.eta(&[lam]));
        }
    }
    Ok(())
}
