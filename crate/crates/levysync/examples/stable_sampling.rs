//! Chambers-Mallows-Stuck draws and the Linnik law c E^(1/alpha) S,
//! checked against their characteristic functions.

use levysync::levy::cms_symmetric;
use levysync::limits_stats::LimitLaw;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> levysync::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let reps = 200_000;
    for alpha in [0.7, 1.0, 1.5, 2.0] {
        let s: Vec<f64> = (0..reps).map(|_| cms_symmetric(alpha, &mut rng)).collect();
        let ecf = s.iter().map(|v| v.cos()).sum::<f64>() / reps as f64;
        println!("stable alpha {alpha}: E cos(S) = {ecf:.4}, e^-1 = {:.4}", (-1.0f64).exp());
    }
    let law = LimitLaw::Linnik1d { alpha: 1.5, c: 0.8 };
    let y: Vec<f64> = (0..reps).map(|_| law.sample_1d(&mut rng)).collect::<levysync::Result<_>>()?;
    for lam in [0.5, 1.0, 3.0] {
        let ecf = y.iter().map(|v| (lam * v).cos()).sum::<f64>() / reps as f64;
        println!("Linnik(1.5, 0.8) at {lam}: empirical {ecf:.4}, exact {:.4}", law.cf(&[lam]));
    }
    Ok(())
}
