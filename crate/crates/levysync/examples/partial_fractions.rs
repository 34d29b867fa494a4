//! Roots, partial fractions and inverse Laplace transforms of a rational
//! function with a double pole.

use levysync::polyrat::{Polynomial, RationalFunction};
use levysync::Complex64;

fn main() -> levysync::Result<()> {
    // f(z) = (z + 3) / ((z + 1)^2 (z + 2))
    let num = Polynomial::from_real(&[3.0, 1.0]);
    let den = Polynomial::from_real(&[2.0, 5.0, 4.0, 1.0]);
    let f = RationalFunction::new(num, den.clone())?;

    println!("roots of the denominator:");
    for r in den.roots()? {
        println!("  {:.12} {:+.3e}i", r.re, r.im);
    }

    let pf = f.partial_fractions()?;
    for term in &pf.terms {
        for (k, c) in term.coeffs.iter().enumerate() {
            println!("  {:.6} / (z - ({:.3}))^{}", c.re, term.pole.re, k + 1);
        }
    }

    // closed form: 2 t e^-t - e^-t + e^-2t
    for t in [0.0, 0.5, 1.0, 4.0] {
        let g = pf.inverse_laplace(t)?.re;
        let exact = 2.0 * t * (-t).exp() - (-t).exp() + (-2.0 * t).exp();
        println!("t = {t:4}: inverse {g:.15}  closed form {exact:.15}");
    }

    let z = Complex64::new(0.3, 1.7);
    println!("f(z) = {:.12}, from terms {:.12}", f.eval(z)?, pf.eval(z)?);
    Ok(())
}
