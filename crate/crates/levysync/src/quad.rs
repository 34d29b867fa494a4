//! Adaptive composite Gauss-Legendre quadrature.

use std::sync::OnceLock;

use crate::{Error, Result};

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 40;
const MAX_PANELS: usize = 200_000;

/// Nodes and weights on [-1, 1], found by Newton iteration on P_n.
pub fn gauss_legendre_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let (mut q0, mut q1) = (1.0, z);
                    for k in 2..=n {
                        let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                    x[i] = -z;
                    w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                    break;
                }
            }
        }
        (x, w)
    })
}

/// One fixed-order panel.
pub fn gl_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre_rule();
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    x.iter().zip(w).map(|(&xi, &wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval starts as `initial_panels` equal panels; each panel is
/// halved until the two halves agree with the whole to within its share
/// of the tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, initial_panels: usize) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let n0 = initial_panels.max(1);
    let width = b - a;
    let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
    for i in (0..n0).rev() {
        let lo = a + width * i as f64 / n0 as f64;
        let hi = a + width * (i + 1) as f64 / n0 as f64;
        let v = gl_panel(&mut f, lo, hi);
        stack.push((lo, hi, v, 0));
    }
    let mut total = 0.0;
    let mut panels = 0usize;
    let mut worst = 0.0f64;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl_panel(&mut f, lo, mid);
        let right = gl_panel(&mut f, mid, hi);
        let delta = (left + right - whole).abs();
        if !delta.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        let share = tol * (hi - lo) / width;
        if delta <= share || depth >= MAX_DEPTH {
            if delta > share {
                worst = worst.max(delta);
            }
            total += left + right;
            panels += 1;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
        if panels + stack.len() > MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "more than {MAX_PANELS} panels on [{a}, {b}], partial sum {total}"
            )));
        }
    }
    if worst > tol {
        return Err(Error::Quadrature(format!(
            "depth limit reached on [{a}, {b}]: panel error {worst:e} exceeds {tol:e}, estimate {total}"
        )));
    }
    Ok(total)
}
