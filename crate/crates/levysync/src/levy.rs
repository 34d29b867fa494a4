//! Levy exponents and exact increment samplers.
//!
//! The increment of the free motion over `dt` has characteristic function
//! `exp(dt * rho(lambda))`. `eta(lambda) = -2 Re rho(lambda)` is the decay
//! exponent of the difference of two independent copies, and is the only
//! thing the stationary analytics need.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::quad::gl_panel;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    /// One-dimensional jumps with density `(a/2)|q|^(-1-a)` on `|q| >= 1`.
    ParetoSymmetric { a: f64 },
    /// Jump `W * Theta`: radius with `P(W > r) = r^(-alpha)` for `r >= 1`,
    /// direction drawn from a discrete angular law.
    ParetoRadial { alpha: f64, directions: Vec<Vec<f64>>, weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StableSpectral {
    /// `zeta(lambda) = c^alpha |lambda|^alpha` in `dim` dimensions.
    Isotropic { c: f64, dim: usize },
    /// `zeta(lambda) = sum_i w_i |<lambda, u_i>|^alpha` over unit vectors `u_i`.
    Discrete { directions: Vec<Vec<f64>>, weights: Vec<f64> },
}

/// The free motion of one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevySpec {
    /// `b t + sigma B(t)`.
    BrownianDrift { sigma: Vec<Vec<f64>>, drift: Vec<f64> },
    CompoundPoisson { beta: f64, jumps: JumpLaw },
    /// Symmetric alpha-stable with `rho = -zeta / 2`.
    SymmetricStable { alpha: f64, spectral: StableSpectral },
}

impl LevySpec {
    pub fn brownian(sigma: f64) -> Self {
        LevySpec::BrownianDrift { sigma: vec![vec![sigma]], drift: vec![0.0] }
    }

    pub fn pareto_walk(beta: f64, a: f64) -> Self {
        LevySpec::CompoundPoisson { beta, jumps: JumpLaw::ParetoSymmetric { a } }
    }

    pub fn isotropic_stable(alpha: f64, c: f64, dim: usize) -> Self {
        LevySpec::SymmetricStable { alpha, spectral: StableSpectral::Isotropic { c, dim } }
    }

    pub fn dim(&self) -> usize {
        match self {
            LevySpec::BrownianDrift { drift, .. } => drift.len(),
            LevySpec::CompoundPoisson { jumps: JumpLaw::ParetoSymmetric { .. }, .. } => 1,
            LevySpec::CompoundPoisson { jumps: JumpLaw::ParetoRadial { directions, .. }, .. } => {
                directions.first().map_or(0, |d| d.len())
            }
            LevySpec::SymmetricStable { spectral: StableSpectral::Isotropic { dim, .. }, .. } => *dim,
            LevySpec::SymmetricStable { spectral: StableSpectral::Discrete { directions, .. }, .. } => {
                directions.first().map_or(0, |d| d.len())
            }
        }
    }

    /// Checks shapes and parameter ranges, then that `eta >= 0` and
    /// `eta(0) = 0` on a probe grid.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidLevy(m.to_string()));
        let d = self.dim();
        if d == 0 {
            return bad("dimension must be at least 1");
        }
        match self {
            LevySpec::BrownianDrift { sigma, drift } => {
                if sigma.len() != d || sigma.iter().any(|r| r.len() != d) {
                    return bad("sigma must be a d x d matrix matching the drift length");
                }
                if sigma.iter().flatten().chain(drift).any(|x| !x.is_finite()) {
                    return bad("sigma and drift must be finite");
                }
            }
            LevySpec::CompoundPoisson { beta, jumps } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return bad("beta must be positive");
                }
                match jumps {
                    JumpLaw::ParetoSymmetric { a } => {
                        if !(*a > 0.0 && a.is_finite()) {
                            return bad("Pareto index a must be positive");
                        }
                    }
                    JumpLaw::ParetoRadial { alpha, directions, weights } => {
                        if !(*alpha > 0.0 && alpha.is_finite()) {
                            return bad("Pareto index alpha must be positive");
                        }
                        check_directions(directions, weights, d)?;
                    }
                }
            }
            LevySpec::SymmetricStable { alpha, spectral } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return bad("stable index must lie in (0, 2]");
                }
                if *alpha == 1.0 {
                    return bad("stable index 1 is not supported");
                }
                match spectral {
                    StableSpectral::Isotropic { c, .. } => {
                        if !(*c > 0.0 && c.is_finite()) {
                            return bad("stable scale c must be positive");
                        }
                    }
                    StableSpectral::Discrete { directions, weights } => check_directions(directions, weights, d)?,
                }
            }
        }
        if self.eta(&vec![0.0; d]) != 0.0 {
            return bad("eta(0) must vanish");
        }
        for k in 0..24 {
            let lam: Vec<f64> = (0..d).map(|j| ((k * 7 + j * 3) as f64 * 0.37).sin() * (0.1 + k as f64 * 0.3)).collect();
            if -2.0 * self.rho(&lam).re < -1e-12 {
                return bad("eta is negative at a probe point");
            }
        }
        Ok(())
    }

    pub fn rho(&self, lambda: &[f64]) -> C64 {
        if lambda.iter().all(|&x| x == 0.0) {
            return C64::new(0.0, 0.0);
        }
        match self {
            LevySpec::BrownianDrift { sigma, drift } => {
                // <sigma sigma^T lambda, lambda> = |sigma^T lambda|^2
                let d = drift.len();
                let mut quad = 0.0;
                for j in 0..d {
                    let s: f64 = (0..d).map(|i| sigma[i][j] * lambda[i]).sum();
                    quad += s * s;
                }
                C64::new(-0.5 * quad, dot(drift, lambda))
            }
            LevySpec::CompoundPoisson { beta, jumps } => match jumps {
                JumpLaw::ParetoSymmetric { a } => C64::new(-beta * pareto_cos_part(lambda[0], *a), 0.0),
                JumpLaw::ParetoRadial { alpha, directions, weights } => {
                    let total: f64 = weights.iter().sum();
                    let mut s = C64::new(0.0, 0.0);
                    for (u, w) in directions.iter().zip(weights) {
                        let proj = dot(u, lambda);
                        s += C64::new(-pareto_cos_part(proj, *alpha), pareto_sin_part(proj, *alpha)) * (w / total);
                    }
                    s * *beta
                }
            },
            LevySpec::SymmetricStable { alpha, spectral } => C64::new(-0.5 * stable_zeta(*alpha, spectral, lambda), 0.0),
        }
    }

    pub fn eta(&self, lambda: &[f64]) -> f64 {
        let e = -2.0 * self.rho(lambda).re;
        if e < 0.0 && e > -1e-12 {
            0.0
        } else {
            e
        }
    }

    /// Adds an exact-in-law increment over `dt` to `out`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
        if dt <= 0.0 {
            return;
        }
        match self {
            LevySpec::BrownianDrift { sigma, drift } => {
                let d = drift.len();
                let sq = dt.sqrt();
                if d == 1 {
                    let z: f64 = StandardNormal.sample(rng);
                    out[0] += drift[0] * dt + sigma[0][0] * sq * z;
                    return;
                }
                let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                for i in 0..d {
                    out[i] += drift[i] * dt + sq * (0..d).map(|j| sigma[i][j] * z[j]).sum::<f64>();
                }
            }
            LevySpec::CompoundPoisson { beta, jumps } => {
                let count = jump_count(beta * dt, rng);
                for _ in 0..count {
                    match jumps {
                        JumpLaw::ParetoSymmetric { a } => {
                            let u = 1.0 - rng.random::<f64>();
                            let r = u.powf(-1.0 / a);
                            out[0] += if rng.random::<bool>() { r } else { -r };
                        }
                        JumpLaw::ParetoRadial { alpha, directions, weights } => {
                            let u = 1.0 - rng.random::<f64>();
                            let r = u.powf(-1.0 / alpha);
                            let dir = &directions[pick_weighted(weights, rng)];
                            for (o, x) in out.iter_mut().zip(dir) {
                                *o += r * x;
                            }
                        }
                    }
                }
            }
            LevySpec::SymmetricStable { alpha, spectral } => match spectral {
                StableSpectral::Isotropic { c, dim } => {
                    let scale = c * (0.5 * dt).powf(1.0 / alpha);
                    if *dim == 1 {
                        out[0] += scale * cms_symmetric(*alpha, rng);
                    } else {
                        // sub-Gaussian: sqrt(2A) G with A positive (alpha/2)-stable
                        let a = if *alpha == 2.0 { 1.0 } else { positive_stable(alpha / 2.0, rng) };
                        let s = scale * (2.0 * a).sqrt();
                        for o in out.iter_mut().take(*dim) {
                            let g: f64 = StandardNormal.sample(rng);
                            *o += s * g;
                        }
                    }
                }
                StableSpectral::Discrete { directions, weights } => {
                    for (u, w) in directions.iter().zip(weights) {
                        let s = (w * 0.5 * dt).powf(1.0 / alpha) * cms_symmetric(*alpha, rng);
                        for (o, x) in out.iter_mut().zip(u) {
                            *o += s * x;
                        }
                    }
                }
            },
        }
    }

    /// The stable law whose domain of normal attraction contains this one.
    pub fn attraction_target(&self) -> Result<AttractionTarget> {
        let power = |alpha: f64| BRule::Power { alpha };
        match self {
            LevySpec::BrownianDrift { sigma, .. } => {
                let d = sigma.len();
                let mut a = vec![vec![0.0; d]; d];
                for i in 0..d {
                    for j in 0..d {
                        a[i][j] = (0..d).map(|k| sigma[i][k] * sigma[j][k]).sum();
                    }
                }
                Ok(AttractionTarget { alpha: 2.0, zeta: StableForm::Quadratic { a }, b_rule: power(2.0) })
            }
            LevySpec::CompoundPoisson { beta, jumps } => match jumps {
                JumpLaw::ParetoSymmetric { a } => {
                    if *a > 2.0 {
                        let dcoef = beta * a / (a - 2.0);
                        Ok(AttractionTarget {
                            alpha: 2.0,
                            zeta: StableForm::Quadratic { a: vec![vec![dcoef]] },
                            b_rule: power(2.0),
                        })
                    } else if *a < 2.0 {
                        let c_alpha = 2.0 * beta * a * cos_integral_from_zero(*a);
                        Ok(AttractionTarget {
                            alpha: *a,
                            zeta: StableForm::Isotropic { alpha: *a, c: c_alpha.powf(1.0 / a) },
                            b_rule: power(*a),
                        })
                    } else {
                        Err(Error::NoAttractionTarget)
                    }
                }
                JumpLaw::ParetoRadial { alpha, directions, weights } => {
                    let total: f64 = weights.iter().sum();
                    let w: Vec<f64> = weights.iter().map(|w| w / total).collect();
                    if *alpha > 2.0 {
                        let d = directions[0].len();
                        let k = beta * alpha / (alpha - 2.0);
                        let mut a = vec![vec![0.0; d]; d];
                        for (u, wi) in directions.iter().zip(&w) {
                            for i in 0..d {
                                for j in 0..d {
                                    a[i][j] += k * wi * u[i] * u[j];
                                }
                            }
                        }
                        Ok(AttractionTarget { alpha: 2.0, zeta: StableForm::Quadratic { a }, b_rule: power(2.0) })
                    } else if *alpha < 2.0 {
                        let k = 2.0 * beta * alpha * cos_integral_from_zero(*alpha);
                        Ok(AttractionTarget {
                            alpha: *alpha,
                            zeta: StableForm::Spherical {
                                alpha: *alpha,
                                directions: directions.clone(),
                                weights: w.iter().map(|x| k * x).collect(),
                            },
                            b_rule: power(*alpha),
                        })
                    } else {
                        Err(Error::NoAttractionTarget)
                    }
                }
            },
            LevySpec::SymmetricStable { alpha, spectral } => {
                let zeta = match spectral {
                    StableSpectral::Isotropic { c, .. } => StableForm::Isotropic { alpha: *alpha, c: *c },
                    StableSpectral::Discrete { directions, weights } => StableForm::Spherical {
                        alpha: *alpha,
                        directions: directions.clone(),
                        weights: weights.clone(),
                    },
                };
                Ok(AttractionTarget { alpha: *alpha, zeta, b_rule: power(*alpha) })
            }
        }
    }
}

fn check_directions(directions: &[Vec<f64>], weights: &[f64], d: usize) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidLevy(m.to_string()));
    if directions.is_empty() || directions.len() != weights.len() {
        return bad("directions and weights must be non-empty and of equal length");
    }
    for u in directions {
        if u.len() != d {
            return bad("all directions must share one dimension");
        }
        if (u.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-9 {
            return bad("directions must be unit vectors");
        }
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
        return bad("weights must be nonnegative with a positive sum");
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pick_weighted<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> usize {
    if w.len() == 1 {
        return 0;
    }
    let total: f64 = w.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, x) in w.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    w.len() - 1
}

/// Number of jumps in one step: Poisson with mean `mean`.
pub fn jump_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

fn stable_zeta(alpha: f64, spectral: &StableSpectral, lambda: &[f64]) -> f64 {
    match spectral {
        StableSpectral::Isotropic { c, .. } => (c * norm(lambda)).powf(alpha),
        StableSpectral::Discrete { directions, weights } => directions
            .iter()
            .zip(weights)
            .map(|(u, w)| w * dot(u, lambda).abs().powf(alpha))
            .sum(),
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Chambers-Mallows-Stuck draw with characteristic function `exp(-|t|^alpha)`.
pub fn cms_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w = -(1.0 - rng.random::<f64>()).ln();
    if alpha == 2.0 {
        return 2.0 * v.sin() * w.sqrt();
    }
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Kanter's draw of a positive stable variable with `E exp(-sA) = exp(-s^a)`, `0 < a < 1`.
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let e = -(1.0 - rng.random::<f64>()).ln();
    let part = (a * u).sin() / u.sin().powf(1.0 / a);
    part * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a)
}

/// `int_0^inf (1 - cos x) x^(-1-a) dx = Gamma(1-a) cos(pi a / 2) / a` for `0 < a < 2`.
pub fn cos_integral_from_zero(a: f64) -> f64 {
    if (a - 1.0).abs() < 1e-12 {
        return PI / 2.0;
    }
    statrs::function::gamma::gamma(1.0 - a) * (PI * a / 2.0).cos() / a
}

/// `int_s^1 x^p dx` for `0 < s <= 1`.
fn power_integral(p: f64, s: f64) -> f64 {
    if (p + 1.0).abs() < 1e-12 {
        -s.ln()
    } else {
        (1.0 - s.powf(p + 1.0)) / (p + 1.0)
    }
}

/// `int_X^inf e^(ix) x^(-nu) dx` by its asymptotic expansion; `X >= 100`.
fn oscillatory_tail(x: f64, nu: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let mut term = C64::new(x.powf(-nu), 0.0);
    let mut sum = term;
    for k in 0..60 {
        term *= -i * (nu + k as f64) / x;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    i * C64::from_polar(1.0, x) * sum
}

/// `(int_s^inf (1 - cos x) x^(-1-a) dx, int_s^inf sin x x^(-1-a) dx)`, `s > 0`.
fn pareto_tail_integrals(s: f64, a: f64) -> (f64, f64) {
    let mut cos_part = 0.0;
    let mut sin_part = 0.0;
    let start = s.max(1.0);
    if s < 1.0 {
        // series on [s, 1]
        let mut fact = 1.0;
        let mut sign = 1.0;
        for k in 1..40 {
            fact *= (2 * k - 1) as f64 * (2 * k) as f64;
            cos_part += sign * power_integral(2.0 * k as f64 - 1.0 - a, s) / fact;
            sign = -sign;
        }
        let mut fact = 1.0;
        let mut sign = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            }
            sin_part += sign * power_integral(2.0 * k as f64 - a, s) / fact;
            sign = -sign;
        }
    }
    let panels = (((100.0f64).max(start + 1.0) - start) / (PI / 4.0)).ceil() as usize;
    let end = start + panels as f64 * PI / 4.0;
    let mut fc = |x: f64| (1.0 - x.cos()) * x.powf(-1.0 - a);
    let mut fs = |x: f64| x.sin() * x.powf(-1.0 - a);
    for p in 0..panels {
        let lo = start + p as f64 * PI / 4.0;
        let hi = lo + PI / 4.0;
        cos_part += gl_panel(&mut fc, lo, hi);
        sin_part += gl_panel(&mut fs, lo, hi);
    }
    let tail = oscillatory_tail(end, 1.0 + a);
    cos_part += end.powf(-a) / a - tail.re;
    sin_part += tail.im;
    (cos_part, sin_part)
}

/// `int_1^inf (1 - cos(s w)) a w^(-1-a) dw`, even in `s`.
pub fn pareto_cos_part(s: f64, a: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 {
        return 0.0;
    }
    a * s.powf(a) * pareto_tail_integrals(s, a).0
}

/// `int_1^inf sin(s w) a w^(-1-a) dw`, odd in `s`.
pub fn pareto_sin_part(s: f64, a: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let v = a * s.abs().powf(a) * pareto_tail_integrals(s.abs(), a).1;
    v * s.signum()
}

/// Limit exponent `zeta(lambda)` of a symmetric stable law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StableForm {
    /// `<A lambda, lambda>`.
    Quadratic { a: Vec<Vec<f64>> },
    /// `c^alpha |lambda|^alpha`.
    Isotropic { alpha: f64, c: f64 },
    /// `sum_i w_i |<lambda, u_i>|^alpha`.
    Spherical { alpha: f64, directions: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl StableForm {
    pub fn eval(&self, lambda: &[f64]) -> f64 {
        match self {
            StableForm::Quadratic { a } => {
                let mut s = 0.0;
                for (i, row) in a.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        s += v * lambda[i] * lambda[j];
                    }
                }
                s
            }
            StableForm::Isotropic { alpha, c } => (c * norm(lambda)).powf(*alpha),
            StableForm::Spherical { alpha, directions, weights } => directions
                .iter()
                .zip(weights)
                .map(|(u, w)| w * dot(u, lambda).abs().powf(*alpha))
                .sum(),
        }
    }
}

/// How the spread of the `N`-component system scales with `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BRule {
    /// `b_N = N^(1/alpha)`.
    Power { alpha: f64 },
    /// `b_N` read from a user table of `(N, b_N)` pairs.
    Table { entries: Vec<(usize, f64)> },
}

impl BRule {
    pub fn b(&self, n: usize) -> Result<f64> {
        match self {
            BRule::Power { alpha } => Ok((n as f64).powf(1.0 / alpha)),
            BRule::Table { entries } => entries
                .iter()
                .find(|(k, _)| *k == n)
                .map(|e| e.1)
                .ok_or_else(|| Error::arg(format!("no b_N entry for N = {n}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractionTarget {
    pub alpha: f64,
    pub zeta: StableForm,
    pub b_rule: BRule,
}

impl AttractionTarget {
    /// Replaces the normalization with a user-supplied `b_N` table.
    pub fn with_table(mut self, entries: Vec<(usize, f64)>) -> Self {
        self.b_rule = BRule::Table { entries };
        self
    }
}
