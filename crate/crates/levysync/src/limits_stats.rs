//! Limit laws, empirical characteristic functions, goodness of fit and
//! intrinsic-scale rescaling.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::levy::{cms_symmetric, StableForm};
use crate::simulator::DifferenceSample;
use crate::{Error, Result};

/// Fewest samples [`empirical_cf`] accepts.
pub const MIN_CF_SAMPLES: usize = 100;

/// Symmetric limit laws of the rescaled difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitLaw {
    /// `1 / (1 + m zeta(lambda) / 2)`.
    GeometricStable { m: f64, zeta: StableForm },
    /// `1 / (1 + c0^2 lambda^2)`.
    Laplace1d { c0: f64 },
    /// `1 / (1 + c^alpha |lambda|^alpha)`.
    Linnik1d { alpha: f64, c: f64 },
}

impl LimitLaw {
    pub fn cf(&self, lambda: &[f64]) -> f64 {
        match self {
            LimitLaw::GeometricStable { m, zeta } => 1.0 / (1.0 + 0.5 * m * zeta.eval(lambda)),
            LimitLaw::Laplace1d { c0 } => 1.0 / (1.0 + (c0 * lambda[0]).powi(2)),
            LimitLaw::Linnik1d { alpha, c } => 1.0 / (1.0 + (c * lambda[0].abs()).powf(*alpha)),
        }
    }

    /// One draw from a one-dimensional law: `c E^(1/alpha) S` with `E`
    /// standard exponential and `S` standard symmetric stable.
    pub fn sample_1d<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (alpha, c) = match self {
            LimitLaw::Laplace1d { c0 } => (2.0, *c0),
            LimitLaw::Linnik1d { alpha, c } => (*alpha, *c),
            LimitLaw::GeometricStable { .. } => {
                return Err(Error::arg("sampling is only provided for the one-dimensional laws"))
            }
        };
        let e = -(1.0 - rng.random::<f64>()).ln();
        Ok(c * e.powf(1.0 / alpha) * cms_symmetric(alpha, rng))
    }
}

pub fn limit_cf(law: &LimitLaw, lambda: &[f64]) -> f64 {
    law.cf(lambda)
}

/// `e^(-|y|/c0) / (2 c0)`.
pub fn laplace_density(c0: f64, y: f64) -> f64 {
    (-y.abs() / c0).exp() / (2.0 * c0)
}

pub fn laplace_cdf(c0: f64, y: f64) -> f64 {
    let tail = 0.5 * (-y.abs() / c0).exp();
    if y < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// One probe of a [`CfTable`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfPoint {
    pub lambda: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub theory: Option<f64>,
}

impl CfPoint {
    pub fn abs_err(&self) -> Option<f64> {
        self.theory.map(|t| (self.re - t).abs())
    }
}

/// Empirical and theoretical characteristic functions on a probe grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfTable {
    pub points: Vec<CfPoint>,
}

impl CfTable {
    /// Fills the theoretical side from `f(lambda)`.
    pub fn with_theory<F: FnMut(&[f64]) -> Result<f64>>(mut self, mut f: F) -> Result<Self> {
        for p in &mut self.points {
            p.theory = Some(f(&p.lambda)?);
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.lambda.len())
    }
}

/// Mean of `e^(i <lambda, x>)` over the samples, with standard errors.
pub fn empirical_cf(samples: &DifferenceSample, grid: &[Vec<f64>]) -> Result<CfTable> {
    let n = samples.len();
    if n < MIN_CF_SAMPLES {
        return Err(Error::TooFewSamples { got: n, need: MIN_CF_SAMPLES });
    }
    let d = samples.dim;
    if grid.iter().any(|l| l.len() != d) {
        return Err(Error::arg(format!("every lambda must have {d} components")));
    }
    let nf = n as f64;
    let points = grid
        .iter()
        .map(|lam| {
            let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let a: f64 = samples.row(i).iter().zip(lam).map(|(x, l)| x * l).sum();
                let (si, ci) = a.sin_cos();
                c += ci;
                s += si;
                c2 += ci * ci;
                s2 += si * si;
            }
            let (re, im) = (c / nf, s / nf);
            let var = |sum2: f64, mean: f64| ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            CfPoint {
                lambda: lam.clone(),
                re,
                im,
                se_re: (var(c2, re) / nf).sqrt(),
                se_im: (var(s2, im) / nf).sqrt(),
                theory: None,
            }
        })
        .collect();
    Ok(CfTable { points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfDistance {
    /// `sup |Re(empirical) - theory|`.
    pub sup_re: f64,
    /// `sup |Im(empirical)|`.
    pub sup_im: f64,
    /// `sup |Im| / SE(Im)`; zero where the standard error vanishes with `Im`.
    pub max_im_z: f64,
}

pub fn cf_distance(table: &CfTable) -> Result<CfDistance> {
    let mut out = CfDistance { sup_re: 0.0, sup_im: 0.0, max_im_z: 0.0 };
    for p in &table.points {
        let err = p.abs_err().ok_or_else(|| Error::arg("table has no theoretical column"))?;
        out.sup_re = out.sup_re.max(err);
        out.sup_im = out.sup_im.max(p.im.abs());
        if p.im != 0.0 {
            let z = if p.se_im > 0.0 { p.im.abs() / p.se_im } else { f64::INFINITY };
            out.max_im_z = out.max_im_z.max(z);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub n: usize,
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// `sup_y |F_n(y) - F(y)|` over values that are sorted ascending.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc, (i, &y)| {
        let f = cdf(y);
        acc.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    })
}

/// One-sample KS test against Laplace(c0). The default critical value
/// is the 5% level `1.36 / sqrt(n)`.
pub fn ks_test_laplace(samples: &DifferenceSample, c0: f64, critical: Option<f64>) -> Result<KsReport> {
    if samples.dim != 1 {
        return Err(Error::arg(format!("KS test needs one-dimensional samples, got d = {}", samples.dim)));
    }
    if !(c0 > 0.0) {
        return Err(Error::arg("c0 must be positive"));
    }
    let n = samples.len();
    if n == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let mut v = samples.values.clone();
    v.sort_by(f64::total_cmp);
    let statistic = ks_statistic(&v, |y| laplace_cdf(c0, y));
    let critical = critical.unwrap_or(1.36 / (n as f64).sqrt());
    Ok(KsReport { n, statistic, critical, pass: statistic < critical })
}

/// `y = x / b_N` or `y = N^(-B) x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RescaleRule {
    Scalar { b: f64 },
    Matrix { exponent: Vec<Vec<f64>> },
}

impl RescaleRule {
    /// The linear map applied to each sample, as a `d x d` matrix.
    pub fn matrix(&self, n: usize, d: usize) -> Result<DMatrix<f64>> {
        match self {
            RescaleRule::Scalar { b } => {
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::arg(format!("scale must be positive, got {b}")));
                }
                Ok(DMatrix::identity(d, d) / *b)
            }
            RescaleRule::Matrix { exponent } => {
                if exponent.len() != d || exponent.iter().any(|r| r.len() != d) {
                    return Err(Error::arg(format!("matrix exponent must be {d} x {d}")));
                }
                let b = DMatrix::from_fn(d, d, |i, j| exponent[i][j]);
                let low = b.complex_eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                if !(low >= 0.5) {
                    return Err(Error::arg(format!("exponent eigenvalues need real part >= 1/2, found {low}")));
                }
                Ok((b * -(n as f64).ln()).exp())
            }
        }
    }
}

pub fn rescale(samples: &DifferenceSample, rule: &RescaleRule, n: usize) -> Result<DifferenceSample> {
    let d = samples.dim;
    let mut out = samples.clone();
    match rule {
        // plain division keeps scalar rescaling exact
        RescaleRule::Scalar { b } => {
            rule.matrix(n, d)?;
            out.values.iter_mut().for_each(|v| *v /= b);
        }
        RescaleRule::Matrix { .. } => {
            let a = rule.matrix(n, d)?;
            for (dst, src) in out.values.chunks_exact_mut(d).zip(samples.values.chunks_exact(d)) {
                for (i, y) in dst.iter_mut().enumerate() {
                    *y = (0..d).map(|j| a[(i, j)] * src[j]).sum();
                }
            }
        }
    }
    Ok(out)
}

/// Least-squares Linnik scale at fixed `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinnikFit {
    pub alpha: f64,
    pub c: f64,
    /// `sup |Re(empirical) - fitted|` over the probes used.
    pub sup_residual: f64,
    pub probes: usize,
}

/// Fits `c` in `1/(1 + c^alpha |lambda|^alpha)` to the real part of a
/// one-dimensional table, using probes with `lo <= |lambda| <= hi`.
pub fn fit_linnik_scale(table: &CfTable, alpha: f64, lo: f64, hi: f64) -> Result<LinnikFit> {
    if table.dim() != 1 {
        return Err(Error::arg("Linnik fit needs a one-dimensional table"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    let pts: Vec<(f64, f64)> = table
        .points
        .iter()
        .filter(|p| (lo..=hi).contains(&p.lambda[0].abs()))
        .map(|p| (p.lambda[0].abs(), p.re))
        .collect();
    if pts.is_empty() {
        return Err(Error::arg(format!("no probes with |lambda| in [{lo}, {hi}]")));
    }
    let model = |lc: f64, l: f64| 1.0 / (1.0 + (lc.exp() * l).powf(alpha));
    let sse = |lc: f64| pts.iter().map(|&(l, y)| (y - model(lc, l)).powi(2)).sum::<f64>();
    // coarse scan in ln c, then golden section around the best cell
    let (mut best, mut best_v) = (0.0, f64::INFINITY);
    for k in 0..=400 {
        let lc = -10.0 + 0.05 * k as f64;
        let v = sse(lc);
        if v < best_v {
            best = lc;
            best_v = v;
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best - 0.05, best + 0.05);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sse(x2);
        }
    }
    let lc = 0.5 * (a + b);
    let sup_residual = pts.iter().map(|&(l, y)| (y - model(lc, l)).abs()).fold(0.0, f64::max);
    Ok(LinnikFit { alpha, c: lc.exp(), sup_residual, probes: pts.len() })
}

/// Magnitudes `0.05 .. 5`, 20 log-spaced values.
pub fn default_magnitudes() -> Vec<f64> {
    (0..20).map(|i| 0.05 * 100f64.powf(i as f64 / 19.0)).collect()
}

/// [`lambda_grid_from_magnitudes`] over [`default_magnitudes`]: 41 probes for `d = 1`.
pub fn default_lambda_grid(d: usize) -> Vec<Vec<f64>> {
    lambda_grid_from_magnitudes(d, &default_magnitudes())
}

/// For `d = 1`: zero plus both signs of each magnitude, sorted.
/// For `d > 1`: zero plus each magnitude along every axis and along the
/// unit main diagonal.
pub fn lambda_grid_from_magnitudes(d: usize, mags: &[f64]) -> Vec<Vec<f64>> {
    let mut grid = vec![vec![0.0; d.max(1)]];
    if d <= 1 {
        for &m in mags {
            grid.push(vec![-m]);
            grid.push(vec![m]);
        }
        grid.sort_by(|a, b| a[0].total_cmp(&b[0]));
        return grid;
    }
    for axis in 0..d {
        for &m in mags {
            let mut l = vec![0.0; d];
            l[axis] = m;
            grid.push(l);
        }
    }
    let u = 1.0 / (d as f64).sqrt();
    for &m in mags {
        grid.push(vec![m * u; d]);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn limit_cf_examples() {
        let laws = [
            LimitLaw::Laplace1d { c0: 1.0 },
            LimitLaw::Linnik1d { alpha: 1.5, c: 1.0 },
            LimitLaw::GeometricStable { m: 2.0, zeta: StableForm::Isotropic { alpha: 1.2, c: 0.7 } },
        ];
        for l in &laws {
            assert_eq!(l.cf(&[0.0]), 1.0);
        }
        assert!((laws[0].cf(&[1.0]) - 0.5).abs() < 1e-15);
        assert!((laws[1].cf(&[2.0]) - 0.261_204).abs() < 1e-6);
        assert_eq!(laws[1].cf(&[2.0]), laws[1].cf(&[-2.0]));
    }

    #[test]
    fn laplace_examples() {
        assert_eq!(laplace_density(2.0, 0.0), 0.25);
        assert_eq!(laplace_cdf(3.0, 0.0), 0.5);
        assert!((laplace_cdf(1.0, 2f64.ln()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn empirical_cf_examples() {
        let two_point = DifferenceSample::from_values([1.0, -1.0].repeat(50), 1);
        let t = empirical_cf(&two_point, &[vec![std::f64::consts::PI]]).unwrap();
        assert!((t.points[0].re + 1.0).abs() < 1e-14);
        let zeros = DifferenceSample::from_values(vec![0.0; 200], 1);
        let t = empirical_cf(&zeros, &default_lambda_grid(1)).unwrap();
        assert!(t.points.iter().all(|p| p.re == 1.0 && p.im == 0.0));
        let few = DifferenceSample::from_values(vec![0.0; 10], 1);
        assert!(matches!(empirical_cf(&few, &[vec![1.0]]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn distance_examples() {
        let p = |re: f64, th: f64| CfPoint { lambda: vec![1.0], re, im: 0.0, se_re: 0.0, se_im: 0.0, theory: Some(th) };
        let t = CfTable { points: vec![p(0.5, 0.5), p(0.3, 0.3)] };
        assert_eq!(cf_distance(&t).unwrap().sup_re, 0.0);
        let t = CfTable { points: vec![p(0.5, 0.5), p(0.35, 0.3)] };
        assert!((cf_distance(&t).unwrap().sup_re - 0.05).abs() < 1e-15);
    }

    #[test]
    fn ks_examples() {
        let one = DifferenceSample::from_values(vec![0.0], 1);
        assert_eq!(ks_test_laplace(&one, 1.0, None).unwrap().statistic, 0.5);
        let two_d = DifferenceSample::from_values(vec![0.0, 1.0], 2);
        assert!(ks_test_laplace(&two_d, 1.0, None).is_err());
    }

    #[test]
    fn ks_accepts_laplace_and_rejects_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let law = LimitLaw::Laplace1d { c0: 1.0 };
        let v: Vec<f64> = (0..100_000).map(|_| law.sample_1d(&mut rng).unwrap()).collect();
        assert!(ks_test_laplace(&DifferenceSample::from_values(v, 1), 1.0, None).unwrap().pass);
        // Laplace(1) has variance 2
        let g: Vec<f64> = (0..100_000)
            .map(|_| 2f64.sqrt() * rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng))
            .collect();
        assert!(!ks_test_laplace(&DifferenceSample::from_values(g, 1), 1.0, None).unwrap().pass);
    }

    #[test]
    fn rescale_examples() {
        let s = DifferenceSample::from_values(vec![6.0, -1.5], 1);
        assert_eq!(rescale(&s, &RescaleRule::Scalar { b: 1.0 }, 4).unwrap().values, s.values);
        assert_eq!(rescale(&s, &RescaleRule::Scalar { b: 2.0 }, 4).unwrap().values, vec![3.0, -0.75]);
        let s = DifferenceSample::from_values(vec![8.0, 8.0], 2);
        let rule = RescaleRule::Matrix { exponent: vec![vec![0.5, 0.0], vec![0.0, 1.0]] };
        let y = rescale(&s, &rule, 4).unwrap().values;
        assert!((y[0] - 4.0).abs() < 4e-12 && (y[1] - 2.0).abs() < 2e-12);
        let bad = RescaleRule::Matrix { exponent: vec![vec![0.2, 0.0], vec![0.0, 1.0]] };
        assert!(rescale(&s, &bad, 4).is_err());
    }

    #[test]
    fn linnik_fit_recovers_scale() {
        let law = LimitLaw::Linnik1d { alpha: 1.5, c: 1.7 };
        let points = default_lambda_grid(1)
            .into_iter()
            .map(|l| CfPoint { re: law.cf(&l), lambda: l, im: 0.0, se_re: 0.0, se_im: 0.0, theory: None })
            .collect();
        let fit = fit_linnik_scale(&CfTable { points }, 1.5, 0.1, 3.0).unwrap();
        assert!((fit.c - 1.7).abs() < 1e-8 && fit.sup_residual < 1e-10);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_lambda_grid(1);
        assert_eq!(g.len(), 41);
        assert!((g[40][0] - 5.0).abs() < 1e-12 && (g[21][0] - 0.05).abs() < 1e-15);
        assert_eq!(default_lambda_grid(2).len(), 1 + 3 * 20);
    }
}
