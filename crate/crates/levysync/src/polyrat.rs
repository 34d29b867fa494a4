//! Complex polynomials, rational functions and their partial fractions.
//!
//! Coefficients are stored in ascending order. Roots come from the
//! eigenvalues of a balanced companion matrix followed by one guarded
//! Newton step. A proper rational function splits into principal parts
//! `sum_k c_k (z - z_j)^(-k)`, which invert term by term into the
//! exponential polynomial `sum_k c_k t^(k-1) e^(z_j t) / (k-1)!`.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative distance under which computed roots are treated as one
/// candidate multiple root. A merge is only kept if the resulting
/// decomposition reconstructs the function.
const CLUSTER_TOL: f64 = 1e-5;
/// Roots closer than this (relative) must be a genuine multiple root.
pub const SEPARATION_TOL: f64 = 1e-8;
const RECONSTRUCT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    /// Trailing (highest degree) exact zeros are trimmed.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = &p * &Self::new(vec![-r, ONE]);
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == ZERO
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// `sum |c_i| |z|^i`, the natural size of the terms summed by `eval`.
    pub fn magnitude_at(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divides by `z^k`, discarding the `k` lowest coefficients.
    ///
    /// Callers use this only when those coefficients vanish analytically.
    pub fn drop_low(&self, k: usize) -> Self {
        if k >= self.coeffs.len() {
            return Self::zero();
        }
        Self::new(self.coeffs[k..].to_vec())
    }

    pub fn div_rem(&self, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = d.degree();
        if self.degree() < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let lead = d.leading();
        let mut q = vec![ZERO; self.degree() - dd + 1];
        for i in (0..q.len()).rev() {
            let c = r[i + dd] / lead;
            q[i] = c;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i + j] -= c * dc;
            }
        }
        r.truncate(dd.max(1));
        Ok((Self::new(q), Self::new(r)))
    }

    /// Coefficients of `w -> p(z0 + w)`.
    pub fn taylor_at(&self, z0: C64) -> Vec<C64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let hi = c[j + 1];
                c[j] += z0 * hi;
            }
        }
        c
    }

    /// All roots with multiplicity, ordered by real then imaginary part.
    pub fn roots(&self) -> Result<Vec<C64>> {
        if self.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let lo = self.coeffs.iter().position(|&c| c != ZERO).unwrap();
        let mut out = vec![ZERO; lo];
        let reduced = self.drop_low(lo);
        let n = reduced.degree();
        if n == 1 {
            out.push(-reduced.coeffs[0] / reduced.coeffs[1]);
        } else if n >= 2 {
            let found = if reduced.is_real() {
                real_companion_roots(&reduced)?
            } else {
                complex_companion_roots(&reduced)?
            };
            out.extend(found);
        }
        sort_roots(&mut out);
        Ok(out)
    }

    fn newton_polish(&self, z: C64) -> C64 {
        let d = self.derivative();
        let fz = self.eval(z);
        let dz = d.eval(z);
        if dz == ZERO || fz == ZERO {
            return z;
        }
        let z1 = z - fz / dz;
        if z1.re.is_finite() && z1.im.is_finite() && self.eval(z1).norm() < fz.norm() {
            z1
        } else {
            z
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &[C64], i: usize| v.get(i).copied().unwrap_or(ZERO);
        Polynomial::new((0..n).map(|i| get(&self.coeffs, i) + get(&o.coeffs, i)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-ONE)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self + &(-o)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        let mut c = vec![ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

fn cmp_roots(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn sort_roots(r: &mut [C64]) {
    r.sort_by(cmp_roots);
}

/// Parlett-Reinsch balancing with powers of two, so it is exact.
fn balance<T: nalgebra::ComplexField<RealField = f64> + Copy>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm1();
                    r += m[(i, j)].norm1();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] = m[(i, j)].scale(1.0 / f);
                    m[(j, i)] = m[(j, i)].scale(f);
                }
            }
        }
    }
}

fn real_companion_roots(p: &Polynomial) -> Result<Vec<C64>> {
    let n = p.degree();
    let lead = p.leading().re;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p.coeffs[i].re / lead;
    }
    balance(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 100_000).ok_or(Error::EigenFailure(n))?;
    let eig = schur.complex_eigenvalues();
    // Real Schur yields exact conjugate pairs; polish the upper half only
    // and mirror it so the set stays conjugate-closed.
    let mut out = Vec::with_capacity(n);
    for z in eig.iter() {
        if z.im == 0.0 {
            let w = p.newton_polish(*z);
            out.push(C64::new(w.re, 0.0));
        } else if z.im > 0.0 {
            let w = p.newton_polish(*z);
            if w.im > 0.0 {
                out.push(w);
                out.push(w.conj());
            } else {
                out.push(*z);
                out.push(z.conj());
            }
        }
    }
    if out.len() != n {
        return Err(Error::EigenFailure(n));
    }
    Ok(out)
}

fn complex_companion_roots(p: &Polynomial) -> Result<Vec<C64>> {
    let n = p.degree();
    let lead = p.leading();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p.coeffs[i] / lead;
    }
    balance(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 100_000).ok_or(Error::EigenFailure(n))?;
    let eig = schur.eigenvalues().ok_or(Error::EigenFailure(n))?;
    Ok(eig.iter().map(|&z| p.newton_polish(z)).collect())
}

/// Free-function form of [`Polynomial::roots`].
pub fn roots(p: &Polynomial) -> Result<Vec<C64>> {
    p.roots()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let d = self.den.eval(z);
        if d == ZERO || d.norm() <= 1e-13 * self.den.magnitude_at(z) {
            return Err(Error::NearPole(z));
        }
        Ok(self.num.eval(z) / d)
    }

    /// deg num < deg den.
    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Proper, with every pole strictly in the left half-plane.
    pub fn is_rpfn(&self) -> Result<bool> {
        if !self.is_proper() {
            return Ok(false);
        }
        if self.den.degree() == 0 {
            return Ok(true);
        }
        Ok(self.den.roots()?.iter().all(|r| r.re < 0.0))
    }

    /// Taylor coefficients at `z = 0` up to `z^order`.
    pub fn series_at_zero(&self, order: usize) -> Result<Vec<C64>> {
        let d0 = self.den.coeffs[0];
        if d0 == ZERO {
            return Err(Error::NearPole(ZERO));
        }
        let n: Vec<C64> = (0..=order).map(|i| self.num.coeffs.get(i).copied().unwrap_or(ZERO)).collect();
        let d: Vec<C64> = (0..=order).map(|i| self.den.coeffs.get(i).copied().unwrap_or(ZERO)).collect();
        Ok(series_div(&n, &d, order + 1))
    }

    pub fn partial_fractions(&self) -> Result<PartialFractions> {
        self.check_proper()?;
        if self.num.is_zero() {
            return Ok(PartialFractions { terms: vec![] });
        }
        let roots = self.den.roots()?;
        let clustered = cluster(&roots, CLUSTER_TOL);
        let merged = self.build_pf(&clustered, &roots);
        if let Ok(pf) = merged {
            if self.reconstructs(&pf) {
                return Ok(pf);
            }
        }
        // The merge may have swallowed distinct but close roots; try them
        // as simple poles unless they are closer than the separation floor.
        let singles = cluster(&roots, 0.0);
        let tight = cluster(&roots, SEPARATION_TOL);
        if let Some(bad) = tight.iter().find(|c| c.1 > 1) {
            return Err(Error::UnresolvedMultiplePole(bad.0));
        }
        let pf = self.build_pf(&singles, &roots)?;
        if self.reconstructs(&pf) {
            Ok(pf)
        } else {
            let worst = roots.first().copied().unwrap_or(ZERO);
            Err(Error::UnresolvedMultiplePole(worst))
        }
    }

    /// Decomposition over a known pole set `(pole, multiplicity)`.
    ///
    /// Multiplicities must add up to the denominator degree. The result is
    /// still checked by reconstruction.
    pub fn partial_fractions_with_poles(&self, poles: &[(C64, usize)]) -> Result<PartialFractions> {
        self.check_proper()?;
        let total: usize = poles.iter().map(|p| p.1).sum();
        if total != self.den.degree() {
            return Err(Error::arg(format!(
                "pole multiplicities sum to {total}, denominator degree is {}",
                self.den.degree()
            )));
        }
        let mut flat = Vec::with_capacity(total);
        for &(p, k) in poles {
            flat.extend(std::iter::repeat_n(p, k));
        }
        let pf = self.build_pf(poles, &flat)?;
        if self.reconstructs(&pf) {
            Ok(pf)
        } else {
            Err(Error::UnresolvedMultiplePole(poles.first().map(|p| p.0).unwrap_or(ZERO)))
        }
    }

    fn check_proper(&self) -> Result<()> {
        if !self.is_proper() {
            return Err(Error::Improper { num: self.num.degree(), den: self.den.degree() });
        }
        Ok(())
    }

    fn build_pf(&self, clusters: &[(C64, usize)], all_roots: &[C64]) -> Result<PartialFractions> {
        let dprime = self.den.derivative();
        let lead = self.den.leading();
        let mut terms = Vec::with_capacity(clusters.len());
        for &(z0, n) in clusters {
            if n == 1 {
                let d = dprime.eval(z0);
                if d == ZERO {
                    return Err(Error::UnresolvedMultiplePole(z0));
                }
                terms.push(PoleTerm { pole: z0, coeffs: vec![self.num.eval(z0) / d] });
                continue;
            }
            let scale = 1.0 + z0.norm();
            let others: Vec<C64> = all_roots
                .iter()
                .copied()
                .filter(|r| (*r - z0).norm() > CLUSTER_TOL * scale)
                .collect();
            if others.len() + n != all_roots.len() {
                return Err(Error::UnresolvedMultiplePole(z0));
            }
            let rest = Polynomial::from_roots(&others).scale(lead);
            let g = series_div(&self.num.taylor_at(z0), &rest.taylor_at(z0), n);
            // coefficient of (z - z0)^(-k) is g_(n-k)
            let coeffs = (1..=n).map(|k| g[n - k]).collect();
            terms.push(PoleTerm { pole: z0, coeffs });
        }
        Ok(PartialFractions { terms })
    }

    fn reconstructs(&self, pf: &PartialFractions) -> bool {
        let radius = 2.0 * (1.0 + pf.terms.iter().map(|t| t.pole.norm()).fold(0.0, f64::max));
        let mut checked = 0;
        for i in 0..400 {
            if checked == 100 {
                break;
            }
            let rr = radius * ((i as f64 + 0.5) / 400.0).sqrt();
            let z = C64::from_polar(rr, 2.399_963_229_728_653 * i as f64);
            if pf.terms.iter().any(|t| (z - t.pole).norm() < 1e-2 * radius) {
                continue;
            }
            let Ok(f) = self.eval(z) else { continue };
            let mut size = 0.0;
            for t in &pf.terms {
                let w = (z - t.pole).inv();
                let mut wp = w;
                for c in &t.coeffs {
                    size += (c * wp).norm();
                    wp *= w;
                }
            }
            let g = pf.eval(z).unwrap_or(C64::new(f64::NAN, 0.0));
            let err = (g - f).norm();
            // f itself is only as accurate as the expanded denominator allows
            let abs_sum: f64 = self.den.coeffs.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm());
            let cond = abs_sum / self.den.eval(z).norm();
            let tol = RECONSTRUCT_TOL.max(1e3 * f64::EPSILON * cond);
            if !(err <= tol * size.max(f.norm()).max(f64::MIN_POSITIVE)) {
                return false;
            }
            checked += 1;
        }
        checked > 0
    }
}

/// Free-function form of [`RationalFunction::partial_fractions`].
pub fn partial_fractions(f: &RationalFunction) -> Result<PartialFractions> {
    f.partial_fractions()
}

/// Power-series quotient `a / b`, first `n` coefficients.
fn series_div(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut q = vec![ZERO; n];
    for k in 0..n {
        let mut s = a.get(k).copied().unwrap_or(ZERO);
        for j in 0..k {
            s -= q[j] * b.get(k - j).copied().unwrap_or(ZERO);
        }
        q[k] = s / b[0];
    }
    q
}

/// Groups roots whose mutual distance is below `tol * (1 + |z|)`.
/// Returns (cluster mean, size) in root order.
fn cluster(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<(C64, Vec<C64>)> = Vec::new();
    for &r in roots {
        let hit = groups.iter_mut().find(|g| (g.0 - r).norm() <= tol * (1.0 + r.norm()));
        match hit {
            Some(g) => {
                g.1.push(r);
                g.0 = g.1.iter().sum::<C64>() / g.1.len() as f64;
            }
            None => groups.push((r, vec![r])),
        }
    }
    groups.into_iter().map(|(c, v)| (c, v.len())).collect()
}

/// Principal part at one pole; `coeffs[k - 1]` multiplies `(z - pole)^(-k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTerm {
    pub pole: C64,
    pub coeffs: Vec<C64>,
}

impl PoleTerm {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn residue(&self) -> C64 {
        self.coeffs[0]
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PartialFractions {
    pub terms: Vec<PoleTerm>,
}

impl PartialFractions {
    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut s = ZERO;
        for t in &self.terms {
            let dz = z - t.pole;
            if dz.norm() <= 1e-12 * (1.0 + t.pole.norm()) {
                return Err(Error::NearPole(z));
            }
            let w = dz.inv();
            let mut wp = w;
            for &c in &t.coeffs {
                s += c * wp;
                wp *= w;
            }
        }
        Ok(s)
    }

    pub fn poles(&self) -> Vec<C64> {
        self.terms.iter().map(|t| t.pole).collect()
    }

    /// Time-domain function whose Laplace transform is this sum.
    ///
    /// Poles must lie in the open left half-plane; a simple pole at the
    /// origin is allowed and contributes a constant.
    pub fn to_exp_poly(&self) -> Result<ExpPoly> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let scale = 1.0 + t.pole.norm();
            let at_origin = t.pole.norm() <= 1e-12 * scale;
            if at_origin {
                if t.order() > 1 {
                    return Err(Error::UnstableTransform(t.pole));
                }
                terms.push(ExpTerm { coef: t.coeffs[0], power: 0, rate: ZERO });
                continue;
            }
            if t.pole.re >= -1e-14 * scale {
                return Err(Error::UnstableTransform(t.pole));
            }
            let mut fact = 1.0;
            for (k, &c) in t.coeffs.iter().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                terms.push(ExpTerm { coef: c / fact, power: k as u32, rate: t.pole });
            }
        }
        Ok(ExpPoly { terms })
    }

    pub fn inverse_laplace(&self, t: f64) -> Result<C64> {
        Ok(self.to_exp_poly()?.eval(t))
    }
}

/// Free-function form of [`PartialFractions::inverse_laplace`].
pub fn inverse_laplace(pf: &PartialFractions, t: f64) -> Result<C64> {
    pf.inverse_laplace(t)
}

/// `coef * t^power * e^(rate t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub coef: C64,
    pub power: u32,
    pub rate: C64,
}

/// A finite sum of [`ExpTerm`]s.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExpPoly {
    pub terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn eval(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|e| e.coef * t.powi(e.power as i32) * (e.rate * t).exp())
            .sum()
    }

    /// `int_0^u f(w) dw`.
    pub fn integral(&self, u: f64) -> C64 {
        self.terms.iter().map(|e| e.coef * mono_exp_integral(e.power, e.rate, u)).sum()
    }

    /// `int_0^u f(w) g(u - w) dw`.
    pub fn convolve_at(&self, g: &ExpPoly, u: f64) -> C64 {
        let mut s = ZERO;
        for a in &self.terms {
            for b in &g.terms {
                s += a.coef * b.coef * mono_exp_convolution(a.power, a.rate, b.power, b.rate, u);
            }
        }
        s
    }

    pub fn scale(&self, c: C64) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|e| ExpTerm { coef: e.coef * c, ..*e }).collect() }
    }
}

/// `K_i(x) = int_0^1 s^i e^(x s) ds`.
///
/// Power series for small `|x|`, the upward recursion
/// `K_i = (e^x - i K_(i-1)) / x` otherwise.
pub fn k_fn(i: u32, x: C64) -> C64 {
    if x.norm() <= 2.0 {
        let mut term = ONE;
        let mut s = ONE / (i as f64 + 1.0);
        for n in 1..80 {
            term *= x / n as f64;
            let add = term / (n as f64 + i as f64 + 1.0);
            s += add;
            if add.norm() < 1e-18 * s.norm() {
                break;
            }
        }
        s
    } else {
        let ex = x.exp();
        let mut k = (ex - ONE) / x;
        for j in 1..=i {
            k = (ex - k * j as f64) / x;
        }
        k
    }
}

/// `E_i(a, u) = int_0^u w^i e^(a w) dw = u^(i+1) K_i(a u)`.
pub fn mono_exp_integral(i: u32, a: C64, u: f64) -> C64 {
    if u == 0.0 {
        return ZERO;
    }
    k_fn(i, a * u) * u.powi(i as i32 + 1)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `int_0^u y^q e^(b y) (u - y)^r e^(a (u - y)) dy`, arranged so the
/// exponential left inside the integral never grows.
pub fn mono_exp_convolution(q: u32, b: C64, r: u32, a: C64, u: f64) -> C64 {
    let (q, b, r, a) = if b.re <= a.re { (q, b, r, a) } else { (r, a, q, b) };
    let c = b - a;
    let mut s = ZERO;
    for l in 0..=r {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        s += mono_exp_integral(q + l, c, u) * (sign * binom(r, l) * u.powi((r - l) as i32));
    }
    s * (a * u).exp()
}
