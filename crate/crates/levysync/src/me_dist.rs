//! Inter-event laws with a rational Laplace transform.
//!
//! `p*(z) = P(z)/Q(z)` is the transform of the density. From it we derive
//! moments, the renewal density `h* = p*/(1 - p*)`, and the transforms of
//! the renewal-count generating functions
//!
//! ```text
//! phi*(z, v)  = (1 - p*) / (z (1 - v p*))
//! phi2*(z, v) = (p* - 1 + m z)/(m z^2) + v (1 - p*)/(m z) phi*(z, v)
//! ```
//!
//! for the ordinary and the stationary renewal process. Both have simple
//! poles at the roots of `Q - vP`; [`MeDistribution::solve_perturbed_roots`]
//! finds them at `v = k_N` and singles out the real root `kappa_N` closest
//! to the origin, which sets the slowest decay rate.
//!
//! Phase-type forms (exponential, Erlang, hyperexponential, Coxian) can be
//! sampled; a distribution given by raw coefficients is analytics-only.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::polyrat::{ExpPoly, ExpTerm, PartialFractions, Polynomial, RationalFunction};
use crate::{gamma_n, k_n, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Roots closer than this (relative) count as one multiple root.
const MULTIPLE_ROOT_TOL: f64 = 1e-7;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Samplable representation of an inter-event law.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerForm {
    Exponential { mean: f64 },
    Erlang { stages: usize, mean: f64 },
    HyperExponential { weights: Vec<f64>, means: Vec<f64> },
    /// Phase `i` has rate `rates[i]` and is followed by absorption with
    /// probability `exit_probs[i]`, otherwise by phase `i + 1`.
    Coxian { rates: Vec<f64>, exit_probs: Vec<f64> },
}

impl SamplerForm {
    /// The transform computed straight from the sampler's structure.
    pub fn transform(&self, z: C64) -> C64 {
        match self {
            SamplerForm::Exponential { mean } => ONE / (ONE + z * *mean),
            SamplerForm::Erlang { stages, mean } => {
                let mu = *stages as f64 / mean;
                (re(mu) / (z + mu)).powi(*stages as i32)
            }
            SamplerForm::HyperExponential { weights, means } => weights
                .iter()
                .zip(means)
                .map(|(w, m)| re(*w) / (ONE + z * *m))
                .sum(),
            SamplerForm::Coxian { rates, exit_probs } => {
                let mut reach = 1.0;
                let mut prod = ONE;
                let mut s = ZERO;
                for (mu, e) in rates.iter().zip(exit_probs) {
                    prod *= re(*mu) / (z + *mu);
                    s += prod * (reach * e);
                    reach *= 1.0 - e;
                }
                s
            }
        }
    }
}

/// Acyclic phase chain: phase `i` exits at rate `rates[i]`, then moves to
/// `i + 1` with probability `next[i]` or is absorbed.
#[derive(Clone, Debug)]
struct PhaseChain {
    rates: Vec<f64>,
    next: Vec<f64>,
    initial: Vec<f64>,
    stationary: Vec<f64>,
}

impl PhaseChain {
    fn new(rates: Vec<f64>, next: Vec<f64>, initial: Vec<f64>, mean: f64) -> Self {
        // expected visits, then time-in-phase share of the equilibrium law
        let mut visits = vec![0.0; rates.len()];
        for i in 0..rates.len() {
            visits[i] = initial[i] + if i > 0 { visits[i - 1] * next[i - 1] } else { 0.0 };
        }
        let stationary = visits.iter().zip(&rates).map(|(v, r)| v / (r * mean)).collect();
        Self { rates, next, initial, stationary }
    }

    fn draw<R: Rng + ?Sized>(&self, start: &[f64], rng: &mut R) -> f64 {
        let mut i = pick(start, rng);
        let mut t = 0.0;
        loop {
            t += exp_inverse(1.0 / self.rates[i], rng.random::<f64>());
            let p = self.next[i];
            if p <= 0.0 || i + 1 == self.rates.len() {
                return t;
            }
            if p < 1.0 && rng.random::<f64>() >= p {
                return t;
            }
            i += 1;
        }
    }
}

fn pick<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let nonzero = probs.iter().filter(|&&p| p > 0.0).count();
    if nonzero <= 1 {
        return probs.iter().position(|&p| p > 0.0).unwrap_or(0);
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Exponential draw with the given mean by inversion of a uniform `u`.
pub fn exp_inverse(mean: f64, u: f64) -> f64 {
    -mean * (1.0 - u).ln()
}

/// An inter-event law with rational Laplace transform.
#[derive(Clone, Debug)]
pub struct MeDistribution {
    p_star: RationalFunction,
    sampler: Option<SamplerForm>,
    chain: Option<PhaseChain>,
    moments: [f64; 4],
    density: ExpPoly,
    renewal_roots: Vec<C64>,
}

impl MeDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        Self::from_sampler(SamplerForm::Exponential { mean })
    }

    pub fn erlang(stages: usize, mean: f64) -> Result<Self> {
        Self::from_sampler(SamplerForm::Erlang { stages, mean })
    }

    pub fn hyper_exponential(weights: Vec<f64>, means: Vec<f64>) -> Result<Self> {
        Self::from_sampler(SamplerForm::HyperExponential { weights, means })
    }

    pub fn coxian(rates: Vec<f64>, exit_probs: Vec<f64>) -> Result<Self> {
        Self::from_sampler(SamplerForm::Coxian { rates, exit_probs })
    }

    pub fn from_sampler(form: SamplerForm) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        let positive = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x > 0.0);
        // (rates, next, initial) of the phase chain
        let (rates, next, initial): (Vec<f64>, Vec<f64>, Vec<f64>) = match &form {
            SamplerForm::Exponential { mean } => {
                if !positive(&[*mean]) {
                    return bad(format!("exponential mean must be positive, got {mean}"));
                }
                (vec![1.0 / mean], vec![0.0], vec![1.0])
            }
            SamplerForm::Erlang { stages, mean } => {
                if !(1..=8).contains(stages) || !positive(&[*mean]) {
                    return bad(format!("Erlang needs 1..=8 stages and a positive mean, got {stages}, {mean}"));
                }
                let mu = *stages as f64 / mean;
                let mut next = vec![1.0; *stages];
                next[stages - 1] = 0.0;
                let mut init = vec![0.0; *stages];
                init[0] = 1.0;
                (vec![mu; *stages], next, init)
            }
            SamplerForm::HyperExponential { weights, means } => {
                let n = weights.len();
                if n == 0 || n > 4 || means.len() != n {
                    return bad("hyperexponential needs 1..=4 branches with matching weights and means".into());
                }
                if !positive(means) || weights.iter().any(|w| !(*w >= 0.0)) {
                    return bad("hyperexponential weights must be >= 0 and means > 0".into());
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return bad("hyperexponential weights must sum to 1".into());
                }
                (means.iter().map(|m| 1.0 / m).collect(), vec![0.0; n], weights.clone())
            }
            SamplerForm::Coxian { rates, exit_probs } => {
                let n = rates.len();
                if n == 0 || n > 4 || exit_probs.len() != n {
                    return bad("Coxian needs 1..=4 stages with matching rates and exit probabilities".into());
                }
                if !positive(rates) || exit_probs.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return bad("Coxian rates must be > 0 and exit probabilities in [0, 1]".into());
                }
                if exit_probs[n - 1] != 1.0 {
                    return bad("the last Coxian stage must exit with probability 1".into());
                }
                let mut init = vec![0.0; n];
                init[0] = 1.0;
                (rates.clone(), exit_probs.iter().map(|e| 1.0 - e).collect(), init)
            }
        };

        // p* = P/Q with Q = prod (z + mu_i), poles grouped by exact rate
        let q = Polynomial::from_roots(&rates.iter().map(|r| re(-r)).collect::<Vec<_>>());
        let mut p = Polynomial::zero();
        let n = rates.len();
        for i in 0..n {
            // sum over start phases j <= i of initial[j] * prod_{j..=i} mu / (z + mu)
            for j in 0..=i {
                if initial[j] == 0.0 {
                    continue;
                }
                let mut w = initial[j] * (1.0 - next[i]);
                for k in j..i {
                    w *= next[k];
                }
                if w == 0.0 {
                    continue;
                }
                let mut term = Polynomial::constant(re(w));
                for (k, r) in rates.iter().enumerate() {
                    if k >= j && k <= i {
                        term = term.scale(re(*r));
                    } else {
                        term = &term * &Polynomial::new(vec![re(*r), ONE]);
                    }
                }
                p = &p + &term;
            }
        }
        let mut poles: Vec<(C64, usize)> = Vec::new();
        for r in &rates {
            match poles.iter_mut().find(|(z, _)| z.re == -r) {
                Some(e) => e.1 += 1,
                None => poles.push((re(-r), 1)),
            }
        }
        let mean_from_chain = {
            let mut visits = vec![0.0; n];
            for i in 0..n {
                visits[i] = initial[i] + if i > 0 { visits[i - 1] * next[i - 1] } else { 0.0 };
            }
            visits.iter().zip(&rates).map(|(v, r)| v / r).sum::<f64>()
        };
        let chain = PhaseChain::new(rates, next, initial, mean_from_chain);
        let dist = Self::assemble(p, q, Some(poles), Some(form), Some(chain))?;
        let sampler = dist.sampler.as_ref().unwrap();
        for i in 0..20 {
            let z = C64::from_polar(0.1 + 0.25 * i as f64, 0.7 * i as f64 - 1.3);
            if z.re < 0.0 {
                continue;
            }
            let a = dist.p_star_eval(z)?;
            let b = sampler.transform(z);
            if (a - b).norm() > 1e-10 {
                return Err(Error::InvalidDistribution(format!("sampler transform mismatch at {z}: {a} vs {b}")));
            }
        }
        Ok(dist)
    }

    /// Analytics-only law from ascending real coefficients of `P` and `Q`.
    pub fn from_coefficients(num: &[f64], den: &[f64]) -> Result<Self> {
        let p = Polynomial::from_real(num);
        let q = Polynomial::from_real(den);
        Self::assemble(p, q, None, None, None)
    }

    fn assemble(
        p: Polynomial,
        q: Polynomial,
        known_poles: Option<Vec<(C64, usize)>>,
        sampler: Option<SamplerForm>,
        chain: Option<PhaseChain>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if q.is_zero() || q.degree() == 0 {
            return bad("denominator must have degree >= 1".into());
        }
        if !p.is_zero() && p.degree() >= q.degree() {
            return bad(format!("p* must be proper, degrees {} and {}", p.degree(), q.degree()));
        }
        let lead = q.leading();
        let mut q = q.scale(ONE / lead);
        let mut p = p.scale(ONE / lead);
        let p0 = p.coeffs()[0];
        let q0 = q.coeffs()[0];
        if q0 == ZERO || (p0 / q0 - ONE).norm() > 1e-12 {
            return bad(format!("p*(0) must equal 1, got {}", p0 / q0));
        }
        // make P(0) = Q(0) bit-exact so 1 - p* has an exact zero at the origin
        let mut pc = p.coeffs().to_vec();
        pc[0] = q0;
        p = Polynomial::new(pc);
        q = Polynomial::new(q.coeffs().to_vec());

        let p_star = RationalFunction::new(p.clone(), q.clone())?;
        let pf = match &known_poles {
            Some(poles) => p_star.partial_fractions_with_poles(poles)?,
            None => {
                if !p_star.is_rpfn()? {
                    return bad("every pole of p* must have negative real part".into());
                }
                p_star.partial_fractions()?
            }
        };
        let density = pf.to_exp_poly()?;

        let series = p_star.series_at_zero(4)?;
        let mut moments = [0.0; 4];
        let mut fact = 1.0;
        for r in 1..=4 {
            fact *= r as f64;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            moments[r - 1] = sign * fact * series[r].re;
        }
        if !(moments[0] > 0.0) {
            return bad(format!("mean must be positive, got {}", moments[0]));
        }

        let one_minus = (&q - &p).drop_low(1);
        let renewal_roots = if one_minus.degree() == 0 { vec![] } else { one_minus.roots()? };
        if let Some(r) = renewal_roots.iter().find(|r| r.re >= 0.0) {
            return bad(format!("1 - p* has a root {r} outside the open left half-plane"));
        }
        Ok(Self { p_star, sampler, chain, moments, density, renewal_roots })
    }

    pub fn p_star(&self) -> &RationalFunction {
        &self.p_star
    }

    pub fn sampler_form(&self) -> Option<&SamplerForm> {
        self.sampler.as_ref()
    }

    pub fn is_exponential(&self) -> bool {
        self.p_star.den.degree() == 1
    }

    pub fn p_star_eval(&self, z: C64) -> Result<C64> {
        self.p_star.eval(z)
    }

    pub fn mean(&self) -> f64 {
        self.moments[0]
    }

    /// `m_r = (-1)^r (p*)^(r)(0)` for `r` in 1..=4.
    pub fn moment(&self, r: usize) -> Result<f64> {
        if !(1..=4).contains(&r) {
            return Err(Error::arg(format!("moment order must be 1..=4, got {r}")));
        }
        Ok(self.moments[r - 1])
    }

    pub fn density(&self, t: f64) -> f64 {
        self.density.eval(t).re
    }

    pub fn density_exp_poly(&self) -> &ExpPoly {
        &self.density
    }

    pub fn survival(&self, t: f64) -> f64 {
        1.0 - self.density.integral(t).re
    }

    /// Roots of `(1 - p*(z)) / z`, i.e. of `1 - p*` without the origin.
    pub fn renewal_roots(&self) -> &[C64] {
        &self.renewal_roots
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let c = self.chain.as_ref().ok_or(Error::AnalyticsOnly)?;
        Ok(c.draw(&c.initial, rng))
    }

    /// Draw from the equilibrium forward-recurrence density `(1 - F(w))/m`.
    pub fn sample_stationary_first<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let c = self.chain.as_ref().ok_or(Error::AnalyticsOnly)?;
        Ok(c.draw(&c.stationary, rng))
    }

    /// Partial fractions of `h*(z) = p*/(1 - p*) = P/(Q - P)`.
    pub fn renewal_density_pf(&self) -> Result<PartialFractions> {
        ensure_simple(&self.renewal_roots, "1 - p*")?;
        let p = &self.p_star.num;
        let q = &self.p_star.den;
        let den = q - p;
        // the constant coefficient of Q - P is exactly zero by construction
        let den = Polynomial::new(
            std::iter::once(ZERO).chain(den.coeffs().iter().skip(1).copied()).collect(),
        );
        let mut poles = vec![(ZERO, 1)];
        poles.extend(self.renewal_roots.iter().map(|&r| (r, 1)));
        RationalFunction::new(p.clone(), den)?.partial_fractions_with_poles(&poles)
    }

    /// `h(t)` and `H(t)` as exponential polynomials (constant `1/m` included).
    pub fn renewal_density(&self) -> Result<ExpPoly> {
        self.renewal_density_pf()?.to_exp_poly()
    }

    pub fn phi_star(&self, z: C64, v: f64) -> Result<C64> {
        let (p, q) = (&self.p_star.num, &self.p_star.den);
        let num = (q - p).drop_low(1);
        let den = q - &p.scale(re(v));
        RationalFunction::new(num, den)?.eval(z)
    }

    pub fn phi2_star(&self, z: C64, v: f64) -> Result<C64> {
        let (p, q) = (&self.p_star.num, &self.p_star.den);
        let m = self.mean();
        let qv = q - &p.scale(re(v));
        let z_poly = Polynomial::new(vec![ZERO, re(m)]);
        // m z (Q - vP) + (1 - v)(P - Q), divisible by z^2
        let num = &(&z_poly * &qv) + &(p - q).scale(re(1.0 - v));
        RationalFunction::new(num.drop_low(2), qv.scale(re(m)))?.eval(z)
    }

    /// `phi2*` evaluated from its defining sum; not usable near `z = 0`.
    pub fn phi2_star_direct(&self, z: C64, v: f64) -> Result<C64> {
        let m = self.mean();
        let ps = self.p_star_eval(z)?;
        let first = (ps - 1.0 + z * m) / (z * z * m);
        Ok(first + (ONE - ps) / (z * m) * v * self.phi_star(z, v)?)
    }

    /// `theta(z) = (p* - 1 + m z p*) / (m z (1 - p*))`, so that
    /// `phi2* = phi* (1 + (1 - v) theta)`.
    pub fn theta_eval(&self, z: C64) -> Result<C64> {
        let (p, q) = (&self.p_star.num, &self.p_star.den);
        let m = self.mean();
        let z_poly = Polynomial::new(vec![ZERO, re(m)]);
        let num = &(p - q) + &(&z_poly * p);
        let den = (q - p).drop_low(1).scale(re(m));
        RationalFunction::new(num.drop_low(2), den)?.eval(z)
    }

    /// Time-domain generating functions for a general `v` in (0, 1).
    pub fn generating_functions(&self, v: f64) -> Result<GeneratingFunctions> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::arg(format!("v must lie in (0, 1), got {v}")));
        }
        let (p, q) = (&self.p_star.num, &self.p_star.den);
        let roots = (q - &p.scale(re(v))).roots()?;
        ensure_simple(&roots, "1 - v p*")?;
        GeneratingFunctions::from_roots(self, v, &roots)
    }

    /// Roots of `1 - k_N p*` and the residues of `phi*` and `phi2*` there.
    pub fn solve_perturbed_roots(&self, n: usize) -> Result<PerturbedRootData> {
        if n < 2 {
            return Err(Error::arg(format!("N must be at least 2, got {n}")));
        }
        let k = k_n(n);
        let gamma = gamma_n(n);
        let m = self.mean();
        let m2 = self.moments[1];
        let seed = -gamma / m + m2 * gamma * gamma / (2.0 * m * m * m);
        let (p, q) = (&self.p_star.num, &self.p_star.den);
        let den = q - &p.scale(re(k));
        let dden = den.derivative();
        let mut roots = den.roots()?;
        ensure_simple(&roots, "1 - k_N p*")?;

        let newton = |x0: f64| -> Option<f64> {
            let mut x = x0;
            for _ in 0..100 {
                let f = den.eval(re(x)).re;
                let d = dden.eval(re(x)).re;
                if d == 0.0 || !d.is_finite() {
                    return None;
                }
                let step = f / d;
                x -= step;
                if !x.is_finite() {
                    return None;
                }
                if step.abs() < 1e-12 {
                    // one extra step settles the last bit
                    let f = den.eval(re(x)).re;
                    let d = dden.eval(re(x)).re;
                    return Some(x - f / d);
                }
            }
            None
        };
        let nearest_real = roots
            .iter()
            .enumerate()
            .filter(|(_, r)| r.im.abs() <= 1e-9 * (1.0 + r.norm()))
            .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
            .map(|(i, r)| (i, r.re));
        let Some((idx, companion_kappa)) = nearest_real else {
            return Err(Error::NoSeparatedRoot("1 - k_N p* has no real root".into()));
        };
        let mut kappa = if seed.is_finite() { newton(seed) } else { None };
        let agrees = |x: f64| (x - companion_kappa).abs() <= 1e-6 * (1.0 + companion_kappa.abs());
        if !kappa.is_some_and(agrees) {
            kappa = newton(companion_kappa).filter(|x| agrees(*x));
        }
        let kappa = kappa.unwrap_or(companion_kappa);
        roots.remove(idx);

        let max_other = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        if !(kappa < 0.0 && kappa > max_other / 2.0) {
            return Err(Error::NoSeparatedRoot(format!(
                "kappa_N = {kappa}, largest other real part {max_other}"
            )));
        }
        let res = |r: C64| residues(self, k, r, &dden);
        let (c0, d0) = res(re(kappa));
        let (c_others, d_others): (Vec<C64>, Vec<C64>) = roots.iter().map(|&r| res(r)).unzip();
        Ok(PerturbedRootData {
            n,
            k_n: k,
            gamma_n: gamma,
            mean: m,
            kappa_n: kappa,
            seed,
            other_roots: roots,
            c0: c0.re,
            c_others,
            d0: d0.re,
            d_others,
        })
    }
}

/// Residues of `phi*` and `phi2*` at a root `r` of `Q - vP`.
///
/// Using `Q(r) = v P(r)`, the numerators reduce to `(v - 1) P(r) / r` and
/// `(1 - v)^2 P(r) / (m r^2)`, which avoids the cancellation of the raw
/// forms near the origin.
fn residues(dist: &MeDistribution, v: f64, r: C64, dden: &Polynomial) -> (C64, C64) {
    let pr = dist.p_star.num.eval(r);
    let dd = dden.eval(r);
    let c = pr * (v - 1.0) / (r * dd);
    let d = pr * (1.0 - v) * (1.0 - v) / (r * r * dd * dist.mean());
    (c, d)
}

fn ensure_simple(roots: &[C64], what: &str) -> Result<()> {
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            if (a - b).norm() <= MULTIPLE_ROOT_TOL * (1.0 + a.norm()) {
                return Err(Error::MultipleRoot(format!("{what} has a repeated root near {a}")));
            }
        }
    }
    Ok(())
}

/// `phi(t, v) = E v^(renewals in [0, t])` for the ordinary process and
/// `phi2(t, v)` for the stationary one, as exponential polynomials.
#[derive(Clone, Debug)]
pub struct GeneratingFunctions {
    pub v: f64,
    pub roots: Vec<C64>,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
    phi: ExpPoly,
    phi2: ExpPoly,
}

impl GeneratingFunctions {
    fn from_roots(dist: &MeDistribution, v: f64, roots: &[C64]) -> Result<Self> {
        let (p, q) = (&dist.p_star.num, &dist.p_star.den);
        let dden = (q - &p.scale(re(v))).derivative();
        let mut c = Vec::with_capacity(roots.len());
        let mut d = Vec::with_capacity(roots.len());
        for &r in roots {
            if r.re >= 0.0 {
                return Err(Error::UnstableTransform(r));
            }
            let (ci, di) = residues(dist, v, r, &dden);
            c.push(ci);
            d.push(di);
        }
        let mk = |w: &[C64]| ExpPoly {
            terms: roots.iter().zip(w).map(|(&r, &k)| ExpTerm { coef: k, power: 0, rate: r }).collect(),
        };
        Ok(Self { v, roots: roots.to_vec(), phi: mk(&c), phi2: mk(&d), c, d })
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi.eval(t).re
    }

    pub fn phi2(&self, t: f64) -> f64 {
        self.phi2.eval(t).re
    }

    pub fn phi_exp_poly(&self) -> &ExpPoly {
        &self.phi
    }

    pub fn phi2_exp_poly(&self) -> &ExpPoly {
        &self.phi2
    }
}

/// Roots and residues of the perturbed equation `1 - k_N p*(z) = 0`.
#[derive(Clone, Debug)]
pub struct PerturbedRootData {
    pub n: usize,
    pub k_n: f64,
    pub gamma_n: f64,
    pub mean: f64,
    pub kappa_n: f64,
    /// Second-order expansion `-gamma/m + m2 gamma^2/(2 m^3)` used to start Newton.
    pub seed: f64,
    pub other_roots: Vec<C64>,
    pub c0: f64,
    pub c_others: Vec<C64>,
    pub d0: f64,
    pub d_others: Vec<C64>,
}

impl PerturbedRootData {
    /// `1 / (N |kappa_N|)`.
    pub fn theta1(&self) -> f64 {
        1.0 / (self.n as f64 * self.kappa_n.abs())
    }

    /// `d0^(N-1) c0 l_N / (m |kappa_N|) - 1`.
    pub fn theta3(&self) -> f64 {
        let l = 1.0 - self.k_n;
        self.d0.powi(self.n as i32 - 1) * self.c0 * l / (self.mean * self.kappa_n.abs()) - 1.0
    }

    pub fn generating_functions(&self) -> GeneratingFunctions {
        let mut roots = vec![C64::new(self.kappa_n, 0.0)];
        roots.extend(&self.other_roots);
        let mut c = vec![C64::new(self.c0, 0.0)];
        c.extend(&self.c_others);
        let mut d = vec![C64::new(self.d0, 0.0)];
        d.extend(&self.d_others);
        let mk = |w: &[C64]| ExpPoly {
            terms: roots.iter().zip(w).map(|(&r, &k)| ExpTerm { coef: k, power: 0, rate: r }).collect(),
        };
        GeneratingFunctions { v: self.k_n, phi: mk(&c), phi2: mk(&d), roots: roots.clone(), c, d }
    }
}

/// Number of renewals in `[0, horizon]`, with the first interval drawn from
/// the equilibrium law when `stationary` is set.
pub fn count_renewals<R: Rng + ?Sized>(
    dist: &MeDistribution,
    horizon: f64,
    stationary: bool,
    rng: &mut R,
) -> Result<u64> {
    let mut t = if stationary { dist.sample_stationary_first(rng)? } else { dist.sample(rng)? };
    let mut n = 0;
    while t <= horizon {
        n += 1;
        t += dist.sample(rng)?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn erlang2() -> MeDistribution {
        MeDistribution::erlang(2, 1.0).unwrap()
    }

    #[test]
    fn transform_values() {
        let e = MeDistribution::exponential(1.0).unwrap();
        assert!((e.p_star_eval(re(0.0)).unwrap() - ONE).norm() < 1e-15);
        assert!((e.p_star_eval(re(1.0)).unwrap() - re(0.5)).norm() < 1e-15);
        assert!((erlang2().p_star_eval(re(2.0)).unwrap() - re(0.25)).norm() < 1e-15);
        assert!(matches!(e.p_star_eval(re(-1.0)), Err(Error::NearPole(_))));
    }

    #[test]
    fn moment_values() {
        let e = MeDistribution::exponential(1.0).unwrap();
        assert!((e.moment(1).unwrap() - 1.0).abs() < 1e-14);
        assert!((e.moment(2).unwrap() - 2.0).abs() < 1e-14);
        assert!((e.moment(4).unwrap() - 24.0).abs() < 1e-12);
        assert!((erlang2().moment(2).unwrap() - 1.5).abs() < 1e-14);
        assert!((erlang2().moment(3).unwrap() - 3.0).abs() < 1e-13);
        let h = MeDistribution::hyper_exponential(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap();
        assert!((h.mean() - 2.0).abs() < 1e-14);
        assert!((h.moment(2).unwrap() - 10.0).abs() < 1e-12);
        assert!(e.moment(5).is_err());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(MeDistribution::exponential(-1.0).is_err());
        assert!(MeDistribution::erlang(9, 1.0).is_err());
        assert!(MeDistribution::hyper_exponential(vec![0.5, 0.6], vec![1.0, 2.0]).is_err());
        assert!(MeDistribution::coxian(vec![1.0, 2.0], vec![0.3, 0.5]).is_err());
        // p*(0) != 1
        assert!(MeDistribution::from_coefficients(&[2.0], &[1.0, 1.0]).is_err());
        // pole in the right half-plane
        assert!(MeDistribution::from_coefficients(&[-1.0], &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn raw_coefficients_match_catalogue() {
        let raw = MeDistribution::from_coefficients(&[4.0], &[4.0, 4.0, 1.0]).unwrap();
        let cat = erlang2();
        for r in 1..=4 {
            assert!((raw.moment(r).unwrap() - cat.moment(r).unwrap()).abs() < 1e-10);
        }
        assert!(matches!(raw.sample(&mut ChaCha8Rng::seed_from_u64(1)), Err(Error::AnalyticsOnly)));
        for t in [0.1, 1.0, 3.0] {
            assert!((raw.density(t) - cat.density(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn exponential_sampling_is_inversion() {
        assert!((exp_inverse(1.0, 0.5) - 2f64.ln()).abs() < 1e-15);
        let e = MeDistribution::exponential(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut copy = rng.clone();
        let u: f64 = copy.random();
        assert_eq!(e.sample(&mut rng).unwrap(), exp_inverse(1.0, u));
    }

    #[test]
    fn erlang_sample_is_two_stages() {
        let d = erlang2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut copy = rng.clone();
        let a = exp_inverse(0.5, copy.random());
        let b = exp_inverse(0.5, copy.random());
        assert_eq!(d.sample(&mut rng).unwrap(), a + b);
    }

    #[test]
    fn renewal_density_of_erlang2() {
        let pf = erlang2().renewal_density_pf().unwrap();
        let h = pf.to_exp_poly().unwrap();
        for t in [0.1, 1.0, 10.0] {
            assert!((h.eval(t).re - (1.0 - (-4.0 * t).exp())).abs() < 1e-12);
            let big_h = t - (1.0 - (-4.0 * t).exp()) / 4.0;
            assert!((h.integral(t).re - big_h).abs() < 1e-10);
        }
        let zero = pf.terms.iter().find(|t| t.pole.norm() < 1e-14).unwrap();
        assert!((zero.residue() - ONE).norm() < 1e-12);
    }

    #[test]
    fn residue_at_origin_is_inverse_mean() {
        for d in [
            MeDistribution::exponential(2.5).unwrap(),
            MeDistribution::erlang(3, 0.7).unwrap(),
            MeDistribution::hyper_exponential(vec![0.3, 0.7], vec![0.5, 2.0]).unwrap(),
            MeDistribution::coxian(vec![2.0, 1.0], vec![0.4, 1.0]).unwrap(),
        ] {
            let pf = d.renewal_density_pf().unwrap();
            let zero = pf.terms.iter().find(|t| t.pole.norm() < 1e-14).unwrap();
            assert!((zero.residue().re - 1.0 / d.mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn multiple_renewal_root_is_rejected() {
        // Q = (z+1)(z+2)(z+3), P = Q - z (z + 1.5)^2
        let q = [6.0, 11.0, 6.0, 1.0];
        let p = [6.0, 8.75, 3.0];
        let d = MeDistribution::from_coefficients(&p, &q).unwrap();
        assert!(matches!(d.renewal_density_pf(), Err(Error::MultipleRoot(_))));
    }

    #[test]
    fn phi_star_examples() {
        let e = MeDistribution::exponential(2.0).unwrap();
        for &v in &[0.2, 0.9] {
            let z = C64::new(0.7, 0.3);
            let want = ONE / (z + (1.0 - v) / 2.0);
            assert!((e.phi_star(z, v).unwrap() - want).norm() < 1e-14);
            assert!((e.phi_star(re(0.0), v).unwrap() - re(2.0 / (1.0 - v))).norm() < 1e-13);
            assert!((e.phi2_star(z, v).unwrap() - want).norm() < 1e-14);
        }
        let d = erlang2();
        assert!((d.phi_star(re(1.0), 0.5).unwrap() - re(5.0 / 7.0)).norm() < 1e-14);
        assert!((d.phi_star(re(0.0), 0.5).unwrap() - re(2.0)).norm() < 1e-13);
        // stationary counts: m2/(2m) + v m/(1 - v)
        assert!((d.phi2_star(re(0.0), 0.5).unwrap() - re(1.75)).norm() < 1e-13);
    }

    #[test]
    fn phi2_forms_agree() {
        let d = erlang2();
        for &(z, v) in &[(re(1.0), 0.5), (C64::new(0.3, 2.0), 0.9), (re(-0.5), 0.2)] {
            let a = d.phi2_star(z, v).unwrap();
            let b = d.phi2_star_direct(z, v).unwrap();
            let c = d.phi_star(z, v).unwrap() * (ONE + d.theta_eval(z).unwrap() * (1.0 - v));
            assert!((a - b).norm() < 1e-12, "{a} {b}");
            assert!((a - c).norm() < 1e-12, "{a} {c}");
        }
    }

    #[test]
    fn theta_values() {
        let e = MeDistribution::exponential(1.5).unwrap();
        for z in [re(0.5), C64::new(-0.2, 1.0), re(3.0)] {
            assert!(e.theta_eval(z).unwrap().norm() < 1e-12);
        }
        let d = erlang2();
        assert!((d.theta_eval(re(0.0)).unwrap() - re(-0.25)).norm() < 1e-14);
        let h = MeDistribution::hyper_exponential(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap();
        let want = -1.0 + h.moment(2).unwrap() / (2.0 * h.mean() * h.mean());
        assert!((h.theta_eval(re(0.0)).unwrap().re - want).abs() < 1e-12);
    }

    #[test]
    fn perturbed_roots_exponential() {
        let e = MeDistribution::exponential(1.0).unwrap();
        for n in [2, 5, 30] {
            let r = e.solve_perturbed_roots(n).unwrap();
            assert!((r.kappa_n + crate::l_n(n)).abs() < 1e-14);
            assert!(r.other_roots.is_empty());
            assert!((r.c0 - 1.0).abs() < 1e-13 && (r.d0 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn perturbed_roots_erlang2() {
        let r = erlang2().solve_perturbed_roots(10).unwrap();
        let exact = 2.0 * ((44.0f64 / 45.0).sqrt() - 1.0);
        assert!((r.kappa_n - exact).abs() < 1e-12);
        assert!((r.kappa_n - -0.022_347_0).abs() < 1e-7);
        assert!((r.seed - -0.022_339_9).abs() < 1e-7);
        assert!((r.kappa_n - r.seed).abs() < 1e-5);
        assert!((r.theta1() - 4.474_86).abs() < 1e-5);
        let p = erlang2();
        for z in std::iter::once(re(r.kappa_n)).chain(r.other_roots.iter().copied()) {
            assert!((ONE - p.p_star_eval(z).unwrap() * r.k_n).norm() < 1e-10);
        }
    }

    #[test]
    fn generating_functions_start_at_one_and_match_transform() {
        let d = MeDistribution::coxian(vec![3.0, 1.5], vec![0.25, 1.0]).unwrap();
        let g = d.generating_functions(0.8).unwrap();
        assert!((g.phi(0.0) - 1.0).abs() < 1e-12);
        assert!((g.phi2(0.0) - 1.0).abs() < 1e-12);
        let z = C64::new(0.4, 0.9);
        let from_res: C64 = g.roots.iter().zip(&g.c).map(|(r, c)| c / (z - r)).sum();
        assert!((from_res - d.phi_star(z, 0.8).unwrap()).norm() < 1e-12);
        let from_res: C64 = g.roots.iter().zip(&g.d).map(|(r, c)| c / (z - r)).sum();
        assert!((from_res - d.phi2_star(z, 0.8).unwrap()).norm() < 1e-12);
        let e = MeDistribution::exponential(1.0).unwrap().generating_functions(0.3).unwrap();
        assert!((e.phi(2.0) - (-0.7f64 * 2.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn key_renewal_theorem() {
        for d in [
            MeDistribution::exponential(1.0).unwrap(),
            erlang2(),
            MeDistribution::hyper_exponential(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap(),
        ] {
            let h = d.renewal_density().unwrap();
            let f = ExpPoly { terms: vec![ExpTerm { coef: ONE, power: 0, rate: re(-1.0) }] };
            let v = h.convolve_at(&f, 60.0).re;
            assert!((v - 1.0 / d.mean()).abs() < 1e-6);
        }
    }

    #[test]
    fn stationary_density_integrates_to_one() {
        let d = MeDistribution::coxian(vec![2.0, 0.5], vec![0.6, 1.0]).unwrap();
        let m = d.mean();
        let v = crate::quad::integrate(|w| d.survival(w) / m, 0.0, 200.0, 1e-10, 40).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }
}
