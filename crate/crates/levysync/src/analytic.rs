//! Theoretical characteristic functions of the difference `x_j - x_k`.
//!
//! All functions take the Levy exponent already reduced to the scalar
//! `eta = -2 Re rho(lambda)`; see [`crate::levy::LevySpec::eta`].
//!
//! * Markov clocks: closed forms, stationary and time-dependent.
//! * General matrix-exponential clocks: `chi = l_N J_N`, with `J_N` an
//!   integral of the renewal generating functions, plus the large-N
//!   form `1/(1 + theta_1 eta)` and the gap between the two.
//! * Finite horizon: the exact `I_N(t)` and its stationary surrogate
//!   `J_N(t)`, for convergence studies.

use crate::me_dist::{GeneratingFunctions, MeDistribution, PerturbedRootData};
use crate::polyrat::{mono_exp_convolution, ExpPoly, ExpTerm};
use crate::quad::integrate;
use crate::{k_n, l_n, Complex64 as C64, Error, Result};

/// Absolute tolerance on `J_N(infinity)`.
pub const J_TOL: f64 = 1e-9;
/// Absolute tolerance on the finite-horizon `I_N(t)` and `J_N(t)`.
pub const FINITE_T_TOL: f64 = 1e-6;
/// The `J_N` integral is cut at `TRUNCATION / (N |kappa_N| + eta)`.
pub const TRUNCATION: f64 = 40.0;

/// `1 / (1 + (N-1) m eta / 2)`.
pub fn chi_markov_inf(n: usize, m: f64, eta: f64) -> f64 {
    1.0 / (1.0 + 0.5 * (n as f64 - 1.0) * m * eta)
}

/// Solution of `chi' = -q chi + w` with `w = 2/((N-1)m)`, `q = eta + w`.
pub fn chi_markov_t(n: usize, m: f64, eta: f64, t: f64, chi0: f64) -> f64 {
    let w = 2.0 / ((n as f64 - 1.0) * m);
    let q = eta + w;
    let e = (-q * t).exp();
    chi0 * e + (w / q) * (1.0 - e)
}

/// Per-N constants of the symmetric model.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncConstants {
    pub n: usize,
    /// Pairwise interaction constant; always 2 here.
    pub kappa: f64,
    pub k_n: f64,
    pub l_n: f64,
    /// `1 / (N |kappa_N|)`.
    pub theta1_n: f64,
    /// `d0^(N-1) c0 l_N / (m |kappa_N|) - 1`.
    pub theta3_n: f64,
}

impl SyncConstants {
    pub fn new(dist: &MeDistribution, n: usize) -> Result<Self> {
        Ok(Self::from_roots(&dist.solve_perturbed_roots(n)?))
    }

    pub fn from_roots(r: &PerturbedRootData) -> Self {
        Self {
            n: r.n,
            kappa: 2.0,
            k_n: k_n(r.n),
            l_n: l_n(r.n),
            theta1_n: r.theta1(),
            theta3_n: r.theta3(),
        }
    }
}

/// Small-gamma series of the leading residues `c0` and `d0`, built from
/// the first three moments.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueSeries {
    pub gamma: f64,
    /// Coefficient of `gamma` in `c0`.
    pub c1: f64,
    /// Coefficient of `gamma^2` in `c0`.
    pub c2: f64,
    /// Coefficient of `gamma^2` in `d0`; `d0` has no linear term.
    pub d2: f64,
}

impl ResidueSeries {
    pub fn new(dist: &MeDistribution, n: usize) -> Result<Self> {
        let (m1, m2, m3) = (dist.moment(1)?, dist.moment(2)?, dist.moment(3)?);
        Ok(Self {
            gamma: crate::gamma_n(n),
            c1: 1.0 - m2 / (2.0 * m1 * m1),
            c2: (9.0 * m2 * m2 - 6.0 * m1 * m1 * m2 - 4.0 * m1 * m3) / (12.0 * m1.powi(4)),
            d2: (3.0 * m2 * m2 - 2.0 * m1 * m3) / (12.0 * m1.powi(4)),
        })
    }

    /// `c0` through order `gamma^2`.
    pub fn c0(&self) -> f64 {
        1.0 + self.c1 * self.gamma + self.c2 * self.gamma * self.gamma
    }

    /// `d0` through order `gamma^2`.
    pub fn d0(&self) -> f64 {
        1.0 + self.d2 * self.gamma * self.gamma
    }
}

/// Precomputed roots and generating functions for one `(distribution, N)`.
#[derive(Clone, Debug)]
pub struct GeneralModel {
    dist: MeDistribution,
    n: usize,
    roots: PerturbedRootData,
    gf: GeneratingFunctions,
    constants: SyncConstants,
}

impl GeneralModel {
    pub fn new(dist: &MeDistribution, n: usize) -> Result<Self> {
        let roots = dist.solve_perturbed_roots(n)?;
        let gf = roots.generating_functions();
        let constants = SyncConstants::from_roots(&roots);
        Ok(Self { dist: dist.clone(), n, roots, gf, constants })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constants(&self) -> &SyncConstants {
        &self.constants
    }

    pub fn roots(&self) -> &PerturbedRootData {
        &self.roots
    }

    pub fn generating_functions(&self) -> &GeneratingFunctions {
        &self.gf
    }

    fn check_eta(eta: f64) -> Result<()> {
        if eta >= 0.0 && eta.is_finite() {
            Ok(())
        } else {
            Err(Error::arg(format!("eta must be finite and nonnegative, got {eta}")))
        }
    }

    /// `(N/m) int_0^inf e^(-u eta) phi2(u)^(N-1) phi(u) du`.
    pub fn j_infinity(&self, eta: f64) -> Result<f64> {
        Self::check_eta(eta)?;
        let n = self.n as f64;
        let m = self.dist.mean();
        let u_max = TRUNCATION / (n * self.roots.kappa_n.abs() + eta);
        let pw = self.n as i32 - 1;
        let f = |u: f64| (-u * eta).exp() * self.gf.phi2(u).powi(pw) * self.gf.phi(u);
        // the fastest transient sets the initial panel width
        let fastest = self.gf.roots.iter().map(|r| -r.re).fold(eta, f64::max);
        let panels = ((u_max * fastest / 8.0).ceil() as usize).clamp(8, 4096);
        Ok(n / m * integrate(f, 0.0, u_max, J_TOL * m / n, panels)?)
    }

    /// `l_N J_N(infinity)`.
    pub fn chi_inf(&self, eta: f64) -> Result<f64> {
        Ok(self.constants.l_n * self.j_infinity(eta)?)
    }

    /// `1 / (1 + theta_1 eta)`.
    pub fn chi_asymptotic(&self, eta: f64) -> f64 {
        1.0 / (1.0 + self.constants.theta1_n * eta)
    }

    /// `sup |chi_inf - chi_asymptotic|` over `eta_grid`.
    pub fn theta2_remainder(&self, eta_grid: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &eta in eta_grid {
            worst = worst.max((self.chi_inf(eta)? - self.chi_asymptotic(eta)).abs());
        }
        Ok(worst)
    }

    /// `g_s(w) = p(s + w) + int_0^s h(y) p(s + w - y) dy` as a function of `w`.
    fn first_renewal_density(&self, s: f64, h: &ExpPoly) -> ExpPoly {
        let p = self.dist.density_exp_poly();
        let mut terms = Vec::new();
        for a in &p.terms {
            let q = a.power;
            for k in 0..=q {
                let mut inner = C64::new(s.powi(k as i32), 0.0) * (a.rate * s).exp();
                for b in &h.terms {
                    inner += b.coef * mono_exp_convolution(b.power, b.rate, k, a.rate, s);
                }
                terms.push(ExpTerm { coef: a.coef * binom(q, k) * inner, power: q - k, rate: a.rate });
            }
        }
        ExpPoly { terms }
    }

    /// Generating function of the renewal count on `[s, s + u]` of an
    /// ordinary process, evaluated at `v = k_N`.
    pub fn phi_1s(&self, s: f64, u: f64) -> Result<f64> {
        let h = self.dist.renewal_density()?;
        Ok(self.phi_1s_with(s, u, &h))
    }

    fn phi_1s_with(&self, s: f64, u: f64, h: &ExpPoly) -> f64 {
        let g = self.first_renewal_density(s, h);
        let v = self.constants.k_n;
        (C64::new(1.0, 0.0) - g.integral(u) + g.convolve_at(self.gf.phi_exp_poly(), u) * v).re
    }

    fn finite_t(&self, eta: f64, t: f64, exact: bool) -> Result<f64> {
        Self::check_eta(eta)?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::arg(format!("t must be finite and nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let h = self.dist.renewal_density()?;
        let pw = self.n as i32 - 1;
        let f = |s: f64| {
            let u = t - s;
            let lead = if exact { self.phi_1s_with(s, u, &h) } else { self.gf.phi2(u) };
            h.eval(s).re * (-u * eta).exp() * lead.powi(pw) * self.gf.phi(u)
        };
        let n = self.n as f64;
        let panels = (t.ceil() as usize).clamp(4, 512);
        Ok(n * integrate(f, 0.0, t, FINITE_T_TOL / n, panels)?)
    }

    /// `N int_0^t h(s) e^(-(t-s) eta) phi_{1,s}(t-s)^(N-1) phi(t-s) ds`.
    pub fn i_finite_t(&self, eta: f64, t: f64) -> Result<f64> {
        self.finite_t(eta, t, true)
    }

    /// As [`Self::i_finite_t`] with `phi2` in place of `phi_{1,s}`.
    pub fn j_finite_t(&self, eta: f64, t: f64) -> Result<f64> {
        self.finite_t(eta, t, false)
    }

    /// `chi(t) = chi0 e^(-t eta) phi(t)^N + l_N I_N(t)`, where `chi0` is
    /// the mean V-statistic at time zero.
    pub fn chi_t(&self, eta: f64, t: f64, chi0: f64) -> Result<f64> {
        let free = chi0 * (-t * eta).exp() * self.gf.phi(t).powi(self.n as i32);
        Ok(free + self.constants.l_n * self.i_finite_t(eta, t)?)
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `J_N(infinity)` for one `(distribution, N, eta)`.
pub fn j_n_infinity(dist: &MeDistribution, n: usize, eta: f64) -> Result<f64> {
    GeneralModel::new(dist, n)?.j_infinity(eta)
}

/// `l_N J_N(infinity)`: the stationary difference CF for general clocks.
pub fn chi_general_inf(dist: &MeDistribution, n: usize, eta: f64) -> Result<f64> {
    GeneralModel::new(dist, n)?.chi_inf(eta)
}

/// `1 / (1 + theta_1 eta)` with `theta_1 = 1/(N |kappa_N|)`.
pub fn chi_asymptotic(dist: &MeDistribution, n: usize, eta: f64) -> Result<f64> {
    Ok(GeneralModel::new(dist, n)?.chi_asymptotic(eta))
}

pub fn theta2_remainder(dist: &MeDistribution, n: usize, eta_grid: &[f64]) -> Result<f64> {
    GeneralModel::new(dist, n)?.theta2_remainder(eta_grid)
}

pub fn i_n_finite_t(dist: &MeDistribution, n: usize, eta: f64, t: f64) -> Result<f64> {
    GeneralModel::new(dist, n)?.i_finite_t(eta, t)
}

pub fn j_n_finite_t(dist: &MeDistribution, n: usize, eta: f64, t: f64) -> Result<f64> {
    GeneralModel::new(dist, n)?.j_finite_t(eta, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expo() -> MeDistribution {
        MeDistribution::exponential(1.0).unwrap()
    }

    fn erlang2() -> MeDistribution {
        MeDistribution::erlang(2, 1.0).unwrap()
    }

    #[test]
    fn markov_examples() {
        assert!((chi_markov_inf(5, 1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(chi_markov_inf(7, 2.0, 0.0), 1.0);
        assert!((chi_markov_inf(2, 1.0, 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(chi_markov_t(5, 1.0, 1.0, 0.0, 0.3), 0.3);
        assert!((chi_markov_t(5, 1.0, 1.0, 200.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        for t in [0.0, 0.5, 3.0] {
            assert!((chi_markov_t(5, 1.0, 0.0, t, 1.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn markov_ode_holds() {
        let (n, m, eta) = (6, 1.5, 0.7);
        let w = 2.0 / ((n as f64 - 1.0) * m);
        for t in [0.1, 1.0, 4.0] {
            let h = 1e-5;
            let d = (chi_markov_t(n, m, eta, t + h, 0.9) - chi_markov_t(n, m, eta, t - h, 0.9)) / (2.0 * h);
            let chi = chi_markov_t(n, m, eta, t, 0.9);
            assert!((d - (-(eta + w) * chi + w)).abs() < 1e-8);
        }
    }

    #[test]
    fn exponential_j_matches_markov() {
        assert!((chi_general_inf(&expo(), 5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        assert!((chi_general_inf(&erlang2(), 7, 0.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn asymptotic_examples() {
        let c = SyncConstants::new(&expo(), 9).unwrap();
        assert!((c.theta1_n - 4.0).abs() < 1e-10);
        assert!((c.k_n + c.l_n - 1.0).abs() < 1e-15);
        assert_eq!(chi_asymptotic(&erlang2(), 10, 0.0).unwrap(), 1.0);
        let c = SyncConstants::new(&erlang2(), 10).unwrap();
        assert!((c.theta1_n - 4.474_86).abs() < 1e-5);
    }

    #[test]
    fn remainder_examples() {
        assert!(theta2_remainder(&expo(), 10, &[0.1, 1.0, 10.0]).unwrap() < 1e-6);
        assert!(theta2_remainder(&erlang2(), 10, &[0.0]).unwrap() < 1e-12);
        let grid = [0.1, 0.3, 1.0, 3.0, 10.0];
        let r5 = theta2_remainder(&erlang2(), 5, &grid).unwrap();
        let r40 = theta2_remainder(&erlang2(), 40, &grid).unwrap();
        assert!(r40 < r5);
    }

    #[test]
    fn first_renewal_window_of_exponential_is_memoryless() {
        let g = GeneralModel::new(&expo(), 5).unwrap();
        for (s, u) in [(0.0, 1.0), (2.0, 0.5), (7.0, 3.0)] {
            assert!((g.phi_1s(s, u).unwrap() - g.generating_functions().phi(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_t_examples() {
        let g = GeneralModel::new(&expo(), 5).unwrap();
        assert_eq!(g.i_finite_t(1.0, 0.0).unwrap(), 0.0);
        let v = g.constants().l_n * g.i_finite_t(1.0, 50.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-4);
        assert!((g.chi_t(1.0, 2.0, 1.0).unwrap() - chi_markov_t(5, 1.0, 1.0, 2.0, 1.0)).abs() < 1e-6);
    }

    #[test]
    fn finite_t_gap_shrinks() {
        let g = GeneralModel::new(&erlang2(), 5).unwrap();
        let gap = |t| (g.i_finite_t(1.0, t).unwrap() - g.j_finite_t(1.0, t).unwrap()).abs();
        assert!(gap(100.0) < gap(10.0));
    }

    #[test]
    fn residue_series_coefficients() {
        let s = ResidueSeries::new(&erlang2(), 10).unwrap();
        assert!((s.c1 - 0.25).abs() < 1e-12);
        assert!((s.c2 + 0.0625).abs() < 1e-12);
        assert!((s.d2 - 0.0625).abs() < 1e-12);
        let e = ResidueSeries::new(&expo(), 10).unwrap();
        assert!(e.c1.abs() < 1e-12 && e.c2.abs() < 1e-12 && e.d2.abs() < 1e-12);
    }
}
