//! Stochastic synchronization of N components driven by Levy noise.
//!
//! Each component moves as an independent Levy process. Every component
//! also carries a renewal clock with a matrix-exponential inter-event law;
//! when its clock rings it copies its state onto another component. The
//! crate simulates such systems and computes their stationary
//! characteristic functions in closed form or by quadrature.
//!
//! | module | what it does |
//! |---|---|
//! | [`polyrat`] | polynomials, roots, partial fractions, inverse Laplace |
//! | [`me_dist`] | inter-event laws: transforms, moments, sampling, renewal density, generating functions |
//! | [`levy`] | Levy exponents, exact increment samplers, attraction targets |
//! | [`simulator`] | event-driven Monte Carlo and the V-statistic estimator |
//! | [`analytic`] | Markov formulas, the general-model integral, large-N asymptotics |
//! | [`limits_stats`] | limit laws, empirical CFs, KS test, rescaling |
//! | [`experiment`] | JSON-configured runs and file outputs |
//!
//! The runnable programs in `examples/` walk through each of these.

pub mod analytic;
mod error;
pub mod experiment;
pub mod levy;
pub mod limits_stats;
pub mod me_dist;
pub mod polyrat;
pub mod quad;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `k_N = 1 - 2/((N-1)N)`: the factor by which one synchronization
/// contracts the centred V-statistic in expectation.
pub fn k_n(n: usize) -> f64 {
    1.0 - l_n(n)
}

/// `l_N = 2/((N-1)N)`.
pub fn l_n(n: usize) -> f64 {
    2.0 / ((n as f64 - 1.0) * n as f64)
}

/// `gamma_N = 1/k_N - 1`.
pub fn gamma_n(n: usize) -> f64 {
    let nn = (n as f64 - 1.0) * n as f64;
    2.0 / (nn - 2.0)
}

/// Lowercase hex SHA-256 of `bytes`.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
