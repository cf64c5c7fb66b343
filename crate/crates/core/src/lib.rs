//! Plug-in and sieve classifiers under the margin (low-noise) condition.
//!
//! The crate contains
//!
//! - [`math`]: multi-indices, monomials, Taylor polynomials, compactly
//!   supported kernels and the smooth bump used by the hypercube laws;
//! - [`lp_estimator`]: the local polynomial regression estimator with the
//!   eigenvalue guard, and the plug-in rule `1{eta_hat >= 1/2}`;
//! - [`sieve`]: empirical risk minimisation over an epsilon-net of a Hölder
//!   class with `beta <= 1`;
//! - [`distributions`]: synthetic laws with known regression function,
//!   marginal density and margin function;
//! - [`risk`]: excess-risk oracles, comparison bounds, the Assouad bound,
//!   theoretical exponents, concentration probes and log-log rate fits.
//!
//! Everything is deterministic given an explicit RNG stream (see [`rng`]).

pub mod distributions;
pub mod error;
pub mod linalg;
pub mod lp_estimator;
pub mod math;
pub mod risk;
pub mod rng;
pub mod sample;
pub mod sieve;

pub use error::{Error, Result};
pub use sample::Sample;
