//! Multi-index algebra, kernels and the smooth bump functions.

pub(crate) mod bump;
mod kernel;
mod multi_index;
pub mod quadrature;

pub use bump::{bump_u, bump_u_derivative, bump_u1, bump_u_max_slope, bump_u_max_curvature, phi_eval};
pub use kernel::{unit_ball_volume, KernelKind, KernelSpec};
pub use multi_index::{enumerate_multiindices, monomial_eval, taylor_eval, MultiIndex};

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Smoothness description of a Hölder class `Sigma(beta, L, R^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSpec {
    pub beta: f64,
    pub lipschitz: f64,
    pub dim: usize,
}

impl HolderSpec {
    pub fn new(beta: f64, lipschitz: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {beta}")));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid(format!("Hölder constant must be positive, got {lipschitz}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        Ok(Self { beta, lipschitz, dim })
    }

    /// Largest integer strictly less than `beta` (so `beta = 2` gives 1).
    pub fn floor_beta(&self) -> u32 {
        floor_strict(self.beta)
    }
}

/// Largest integer strictly below `beta`.
pub fn floor_strict(beta: f64) -> u32 {
    (beta.ceil() as i64 - 1).max(0) as u32
}
