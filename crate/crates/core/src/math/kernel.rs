use serde::{Deserialize, Serialize};

use super::quadrature::Composite;
use crate::error::{invalid, Result};

/// Volume of the unit Euclidean ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Normalised indicator of the ball of the given radius.
    UniformBall,
    /// `exp{-1/(1 - ||u||^2/R^2)}` on the open ball of radius `R`, normalised.
    SmoothBump,
}

/// A compactly supported, bounded kernel with `int K = 1` and
/// `K(x) >= c 1{||x|| <= c}` for the stored `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    dim: usize,
    radius: f64,
    norm: f64,
    lower_c: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("kernel dimension must be >= 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("kernel radius must be positive, got {radius}")));
        }
        let vol = unit_ball_volume(dim) * radius.powi(dim as i32);
        let (norm, lower_c) = match kind {
            KernelKind::UniformBall => {
                let norm = 1.0 / vol;
                (norm, (0.5 * radius).min(norm))
            }
            KernelKind::SmoothBump => {
                let radial = Composite::new(256).integrate(0.0, 1.0, |s| {
                    if s >= 1.0 {
                        0.0
                    } else {
                        s.powi(dim as i32 - 1) * (-1.0 / (1.0 - s * s)).exp()
                    }
                });
                let norm = 1.0 / (dim as f64 * vol * radial);
                (norm, (0.5 * radius).min(norm * (-4.0f64 / 3.0).exp()))
            }
        };
        Ok(Self { kind, dim, radius, norm, lower_c })
    }

    pub fn uniform_ball(dim: usize) -> Self {
        Self::new(KernelKind::UniformBall, dim, 1.0).expect("unit ball kernel")
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn lower_bound_constant(&self) -> f64 {
        self.lower_c
    }

    pub fn sup(&self) -> f64 {
        match self.kind {
            KernelKind::UniformBall => self.norm,
            KernelKind::SmoothBump => self.norm * (-1f64).exp(),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.eval_sq_norm(u.iter().map(|v| v * v).sum())
    }

    /// Kernel value at a point with squared norm `r2`.
    #[inline]
    pub fn eval_sq_norm(&self, r2: f64) -> f64 {
        let rr = self.radius * self.radius;
        match self.kind {
            KernelKind::UniformBall => {
                if r2 <= rr {
                    self.norm
                } else {
                    0.0
                }
            }
            KernelKind::SmoothBump => {
                if r2 < rr {
                    self.norm * (-1.0 / (1.0 - r2 / rr)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}
