//! Synthetic laws `P` on `R^d x {0,1}` with known regression function,
//! marginal density, Bayes rule and margin function.

mod ball;
mod corridor;
mod holder_check;
mod hypercube;

pub use ball::BallExampleDistribution;
pub use corridor::{CorridorDistribution, CrossingDistribution};
pub use holder_check::{validate_holder, HolderReport};
pub use hypercube::{A0Mode, HypercubeDistribution, HypercubeParams, RegimeConstants};

use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::math::MultiIndex;
use crate::sample::Sample;

/// Constants a law declares for the margin condition
/// `P_X(0 < |eta(X) - 1/2| <= t) <= c0 t^alpha` and the Hölder class of `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Declared {
    pub alpha: f64,
    pub c0: f64,
    pub beta: f64,
    pub lipschitz: f64,
}

/// Weighted nodes integrating against `P_X`; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(dim: usize) -> Self {
        Self { dim, nodes: Vec::new(), weights: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.nodes.extend_from_slice(x);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Behavioural contract of a synthetic law.
pub trait SyntheticDistribution: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn name(&self) -> &'static str;

    /// `eta(x) = P(Y = 1 | X = x)`.
    fn eta(&self, x: &[f64]) -> f64;

    /// Density of `P_X` w.r.t. Lebesgue measure.
    fn density(&self, x: &[f64]) -> f64;

    /// One draw from `P_X`.
    fn sample_x(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// `P_X(0 < |eta(X) - 1/2| <= t)`.
    fn margin_mass(&self, t: f64) -> f64;

    fn declared(&self) -> Declared;

    /// Partial derivatives `D^s eta(x)` for `|s| <= order`, where available
    /// in closed form.
    fn eta_derivatives(&self, x: &[f64], order: u32) -> Option<BTreeMap<MultiIndex, f64>>;

    /// Deterministic rule integrating against `P_X` with roughly `budget`
    /// nodes.
    fn quadrature(&self, budget: usize) -> Option<QuadratureRule>;

    /// Axis-aligned box containing the support.
    fn support_box(&self) -> (Vec<f64>, Vec<f64>);

    fn describe(&self) -> DistributionDescriptor;

    fn as_hypercube(&self) -> Option<&HypercubeDistribution> {
        None
    }

    /// `(min, max)` of `eta` over the part of the support inside the box
    /// `[lo, hi]`, or `None` when the box misses the support.
    fn eta_range_on_box(&self, lo: &[f64], hi: &[f64]) -> Option<(f64, f64)>;

    /// Bayes rule `1{eta(x) >= 1/2}`.
    fn bayes_label(&self, x: &[f64]) -> u8 {
        (self.eta(x) >= 0.5) as u8
    }

    /// `n` i.i.d. pairs; `X` then `Y ~ Bernoulli(eta(X))` for each point.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<Sample> {
        if n == 0 {
            return Err(invalid("sample size must be >= 1"));
        }
        let d = self.dim();
        let mut xs = Vec::with_capacity(n * d);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.sample_x(rng);
            let u: f64 = rng.random();
            ys.push((u < self.eta(&x)) as u8);
            xs.extend(x);
        }
        Sample::new(d, xs, ys)
    }
}

/// JSON description of a law, as used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionDescriptor {
    /// Uniform `P_X` on the unit ball, `eta = 1/2 - C ||x||^2`.
    Ball {
        d: usize,
        #[serde(default = "default_curvature", alias = "C")]
        curvature: f64,
    },
    /// `P_X` uniform on `[-1,-gap] U [gap,1]`, `eta = 1/2 + slope x`.
    Corridor {
        #[serde(default = "default_quarter")]
        gap: f64,
        #[serde(default = "default_quarter")]
        slope: f64,
        #[serde(default = "default_one")]
        alpha: f64,
    },
    /// `P_X` uniform on `[0,1]`, `eta = 1/2 + slope (x - x0)`.
    Crossing {
        #[serde(default = "default_one")]
        slope: f64,
        #[serde(default = "default_half")]
        x0: f64,
    },
    Hypercube(HypercubeParams),
    /// Parameters `q = floor(c_bar n^{1/(2 beta + d)})`, `w = c' q^{-d}`,
    /// `m = floor(c'' q^{d - alpha beta})`, `A0` = cube minus active cells.
    HypercubeStrong {
        n: usize,
        d: usize,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        constants: RegimeConstants,
    },
    /// Parameters `q = floor(c_bar n^{1/((2+alpha) beta + d)})`,
    /// `w = c' q^{2 beta}/n`, `m = q^d`, `A0` = ball outside the cube.
    HypercubeMild {
        n: usize,
        d: usize,
        alpha: f64,
        beta: f64,
        #[serde(default)]
        constants: RegimeConstants,
    },
}

fn default_curvature() -> f64 {
    0.25
}
fn default_quarter() -> f64 {
    0.25
}
fn default_half() -> f64 {
    0.5
}
fn default_one() -> f64 {
    1.0
}

impl DistributionDescriptor {
    pub fn build(&self) -> Result<Box<dyn SyntheticDistribution>> {
        Ok(match self {
            DistributionDescriptor::Ball { d, curvature } => Box::new(BallExampleDistribution::new(*d, *curvature)?),
            DistributionDescriptor::Corridor { gap, slope, alpha } => {
                Box::new(CorridorDistribution::new(*gap, *slope, *alpha)?)
            }
            DistributionDescriptor::Crossing { slope, x0 } => Box::new(CrossingDistribution::new(*slope, *x0)?),
            _ => Box::new(self.build_hypercube()?.expect("hypercube descriptor")),
        })
    }

    /// Builds the concrete hypercube law for hypercube descriptors.
    pub fn build_hypercube(&self) -> Result<Option<HypercubeDistribution>> {
        Ok(Some(match self {
            DistributionDescriptor::Hypercube(p) => HypercubeDistribution::new(p.clone())?,
            DistributionDescriptor::HypercubeStrong { n, d, alpha, beta, constants } => {
                HypercubeDistribution::strong_density_regime(*n, *d, *alpha, *beta, constants)?
            }
            DistributionDescriptor::HypercubeMild { n, d, alpha, beta, constants } => {
                HypercubeDistribution::mild_density_regime(*n, *d, *alpha, *beta, constants)?
            }
            _ => return Ok(None),
        }))
    }
}

/// Uniform direction on the unit sphere of `R^d`.
pub(crate) fn random_direction(d: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Uniform point in the ball `B(center, radius)`.
pub(crate) fn uniform_in_ball(center: &[f64], radius: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let d = center.len();
    let dir = random_direction(d, rng);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    center.iter().zip(dir).map(|(c, u)| c + r * u).collect()
}

/// Deterministic directions with equal weights: `±1` for `d = 1`, equally
/// spaced angles for `d = 2`, a Fibonacci lattice for `d = 3`.
pub(crate) fn sphere_directions(d: usize, count: usize) -> Option<Vec<Vec<f64>>> {
    let count = count.max(2);
    match d {
        1 => Some(vec![vec![-1.0], vec![1.0]]),
        2 => Some(
            (0..count)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect(),
        ),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Some(
                (0..count)
                    .map(|k| {
                        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                        let r = (1.0 - z * z).sqrt();
                        let th = golden * k as f64;
                        vec![r * th.cos(), r * th.sin(), z]
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

/// Product rule for the uniform law on `B(center, radius)`: the radial
/// variable `v = (r/radius)^d` is uniform on `[0,1]`; it is integrated with
/// midpoint nodes in `s = sqrt(v)`, which clusters nodes near the centre.
pub(crate) fn ball_rule(center: &[f64], radius: f64, mass: f64, budget: usize, rule: &mut QuadratureRule) -> Option<()> {
    let d = center.len();
    let (radial, angular) = match d {
        1 => ((budget / 2).max(1), 2),
        2 => {
            let k = (budget as f64).sqrt().ceil().max(2.0) as usize;
            (k, k)
        }
        3 => {
            let k = (budget as f64).cbrt().ceil().max(2.0) as usize;
            (k, k * k)
        }
        _ => return None,
    };
    let dirs = sphere_directions(d, angular)?;
    let wdir = 1.0 / dirs.len() as f64;
    for i in 0..radial {
        let s = (i as f64 + 0.5) / radial as f64;
        let v = s * s;
        let wv = 2.0 * s / radial as f64;
        let r = radius * v.powf(1.0 / d as f64);
        for u in &dirs {
            let x: Vec<f64> = center.iter().zip(u).map(|(c, ui)| c + r * ui).collect();
            rule.push(&x, mass * wv * wdir);
        }
    }
    Some(())
}
