use std::collections::BTreeMap;

use rand::RngCore;

use super::{ball_rule, uniform_in_ball, Declared, DistributionDescriptor, QuadratureRule, SyntheticDistribution};
use crate::error::{invalid, Result};
use crate::math::{unit_ball_volume, MultiIndex};

/// Uniform `P_X` on the unit ball of `R^d` with `eta(x) = 1/2 - C ||x||^2`.
///
/// The Bayes classifier is 0 off the origin, and
/// `P_X(0 < |eta - 1/2| <= t) = min(t/C, 1)^{d/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallExampleDistribution {
    d: usize,
    c: f64,
    volume: f64,
}

impl BallExampleDistribution {
    pub fn new(d: usize, c: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if !(c > 0.0 && c <= 0.5) {
            return Err(invalid(format!("curvature must lie in (0, 1/2], got {c}")));
        }
        Ok(Self { d, c, volume: unit_ball_volume(d) })
    }

    pub fn curvature(&self) -> f64 {
        self.c
    }

    /// `1/2 - C d/(d+2)`.
    pub fn bayes_risk(&self) -> f64 {
        let d = self.d as f64;
        0.5 - self.c * d / (d + 2.0)
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl SyntheticDistribution for BallExampleDistribution {
    fn dim(&self) -> usize {
        self.d
    }

    fn name(&self) -> &'static str {
        "ball"
    }

    fn eta(&self, x: &[f64]) -> f64 {
        (0.5 - self.c * sq_norm(x)).clamp(0.0, 1.0)
    }

    fn density(&self, x: &[f64]) -> f64 {
        if sq_norm(x) <= 1.0 {
            1.0 / self.volume
        } else {
            0.0
        }
    }

    fn sample_x(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        uniform_in_ball(&vec![0.0; self.d], 1.0, rng)
    }

    fn margin_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        (t / self.c).min(1.0).powf(self.d as f64 / 2.0)
    }

    fn declared(&self) -> Declared {
        Declared {
            alpha: self.d as f64 / 2.0,
            c0: self.c.powf(-(self.d as f64) / 2.0),
            beta: 2.0,
            lipschitz: 2.0 * self.c,
        }
    }

    fn eta_derivatives(&self, x: &[f64], order: u32) -> Option<BTreeMap<MultiIndex, f64>> {
        let d = self.d;
        let mut out = BTreeMap::new();
        out.insert(MultiIndex::zero(d), 0.5 - self.c * sq_norm(x));
        for k in 0..d {
            let mut e = vec![0u32; d];
            if order >= 1 {
                e[k] = 1;
                out.insert(MultiIndex::new(e.clone()), -2.0 * self.c * x[k]);
            }
            if order >= 2 {
                e[k] = 2;
                out.insert(MultiIndex::new(e.clone()), -2.0 * self.c);
            }
        }
        for s in crate::math::enumerate_multiindices(d, order) {
            out.entry(s).or_insert(0.0);
        }
        Some(out)
    }

    fn quadrature(&self, budget: usize) -> Option<QuadratureRule> {
        let mut rule = QuadratureRule::new(self.d);
        ball_rule(&vec![0.0; self.d], 1.0, 1.0, budget, &mut rule)?;
        Some(rule)
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0; self.d], vec![1.0; self.d])
    }

    fn eta_range_on_box(&self, lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
        let near: f64 = lo.iter().zip(hi).map(|(a, b)| if *a > 0.0 { a * a } else if *b < 0.0 { b * b } else { 0.0 }).sum();
        if near > 1.0 {
            return None;
        }
        let far: f64 = lo.iter().zip(hi).map(|(a, b)| (a * a).max(b * b)).sum::<f64>().min(1.0);
        Some((0.5 - self.c * far, 0.5 - self.c * near))
    }

    fn describe(&self) -> DistributionDescriptor {
        DistributionDescriptor::Ball { d: self.d, curvature: self.c }
    }
}
