use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{Declared, DistributionDescriptor, QuadratureRule, SyntheticDistribution};
use crate::error::{invalid, Result};
use crate::math::MultiIndex;

/// One-dimensional law with a gap of zero `P_X` mass around the decision
/// boundary: `P_X` uniform on `[-1,-a] U [a,1]`, `eta(x) = 1/2 + s clamp(x,-1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorridorDistribution {
    gap: f64,
    slope: f64,
    alpha: f64,
}

impl CorridorDistribution {
    pub fn new(gap: f64, slope: f64, alpha: f64) -> Result<Self> {
        if !(gap > 0.0 && gap < 1.0) {
            return Err(invalid(format!("gap must lie in (0, 1), got {gap}")));
        }
        if !(slope > 0.0 && slope <= 0.5) {
            return Err(invalid(format!("slope must lie in (0, 1/2], got {slope}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { gap, slope, alpha })
    }

    /// Largest `t` with `P_X(0 < |eta - 1/2| <= t) = 0`.
    pub fn t0(&self) -> f64 {
        self.slope * self.gap
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    fn envelope_constant(&self) -> f64 {
        // sup_t m(t)/t^alpha; m is zero below t0, affine up to t = slope, then 1.
        let (a, s, al) = (self.gap, self.slope, self.alpha);
        let ratio = |t: f64| ((t / s - a) / (1.0 - a)).clamp(0.0, 1.0) / t.powf(al);
        let mut best = ratio(s);
        if al > 1.0 {
            let t_star = al * a * s / (al - 1.0);
            if t_star > self.t0() && t_star < s {
                best = best.max(ratio(t_star));
            }
        }
        best
    }
}

impl SyntheticDistribution for CorridorDistribution {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> &'static str {
        "corridor"
    }

    fn eta(&self, x: &[f64]) -> f64 {
        0.5 + self.slope * x[0].clamp(-1.0, 1.0)
    }

    fn density(&self, x: &[f64]) -> f64 {
        let a = x[0].abs();
        if a >= self.gap && a <= 1.0 {
            0.5 / (1.0 - self.gap)
        } else {
            0.0
        }
    }

    fn sample_x(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u: f64 = rng.random();
        let mag = self.gap + (1.0 - self.gap) * rng.random::<f64>();
        vec![if u < 0.5 { -mag } else { mag }]
    }

    fn margin_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        (((t / self.slope).min(1.0) - self.gap) / (1.0 - self.gap)).max(0.0)
    }

    fn declared(&self) -> Declared {
        Declared { alpha: self.alpha, c0: self.envelope_constant(), beta: 1.0, lipschitz: self.slope }
    }

    fn eta_derivatives(&self, x: &[f64], order: u32) -> Option<BTreeMap<MultiIndex, f64>> {
        linear_derivatives(self.eta(x), if x[0].abs() < 1.0 { self.slope } else { 0.0 }, order)
    }

    fn quadrature(&self, budget: usize) -> Option<QuadratureRule> {
        let half = (budget / 2).max(1);
        let mut rule = QuadratureRule::new(1);
        let len = 1.0 - self.gap;
        for sign in [-1.0, 1.0] {
            for k in 0..half {
                let x = self.gap + len * (k as f64 + 0.5) / half as f64;
                rule.push(&[sign * x], 0.5 / half as f64);
            }
        }
        Some(rule)
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0], vec![1.0])
    }

    fn eta_range_on_box(&self, lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (a, b) in [(-1.0, -self.gap), (self.gap, 1.0)] {
            let (l, h) = (lo[0].max(a), hi[0].min(b));
            if l <= h {
                let (el, eh) = (self.eta(&[l]), self.eta(&[h]));
                out = Some(match out {
                    Some((m, x)) => (m.min(el), x.max(eh)),
                    None => (el, eh),
                });
            }
        }
        out
    }

    fn describe(&self) -> DistributionDescriptor {
        DistributionDescriptor::Corridor { gap: self.gap, slope: self.slope, alpha: self.alpha }
    }
}

fn linear_derivatives(value: f64, slope: f64, order: u32) -> Option<BTreeMap<MultiIndex, f64>> {
    let mut out = BTreeMap::new();
    out.insert(MultiIndex::zero(1), value);
    for k in 1..=order {
        out.insert(MultiIndex::new(vec![k]), if k == 1 { slope } else { 0.0 });
    }
    Some(out)
}

/// `P_X` uniform on `[0,1]`, `eta(x) = 1/2 + s (x - x0)`: a single linear
/// crossing of the level 1/2, so the margin exponent is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingDistribution {
    slope: f64,
    x0: f64,
}

impl CrossingDistribution {
    pub fn new(slope: f64, x0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x0) {
            return Err(invalid(format!("x0 must lie in [0, 1], got {x0}")));
        }
        if !(slope > 0.0) || slope * x0.max(1.0 - x0) > 0.5 {
            return Err(invalid(format!(
                "slope must be positive with slope * max(x0, 1 - x0) <= 1/2, got slope = {slope}, x0 = {x0}"
            )));
        }
        Ok(Self { slope, x0 })
    }

    pub fn boundary(&self) -> f64 {
        self.x0
    }
}

impl SyntheticDistribution for CrossingDistribution {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> &'static str {
        "crossing"
    }

    fn eta(&self, x: &[f64]) -> f64 {
        (0.5 + self.slope * (x[0] - self.x0)).clamp(0.0, 1.0)
    }

    fn density(&self, x: &[f64]) -> f64 {
        if (0.0..=1.0).contains(&x[0]) {
            1.0
        } else {
            0.0
        }
    }

    fn sample_x(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        vec![rng.random::<f64>()]
    }

    fn margin_mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r = t / self.slope;
        ((self.x0 + r).min(1.0) - (self.x0 - r).max(0.0)).max(0.0)
    }

    fn declared(&self) -> Declared {
        Declared { alpha: 1.0, c0: 2.0 / self.slope, beta: 1.0, lipschitz: self.slope }
    }

    fn eta_derivatives(&self, x: &[f64], order: u32) -> Option<BTreeMap<MultiIndex, f64>> {
        linear_derivatives(self.eta(x), self.slope, order)
    }

    fn quadrature(&self, budget: usize) -> Option<QuadratureRule> {
        let k = budget.max(1);
        let mut rule = QuadratureRule::new(1);
        for i in 0..k {
            rule.push(&[(i as f64 + 0.5) / k as f64], 1.0 / k as f64);
        }
        Some(rule)
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0], vec![1.0])
    }

    fn eta_range_on_box(&self, lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
        let (l, h) = (lo[0].max(0.0), hi[0].min(1.0));
        (l <= h).then(|| (self.eta(&[l]), self.eta(&[h])))
    }

    fn describe(&self) -> DistributionDescriptor {
        DistributionDescriptor::Crossing { slope: self.slope, x0: self.x0 }
    }
}
