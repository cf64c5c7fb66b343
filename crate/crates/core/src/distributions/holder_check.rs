use rand::{Rng, RngCore};
use serde::Serialize;

use super::{random_direction, SyntheticDistribution};
use crate::error::{invalid, Error, Result};
use crate::math::{taylor_eval, HolderSpec};

/// Outcome of a sampled check of `|g(x') - g_x(x')| <= L ||x - x'||^beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub pass: bool,
    /// Largest `|g(x') - g_x(x')| / (L ||x - x'||^beta)` seen.
    pub worst_ratio: f64,
    pub worst_x: Vec<f64>,
    pub worst_x_prime: Vec<f64>,
    pub trials: usize,
}

/// Samples `trials` pairs near the support and checks the Taylor remainder
/// bound of the Hölder class `spec` for `eta`.
///
/// Base points are drawn alternately from `P_X` and uniformly from the
/// support box; partners sit at log-uniform distances in `[1e-4, 1]`
/// and stay inside the support box.
pub fn validate_holder(
    dist: &dyn SyntheticDistribution,
    spec: &HolderSpec,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<HolderReport> {
    let d = dist.dim();
    if spec.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: spec.dim });
    }
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let order = spec.floor_beta();
    let (lo, hi) = dist.support_box();
    let mut report = HolderReport { pass: true, worst_ratio: 0.0, worst_x: vec![], worst_x_prime: vec![], trials };
    for i in 0..trials {
        let x: Vec<f64> = if i % 2 == 0 {
            dist.sample_x(rng)
        } else {
            lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
        };
        let Some((dist_r, xp)) = partner(&x, &lo, &hi, rng) else {
            continue;
        };
        let derivs = dist
            .eta_derivatives(&x, order)
            .ok_or(Error::Unavailable("eta derivatives of the requested order"))?;
        let taylor = taylor_eval(&derivs, order, &x, &xp)?;
        let remainder = (dist.eta(&xp) - taylor).abs();
        let ratio = remainder / (spec.lipschitz * dist_r.powf(spec.beta));
        if ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_x = x;
            report.worst_x_prime = xp;
        }
    }
    report.pass = report.worst_ratio <= 1.0 + 1e-9;
    Ok(report)
}

/// Point at a log-uniform distance in `[1e-4, 1]` from `x`, inside the
/// support box.
fn partner(x: &[f64], lo: &[f64], hi: &[f64], rng: &mut dyn RngCore) -> Option<(f64, Vec<f64>)> {
    for _ in 0..32 {
        let r = 10f64.powf(-4.0 + 4.0 * rng.random::<f64>());
        let dir = random_direction(x.len(), rng);
        let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, u)| a + r * u).collect();
        if xp.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b) {
            return Some((r, xp));
        }
    }
    None
}
