use std::sync::OnceLock;

use super::quadrature::Composite;
use crate::error::{invalid, Result};

const LO: f64 = 0.25;
const HI: f64 = 0.5;
const PANELS: usize = 512;

/// `u1(x) = exp{-1/((1/2 - x)(x - 1/4))}` on `(1/4, 1/2)`, scaled by `e^64`
/// (its maximum, attained at `x = 3/8`) so values stay O(1). Ratios built
/// from it are unaffected by the scaling.
fn u1_scaled(x: f64) -> f64 {
    if x <= LO || x >= HI {
        return 0.0;
    }
    let p = (HI - x) * (x - LO);
    (64.0 - 1.0 / p).exp()
}

fn u1_scaled_derivative(x: f64) -> f64 {
    if x <= LO || x >= HI {
        return 0.0;
    }
    let p = (HI - x) * (x - LO);
    u1_scaled(x) * (0.75 - 2.0 * x) / (p * p)
}

struct BumpTable {
    rule: Composite,
    /// `tails[k] = int_{LO + k*width}^{HI} u1`, `tails[PANELS] = 0`.
    tails: Vec<f64>,
    width: f64,
    max_slope: f64,
    max_curvature: f64,
}

fn table() -> &'static BumpTable {
    static TABLE: OnceLock<BumpTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let rule = Composite::new(1);
        let width = (HI - LO) / PANELS as f64;
        let mut tails = vec![0.0; PANELS + 1];
        for k in (0..PANELS).rev() {
            let a = LO + k as f64 * width;
            tails[k] = tails[k + 1] + rule.panel(a, a + width, u1_scaled);
        }
        let z = tails[0];
        let max_curvature = (1..200_000)
            .map(|i| u1_scaled_derivative(LO + (HI - LO) * i as f64 / 200_000.0).abs())
            .fold(0.0, f64::max)
            / z;
        BumpTable { rule, tails, width, max_slope: 1.0 / z, max_curvature }
    })
}

/// The unnormalised bump `u1(x)` (unscaled, so values are tiny).
pub fn bump_u1(x: f64) -> f64 {
    u1_scaled(x) * (-64f64).exp()
}

/// Smooth nonincreasing cutoff: `u = 1` on `[0, 1/4]`, `u = 0` on
/// `[1/2, inf)`, and `u(t) = int_t^inf u1 / int_{1/4}^{1/2} u1` in between.
pub fn bump_u(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("bump_u needs t >= 0, got {t}")));
    }
    Ok(bump_u_unchecked(t))
}

pub(crate) fn bump_u_unchecked(t: f64) -> f64 {
    if t <= LO {
        return 1.0;
    }
    if t >= HI {
        return 0.0;
    }
    let tab = table();
    let k = (((t - LO) / tab.width) as usize).min(PANELS - 1);
    let edge = LO + (k + 1) as f64 * tab.width;
    let tail = tab.rule.panel(t, edge, u1_scaled) + tab.tails[k + 1];
    (tail / tab.tails[0]).clamp(0.0, 1.0)
}

/// `u'(t) = -u1(t) / int u1`.
pub fn bump_u_derivative(t: f64) -> f64 {
    -u1_scaled(t) / table().tails[0]
}

/// `max |u'|`.
pub fn bump_u_max_slope() -> f64 {
    table().max_slope
}

/// `max |u''|`.
pub fn bump_u_max_curvature() -> f64 {
    table().max_curvature
}

/// `phi(x) = C_phi * u(||x||)` for `C_phi` in `(0, 1]`.
pub fn phi_eval(x: &[f64], c_phi: f64) -> f64 {
    debug_assert!(c_phi > 0.0 && c_phi <= 1.0);
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    c_phi * bump_u_unchecked(r)
}
