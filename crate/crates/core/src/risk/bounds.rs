use serde::Serialize;

use crate::error::{invalid, Result};
use crate::sieve::NormIndex;

/// `2 C0 s^{1+alpha}`: excess risk of a plug-in rule whose regression
/// function is within `s` of `eta` in sup norm.
pub fn comparison_bound_linf(alpha: f64, c0: f64, sup_err: f64) -> f64 {
    if sup_err <= 0.0 {
        return 0.0;
    }
    2.0 * c0 * sup_err.powf(1.0 + alpha)
}

/// `C1(alpha, p) = 2 (alpha + p)/p (p/alpha)^{alpha/(alpha+p)} C0^{(p-1)/(alpha+p)}`.
pub fn comparison_constant_lp(alpha: f64, c0: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid(format!("the L_p comparison needs alpha > 0, got {alpha}; use the sup-norm bound")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(2.0 * (alpha + p) / p * (p / alpha).powf(alpha / (alpha + p)) * c0.powf((p - 1.0) / (alpha + p)))
}

/// `C1(alpha, p) e^{p(1+alpha)/(p+alpha)}` for an `L_p(P_X)` error `e`.
pub fn comparison_bound_lp(alpha: f64, c0: f64, p: f64, lp_err: f64) -> Result<f64> {
    let c1 = comparison_constant_lp(alpha, c0, p)?;
    if lp_err <= 0.0 {
        return Ok(0.0);
    }
    Ok(c1 * lp_err.powf(p * (1.0 + alpha) / (p + alpha)))
}

/// `m w b' (1 - b sqrt(n w)) / 2`, floored at 0.
pub fn assouad_bound(m: usize, w: f64, n: usize, b: f64, b_prime: f64) -> f64 {
    let paren = 1.0 - b * (n as f64 * w).sqrt();
    (m as f64 * w * b_prime * paren / 2.0).max(0.0)
}

/// Rate exponents `e` in `n^{-e}` for the settings the experiments compare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalExponents {
    /// Plug-in rule, strong density: `beta (1 + alpha) / (2 beta + d)`.
    pub plugin_strong: f64,
    /// Lower bound, mild density: `(1 + alpha) beta / ((2 + alpha) beta + d)`.
    pub lower_mild: f64,
    /// Sieve rule, sup-norm net: `(1 + alpha) / (2 + alpha + rho)`.
    pub sieve_sup: f64,
    /// Sieve rule, `L_p` net: `(1 + alpha) p / ((2 + alpha) p + rho (p + alpha))`;
    /// equals `sieve_sup` for `p = inf`.
    pub sieve_lp: f64,
    /// `alpha beta > d/2`: faster than `n^{-1/2}`.
    pub fast: bool,
    /// `alpha beta > d`: faster than `n^{-1}`.
    pub superfast: bool,
}

pub fn theoretical_exponents(alpha: f64, beta: f64, d: usize, rho: f64, p: NormIndex) -> TheoreticalExponents {
    let d = d as f64;
    let sieve_sup = (1.0 + alpha) / (2.0 + alpha + rho);
    TheoreticalExponents {
        plugin_strong: beta * (1.0 + alpha) / (2.0 * beta + d),
        lower_mild: (1.0 + alpha) * beta / ((2.0 + alpha) * beta + d),
        sieve_sup,
        sieve_lp: match p {
            NormIndex::Infinity => sieve_sup,
            NormIndex::Finite(p) => (1.0 + alpha) * p / ((2.0 + alpha) * p + rho * (p + alpha)),
        },
        fast: alpha * beta > d / 2.0,
        superfast: alpha * beta > d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sup_norm_bound_examples() {
        assert_eq!(comparison_bound_linf(1.0, 1.0, 0.0), 0.0);
        assert!((comparison_bound_linf(0.0, 1.0, 0.1) - 0.2).abs() < 1e-15);
        assert!((comparison_bound_linf(1.0, 1.0, 0.1) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn lp_bound_examples() {
        assert!((comparison_constant_lp(2.0, 1.0, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(comparison_bound_lp(1.0, 1.0, 2.0, 0.0).unwrap(), 0.0);
        let c1 = 3.0 * 2f64.powf(1.0 / 3.0);
        let expect = c1 * 0.1f64.powf(4.0 / 3.0);
        assert!((comparison_bound_lp(1.0, 1.0, 2.0, 0.1).unwrap() - expect).abs() < 1e-12);
        assert!(comparison_bound_lp(0.0, 1.0, 2.0, 0.1).is_err());
        assert!(comparison_bound_lp(1.0, 1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn assouad_examples() {
        let v = assouad_bound(4, 0.1, 25, 0.2, 0.2);
        let direct = 4.0 * 0.1 * 0.2 * (1.0 - 0.2 * 2.5f64.sqrt()) / 2.0;
        assert!((v - direct).abs() < 1e-15);
        assert!((v - 0.02735).abs() < 1e-5);
        assert_eq!(assouad_bound(4, 0.1, 1000, 0.2, 0.2), 0.0);
        assert!(assouad_bound(4, 1e-12, 25, 0.2, 0.2) < 1e-12);
    }

    #[test]
    fn exponent_examples() {
        let e = theoretical_exponents(1.0, 2.0, 2, 1.0, NormIndex::Infinity);
        assert!((e.plugin_strong - 2.0 / 3.0).abs() < 1e-15);
        assert!(e.fast && !e.superfast);
        for (beta, d) in [(1.0, 2usize), (2.0, 3), (0.5, 1)] {
            let e = theoretical_exponents(d as f64 / beta, beta, d, 1.0, NormIndex::Infinity);
            assert!((e.lower_mild - 0.5).abs() < 1e-15);
        }
        let e = theoretical_exponents(0.0, 1.0, 1, 1.0, NormIndex::Infinity);
        assert!((e.sieve_sup - 1.0 / 3.0).abs() < 1e-15);
        let e = theoretical_exponents(1.0, 1.0, 1, 1.0, NormIndex::Infinity);
        assert!((e.sieve_sup - 0.5).abs() < 1e-15);
        assert!((e.plugin_strong - 2.0 / 3.0).abs() < 1e-15);
        let e = theoretical_exponents(1.0, 1.0, 1, 1.0, NormIndex::Finite(2.0));
        assert!((e.sieve_lp - 4.0 / 9.0).abs() < 1e-15);
        assert!(theoretical_exponents(3.0, 1.0, 2, 1.0, NormIndex::Infinity).superfast);
    }

    proptest! {
        #[test]
        fn lp_exponent_tends_to_sup_exponent(alpha in 0.1f64..4.0, rho in 0.2f64..4.0) {
            let sup = theoretical_exponents(alpha, 1.0, 1, rho, NormIndex::Infinity).sieve_sup;
            let lp = theoretical_exponents(alpha, 1.0, 1, rho, NormIndex::Finite(1e9)).sieve_lp;
            prop_assert!((sup - lp).abs() < 1e-6);
        }

        #[test]
        fn bounds_are_monotone_in_the_error(alpha in 0.05f64..3.0, c0 in 0.1f64..10.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(comparison_bound_linf(alpha, c0, lo) <= comparison_bound_linf(alpha, c0, hi));
            for p in [1.0, 2.0] {
                prop_assert!(comparison_bound_lp(alpha, c0, p, lo).unwrap() <= comparison_bound_lp(alpha, c0, p, hi).unwrap());
            }
        }
    }
}
