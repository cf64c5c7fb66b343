//! Excess-risk oracles, comparison bounds, the Assouad bound, theoretical
//! exponents, rate fitting and concentration probes.

mod bounds;
mod concentration;
mod rate;

pub use bounds::{
    assouad_bound, comparison_bound_linf, comparison_bound_lp, comparison_constant_lp, theoretical_exponents,
    TheoreticalExponents,
};
pub use concentration::{concentration_probe, probe_point, spearman, ConcentrationProbe, ProbeCell, ProbePoint};
pub use rate::{rate_fit, RateFitResult, RatePoint};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::distributions::{CorridorDistribution, SyntheticDistribution};
use crate::error::{invalid, Error, Result};

/// How an expectation over `P_X` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum RiskMethod {
    /// Hypercube laws only: per-ball constant `|2 eta - 1|` times the
    /// disagreement mass on each ball, from a deterministic rule per ball.
    ClosedForm { nodes_per_ball: usize },
    /// Deterministic rule supplied by the distribution.
    Quadrature { nodes: usize },
    MonteCarlo { draws: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub se: f64,
    pub method: RiskMethod,
}

impl RiskEstimate {
    pub fn exact(value: f64, method: RiskMethod) -> Self {
        Self { value: value.max(0.0), se: 0.0, method }
    }
}

fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    if n < 2 {
        return (mean, 0.0);
    }
    (mean, (m2 / (n as f64 - 1.0) / n as f64).sqrt())
}

/// `E_X[|2 eta(X) - 1| 1{f(X) != f*(X)}]` from the known `eta`.
pub fn excess_risk(
    dist: &dyn SyntheticDistribution,
    f: &dyn Fn(&[f64]) -> u8,
    method: RiskMethod,
    rng: &mut dyn RngCore,
) -> Result<RiskEstimate> {
    let loss = |x: &[f64]| {
        if f(x) != dist.bayes_label(x) {
            (2.0 * dist.eta(x) - 1.0).abs()
        } else {
            0.0
        }
    };
    match method {
        RiskMethod::MonteCarlo { draws } => {
            if draws < 2 {
                return Err(invalid("Monte Carlo needs at least 2 draws"));
            }
            let (mean, se) = mean_se((0..draws).map(|_| loss(&dist.sample_x(rng))));
            Ok(RiskEstimate { value: mean.max(0.0), se, method })
        }
        RiskMethod::Quadrature { nodes } => {
            let rule = dist.quadrature(nodes).ok_or(Error::Unavailable("quadrature rule for this distribution"))?;
            Ok(RiskEstimate::exact(rule.integrate(loss), method))
        }
        RiskMethod::ClosedForm { nodes_per_ball } => {
            let cube = dist.as_hypercube().ok_or(Error::Unavailable("closed form outside the hypercube family"))?;
            let gap = cube.ball_gap();
            let mut total = 0.0;
            for (j, &s) in cube.sigma().iter().enumerate() {
                let bayes = (s > 0) as u8;
                let rule = cube.ball_quadrature(j, nodes_per_ball);
                total += gap * rule.integrate(|x| (f(x) != bayes) as u8 as f64);
            }
            Ok(RiskEstimate::exact(total, method))
        }
    }
}

/// Joint Monte Carlo estimate of the bound `P(|eta_hat(X) - eta(X)| > t0)`
/// and of the direct excess risk of the plug-in rule of `eta_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBoundEstimate {
    pub bound: RiskEstimate,
    pub direct: RiskEstimate,
}

pub fn excess_via_gap_bound(
    dist: &CorridorDistribution,
    eta_hat: &dyn Fn(&[f64]) -> f64,
    draws: usize,
    rng: &mut dyn RngCore,
) -> Result<GapBoundEstimate> {
    if draws < 2 {
        return Err(invalid("Monte Carlo needs at least 2 draws"));
    }
    let t0 = dist.t0();
    let mut bound = Vec::with_capacity(draws);
    let mut direct = Vec::with_capacity(draws);
    for _ in 0..draws {
        let x = dist.sample_x(rng);
        let (e, eh) = (dist.eta(&x), eta_hat(&x));
        bound.push(((eh - e).abs() > t0) as u8 as f64);
        let f = (eh >= 0.5) as u8;
        direct.push(if f != dist.bayes_label(&x) { (2.0 * e - 1.0).abs() } else { 0.0 });
    }
    let method = RiskMethod::MonteCarlo { draws };
    let (b, bse) = mean_se(bound.into_iter());
    let (d, dse) = mean_se(direct.into_iter());
    Ok(GapBoundEstimate {
        bound: RiskEstimate { value: b, se: bse, method },
        direct: RiskEstimate { value: d, se: dse, method },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::*;
    use crate::rng::stream;

    fn cube() -> HypercubeDistribution {
        HypercubeDistribution::new(HypercubeParams {
            d: 2,
            q: 4,
            m: 6,
            w: 0.1,
            beta: 1.0,
            c_phi: 0.5,
            sigma: Some(vec![1, -1, 1, 1, -1, 1]),
            a0: A0Mode::CubeComplement,
            alpha: None,
            lipschitz: None,
        })
        .unwrap()
    }

    #[test]
    fn bayes_rule_has_zero_excess() {
        let h = cube();
        let b = BallExampleDistribution::new(2, 0.25).unwrap();
        let c = CorridorDistribution::new(0.25, 0.25, 1.0).unwrap();
        let dists: [&dyn SyntheticDistribution; 3] = [&h, &b, &c];
        for dist in dists {
            let f = |x: &[f64]| dist.bayes_label(x);
            for method in [RiskMethod::MonteCarlo { draws: 2000 }, RiskMethod::Quadrature { nodes: 2000 }] {
                let r = excess_risk(dist, &f, method, &mut stream(1, &[])).unwrap();
                assert_eq!(r.value, 0.0);
                assert_eq!(r.se, 0.0);
            }
        }
        let f = |x: &[f64]| h.bayes_label(x);
        assert_eq!(excess_risk(&h, &f, RiskMethod::ClosedForm { nodes_per_ball: 64 }, &mut stream(1, &[])).unwrap().value, 0.0);
    }

    #[test]
    fn anti_bayes_on_hypercube_equals_total_gap() {
        let h = cube();
        let f = |x: &[f64]| 1 - h.bayes_label(x);
        let expect = 6.0 * 0.1 * 0.5 / 4.0;
        let cf = excess_risk(&h, &f, RiskMethod::ClosedForm { nodes_per_ball: 256 }, &mut stream(1, &[])).unwrap();
        assert!((cf.value - expect).abs() < 1e-12, "{}", cf.value);
        assert_eq!(cf.se, 0.0);
        let q = excess_risk(&h, &f, RiskMethod::Quadrature { nodes: 4000 }, &mut stream(1, &[])).unwrap();
        assert!((q.value - expect).abs() < 1e-12);
        let mc = excess_risk(&h, &f, RiskMethod::MonteCarlo { draws: 100_000 }, &mut stream(2, &[])).unwrap();
        assert!((mc.value - expect).abs() < 3.0 * mc.se);
    }

    #[test]
    fn closed_form_and_monte_carlo_agree_on_a_fitted_rule() {
        let h = cube();
        let s = h.sample(2000, &mut stream(4, &[])).unwrap();
        let cfg = crate::lp_estimator::LPConfig::new(0, 0.08, crate::math::KernelSpec::uniform_ball(2)).unwrap();
        let est = crate::lp_estimator::LocalPolyEstimator::fit(s, cfg).unwrap();
        let f = |x: &[f64]| est.classify(x);
        let cf = excess_risk(&h, &f, RiskMethod::ClosedForm { nodes_per_ball: 400 }, &mut stream(5, &[])).unwrap();
        let mc = excess_risk(&h, &f, RiskMethod::MonteCarlo { draws: 40_000 }, &mut stream(5, &[])).unwrap();
        assert!(cf.value > 0.0);
        assert!((cf.value - mc.value).abs() <= 3.0 * mc.se + 2e-3, "{} vs {} ± {}", cf.value, mc.value, mc.se);
    }

    #[test]
    fn ball_quadrature_matches_closed_form_anti_bayes() {
        // Anti-Bayes excess on the ball example is E|2 eta - 1| = 2 C d/(d+2).
        for d in 1..=3 {
            let b = BallExampleDistribution::new(d, 0.25).unwrap();
            let f = |x: &[f64]| 1 - b.bayes_label(x);
            let r = excess_risk(&b, &f, RiskMethod::Quadrature { nodes: 8000 }, &mut stream(1, &[])).unwrap();
            let expect = 0.5 * d as f64 / (d as f64 + 2.0);
            assert!((r.value - expect).abs() < 1e-3, "d={d}: {}", r.value);
        }
    }

    #[test]
    fn excess_stays_between_zero_and_total_gap() {
        let b = BallExampleDistribution::new(2, 0.25).unwrap();
        let total = 0.25;
        let mut rng = stream(6, &[]);
        for k in 0..20 {
            let cut = k as f64 / 20.0;
            let f = move |x: &[f64]| (x[0] > cut - 0.5) as u8;
            let r = excess_risk(&b, &f, RiskMethod::Quadrature { nodes: 2000 }, &mut rng).unwrap();
            assert!(r.value >= 0.0 && r.value <= total + 1e-12);
        }
    }

    #[test]
    fn unavailable_methods_are_errors() {
        let b = BallExampleDistribution::new(2, 0.25).unwrap();
        let f = |x: &[f64]| b.bayes_label(x);
        assert!(excess_risk(&b, &f, RiskMethod::ClosedForm { nodes_per_ball: 8 }, &mut stream(1, &[])).is_err());
        let b5 = BallExampleDistribution::new(5, 0.25).unwrap();
        let f5 = |x: &[f64]| b5.bayes_label(x);
        assert!(excess_risk(&b5, &f5, RiskMethod::Quadrature { nodes: 8 }, &mut stream(1, &[])).is_err());
    }

    #[test]
    fn gap_bound_examples() {
        let c = CorridorDistribution::new(0.25, 0.25, 1.0).unwrap();
        let exact = |x: &[f64]| c.eta(x);
        let r = excess_via_gap_bound(&c, &exact, 10_000, &mut stream(1, &[])).unwrap();
        assert_eq!(r.bound.value, 0.0);
        assert_eq!(r.direct.value, 0.0);
        // eta_hat = 0: |0 - eta| = eta > t0 everywhere on the support.
        let zero = |_: &[f64]| 0.0;
        let r = excess_via_gap_bound(&c, &zero, 10_000, &mut stream(2, &[])).unwrap();
        assert_eq!(r.bound.value, 1.0);
        assert!(r.direct.value <= r.bound.value + 3.0 * (r.bound.se + r.direct.se));
        let noisy = |x: &[f64]| (c.eta(x) + 0.1 * (40.0 * x[0]).sin()).clamp(0.0, 1.0);
        let r = excess_via_gap_bound(&c, &noisy, 20_000, &mut stream(3, &[])).unwrap();
        assert!(r.direct.value <= r.bound.value + 3.0 * (r.bound.se + r.direct.se));
    }
}
