use margin_rates::distributions::{
    A0Mode, BallExampleDistribution, CorridorDistribution, CrossingDistribution, HypercubeDistribution, HypercubeParams,
    SyntheticDistribution,
};
use margin_rates::lp_estimator::{build_design, eta_star, lp_solve, plugin_classify, LPConfig, LpSolution};
use margin_rates::math::{HolderSpec, KernelKind, KernelSpec};
use margin_rates::risk::{
    comparison_bound_linf, comparison_bound_lp, excess_risk, rate_fit, RiskEstimate, RiskMethod,
};
use margin_rates::rng::stream;
use margin_rates::sieve::{epsilon_schedule, sieve_fit, NetSpec, NormIndex};
use margin_rates::Sample;
use proptest::prelude::*;
use rand::Rng;

fn cube(q: usize, m: usize, w: f64, beta: f64, a0: A0Mode) -> HypercubeDistribution {
    HypercubeDistribution::new(HypercubeParams {
        d: 2,
        q,
        m,
        w,
        beta,
        c_phi: 0.5,
        sigma: None,
        a0,
        alpha: None,
        lipschitz: None,
    })
    .unwrap()
}

fn laws() -> Vec<Box<dyn SyntheticDistribution>> {
    vec![
        Box::new(BallExampleDistribution::new(1, 0.5).unwrap()),
        Box::new(BallExampleDistribution::new(2, 0.25).unwrap()),
        Box::new(BallExampleDistribution::new(3, 0.3).unwrap()),
        Box::new(CorridorDistribution::new(0.25, 0.25, 1.0).unwrap()),
        Box::new(CorridorDistribution::new(0.1, 0.4, 2.0).unwrap()),
        Box::new(CrossingDistribution::new(0.75, 0.6).unwrap()),
        Box::new(cube(4, 6, 0.1, 1.0, A0Mode::CubeComplement)),
        Box::new(cube(3, 9, 0.05, 0.5, A0Mode::OutsideBall)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_star_stays_in_unit_interval(seed in 0u64..10_000, order in 0u32..=2, h in 0.05f64..1.0, n in 1usize..120) {
        let mut rng = stream(seed, &[]);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let ys = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
        let s = Sample::from_points(&pts, ys).unwrap();
        let cfg = LPConfig::new(order, h, KernelSpec::new(KernelKind::SmoothBump, 2, 1.0).unwrap()).unwrap();
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        let v = eta_star(&s, &x, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(plugin_classify(|_| v, &x) <= 1);
    }

    #[test]
    fn shifting_sample_and_query_leaves_estimate_unchanged(seed in 0u64..10_000, shift in -3.0f64..3.0, order in 0u32..=1) {
        let mut rng = stream(seed, &[1]);
        let pts: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random()]).collect();
        let ys: Vec<u8> = (0..80).map(|_| rng.random_range(0..=1u8)).collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + shift]).collect();
        let cfg = LPConfig::new(order, 0.3, KernelSpec::uniform_ball(1)).unwrap();
        let x = rng.random::<f64>();
        let a = eta_star(&Sample::from_points(&pts, ys.clone()).unwrap(), &[x], &cfg).unwrap();
        let b = eta_star(&Sample::from_points(&moved, ys).unwrap(), &[x + shift], &cfg).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn one_point_sample_always_trips_the_guard(x0 in 0.0f64..1.0, copies in 3usize..200, order in 1u32..=2) {
        let s = Sample::new(2, [x0, 1.0 - x0].repeat(copies), vec![1; copies]).unwrap();
        let cfg = LPConfig::new(order, 0.5, KernelSpec::uniform_ball(2)).unwrap();
        prop_assert_eq!(eta_star(&s, &[x0, 1.0 - x0], &cfg).unwrap(), 0.0);
    }

    #[test]
    fn empty_window_is_singular(x in 2.0f64..5.0) {
        let s = Sample::new(1, vec![0.1, 0.2, 0.3], vec![1, 0, 1]).unwrap();
        let cfg = LPConfig::new(0, 0.5, KernelSpec::uniform_ball(1)).unwrap();
        prop_assert_eq!(lp_solve(&build_design(&s, &[x], &cfg).unwrap()), LpSolution::Singular);
    }

    #[test]
    fn sieve_labels_agree_with_values(seed in 0u64..10_000, eps in 0.05f64..1.5, n in 1usize..300) {
        let mut rng = stream(seed, &[2]);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let ys = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
        let spec = NetSpec::new(HolderSpec::new(1.0, 1.0, 2).unwrap(), eps).unwrap();
        let fit = sieve_fit(&Sample::from_points(&pts, ys).unwrap(), &spec).unwrap();
        prop_assert!(fit.is_consistent());
        for (&l, &v) in fit.labels().iter().zip(fit.values()) {
            prop_assert_eq!(l == 1, v >= 0.5);
        }
    }

    #[test]
    fn epsilon_schedule_is_decreasing(n in 1usize..100_000, alpha in 0.0f64..3.0, rho in 0.1f64..3.0, p in 1.0f64..8.0) {
        for norm in [NormIndex::Infinity, NormIndex::Finite(p)] {
            let a = epsilon_schedule(n, alpha, rho, norm).unwrap();
            let b = epsilon_schedule(2 * n, alpha, rho, norm).unwrap();
            prop_assert!(b < a);
            prop_assert!(a <= 1.0 && a > 0.0);
        }
    }

    #[test]
    fn margin_mass_is_monotone_and_under_envelope(t in 1e-4f64..1.0, k in 0usize..8) {
        let law = &laws()[k];
        let dec = law.declared();
        let a = law.margin_mass(t);
        prop_assert!(a <= law.margin_mass(t * 1.5) + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= dec.c0 * t.powf(dec.alpha) * (1.0 + 1e-12));
    }

    #[test]
    fn excess_risk_is_nonnegative_and_zero_for_bayes(k in 0usize..8, flip in 0.0f64..1.0) {
        let law = &laws()[k];
        let mut rng = stream(3, &[k as u64]);
        let bayes = excess_risk(law.as_ref(), &|x| law.bayes_label(x), RiskMethod::Quadrature { nodes: 512 }, &mut rng).unwrap();
        prop_assert_eq!(bayes.value, 0.0);
        let other = |x: &[f64]| if x[0] < flip { 1 - law.bayes_label(x) } else { law.bayes_label(x) };
        let r = excess_risk(law.as_ref(), &other, RiskMethod::Quadrature { nodes: 512 }, &mut rng).unwrap();
        prop_assert!(r.value >= 0.0);
    }

    #[test]
    fn comparison_bounds_hold_for_shifted_regression(k in 0usize..8, delta in 0.0f64..0.3) {
        // eta_bar = eta + delta has sup error delta and every L_p error at most delta.
        let law = &laws()[k];
        let dec = law.declared();
        let mut rng = stream(4, &[]);
        let f = |x: &[f64]| (law.eta(x) + delta >= 0.5) as u8;
        let r = excess_risk(law.as_ref(), &f, RiskMethod::Quadrature { nodes: 2048 }, &mut rng).unwrap();
        prop_assert!(r.value <= comparison_bound_linf(dec.alpha, dec.c0, delta) + 1e-12);
        prop_assert!(r.value <= comparison_bound_lp(dec.alpha, dec.c0, 2.0, delta).unwrap() + 1e-12);
    }

    #[test]
    fn rate_fit_recovers_exact_power_laws(slope in -2.0f64..-0.1, c in 0.01f64..10.0) {
        let series: Vec<(usize, RiskEstimate)> = [256usize, 512, 1024, 2048]
            .iter()
            .map(|&n| (n, RiskEstimate::exact(c * (n as f64).powf(slope), RiskMethod::Quadrature { nodes: 1 })))
            .collect();
        let fit = rate_fit(&series, -slope).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.within(1e-6));
    }
}

#[test]
fn samples_respect_the_declared_support() {
    for law in laws() {
        let mut rng = stream(5, &[]);
        let s = law.sample(2000, &mut rng).unwrap();
        let (lo, hi) = law.support_box();
        for (x, y) in s.iter() {
            assert!(y <= 1);
            assert!(law.density(x) > 0.0, "{}: sample outside support", law.name());
            assert!(x.iter().zip(&lo).zip(&hi).all(|((v, a), b)| v >= a && v <= b));
        }
        assert!(law.sample(0, &mut rng).is_err());
    }
}

#[test]
fn closed_form_and_quadrature_excess_agree_on_hypercube() {
    let law = cube(4, 6, 0.1, 1.0, A0Mode::CubeComplement);
    let f = |x: &[f64]| (x[1] > 0.3) as u8;
    let mut rng = stream(6, &[]);
    let a = excess_risk(&law, &f, RiskMethod::ClosedForm { nodes_per_ball: 4096 }, &mut rng).unwrap();
    let b = excess_risk(&law, &f, RiskMethod::Quadrature { nodes: 8192 }, &mut rng).unwrap();
    let c = excess_risk(&law, &f, RiskMethod::MonteCarlo { draws: 200_000 }, &mut rng).unwrap();
    assert!(a.value > 0.0);
    assert!((a.value - b.value).abs() < 2e-3 * a.value.max(1e-3), "{} vs {}", a.value, b.value);
    assert!((a.value - c.value).abs() < 4.0 * c.se + 1e-12, "{} vs {} +- {}", a.value, c.value, c.se);
}
