use margin_rates::distributions::{CorridorDistribution, DistributionDescriptor, SyntheticDistribution};
use margin_rates::lp_estimator::LocalPolyEstimator;
use margin_rates::risk::{excess_via_gap_bound, rate_fit};
use margin_rates::rng;
use serde_json::json;

use super::common::*;
use crate::config::{BandwidthRule, ClassifierKind, ExperimentConfig};
use crate::output::{OutputDir, ResultRow, Series};
use crate::{CliError, Outcome, RunOptions};

pub fn run_corridor(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let DistributionDescriptor::Corridor { gap, slope, alpha } = cfg.distribution else {
        return Err(config_error("corridor experiment needs a corridor distribution"));
    };
    let BandwidthRule::Fixed { h } = cfg.estimator.bandwidth else {
        return Err(config_error("corridor experiment needs a fixed bandwidth (rule \"fixed\")"));
    };
    if cfg.estimator.classifier != ClassifierKind::Plugin {
        return Err(config_error("corridor experiment uses the plug-in classifier"));
    }
    let dist = CorridorDistribution::new(gap, slope, alpha)?;
    let checks = check_distribution(cfg, &dist)?;
    let spec = estimator_holder(cfg, &dist)?;
    let label = "corridor";
    let results = par_map(&jobs(cfg), |&(n, r)| {
        let ((excess, bound), ms) = timed(opts, || {
            let s = replicate_sample(cfg, &dist, n, r)?;
            let est = LocalPolyEstimator::fit(s, lp_config(cfg, &spec, n)?)?;
            let excess = evaluate(cfg, &dist, &|x| est.classify(x), &[n as u64, r as u64])?;
            let eta_hat = |x: &[f64]| est.eval(x);
            let gap = excess_via_gap_bound(&dist, &eta_hat, cfg.mc_budget, &mut rng::stream(cfg.seed, &[n as u64, r as u64, 2]))?;
            Ok((excess, gap.bound.value))
        })?;
        let row = ResultRow {
            experiment: label.into(),
            n,
            replicate: r,
            seed: replicate_seed(cfg, n, r),
            excess: excess.value,
            se: excess.se,
            wall_ms: ms,
        };
        Ok((row, bound))
    })?;
    let rows: Vec<ResultRow> = results.iter().map(|(r, _)| r.clone()).collect();
    let out = OutputDir::create(&opts.out)?;
    let files = vec![write_rows(&out, "corridor.csv", &rows)?];
    let series = aggregate(&rows, label, &cfg.n_grid);
    let bounds: Vec<f64> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let v: Vec<f64> = results.iter().filter(|(r, _)| r.n == n).map(|(_, b)| *b).collect();
            mean_se(&v).0
        })
        .collect();
    let sig = cfg.tolerance.sigmas;
    let monotone = series
        .windows(2)
        .all(|w| w[1].1.value <= w[0].1.value + sig * (w[0].1.se.powi(2) + w[1].1.se.powi(2)).sqrt());
    let last = series.last().expect("non-empty grid").1.value;
    let pass = monotone && last <= cfg.tolerance.excess;
    let fit = rate_fit(&series, 0.0);
    let oracle = evaluate(cfg, &dist, &|x| dist.bayes_label(x), &[u64::MAX - 1])?;
    let summary = json!({
        "theoretical": "exponential decay",
        "measured": last,
        "tolerance": cfg.tolerance.excess,
        "non_increasing": monotone,
        "t0": dist.t0(),
        "bandwidth": h,
        "series": series_json(&series),
        "gap_bound": cfg.n_grid.iter().zip(&bounds).map(|(n, b)| json!({"n": n, "bound": b})).collect::<Vec<_>>(),
        "rate_fit": match &fit {
            Ok(f) => json!({"slope": f.slope, "slope_se": f.slope_se}),
            Err(e) => json!({"error": e.to_string()}),
        },
        "oracle_excess": oracle.value,
        "checks": checks,
    });
    let plot = vec![
        Series { label: "excess".into(), points: series.iter().map(|(n, r)| (*n as f64, r.value)).collect() },
        Series { label: "gap bound".into(), points: cfg.n_grid.iter().zip(&bounds).map(|(n, b)| (*n as f64, *b)).collect() },
    ];
    finish(cfg, opts, &out, files, pass, summary, Some(("n", "excess risk", plot)))
}
