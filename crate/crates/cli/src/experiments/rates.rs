use margin_rates::risk::{rate_fit, theoretical_exponents, RateFitResult};
use margin_rates::sieve::NormIndex;
use serde_json::{json, Value};

use super::common::*;
use crate::config::{ClassifierKind, ExperimentConfig};
use crate::output::{OutputDir, ResultRow, Series};
use crate::{CliError, Outcome, RunOptions};

fn fit_json(fit: &Result<RateFitResult, margin_rates::Error>) -> Value {
    match fit {
        Ok(f) => json!({"slope": f.slope, "slope_se": f.slope_se, "intercept": f.intercept, "points_used": f.points_used}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn exponent_for(kind: ClassifierKind, alpha: f64, beta: f64, d: usize, p: NormIndex) -> Result<f64, CliError> {
    let e = theoretical_exponents(alpha, beta, d, d as f64 / beta, p);
    match kind {
        ClassifierKind::Plugin => Ok(e.plugin_strong),
        ClassifierKind::Sieve => Ok(e.sieve_lp),
        other => Err(config_error(format!("classifier {other:?} has no rate; use plugin or sieve"))),
    }
}

fn rate_plot(arms: &[(&str, &[(usize, margin_rates::risk::RiskEstimate)])]) -> Vec<Series> {
    arms.iter()
        .map(|(label, s)| Series { label: label.to_string(), points: s.iter().map(|(n, r)| (*n as f64, r.value)).collect() })
        .collect()
}

pub fn run_rates(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let dist = cfg.distribution.build()?;
    let checks = check_distribution(cfg, dist.as_ref())?;
    let spec = estimator_holder(cfg, dist.as_ref())?;
    let kind = cfg.estimator.classifier;
    let theoretical = exponent_for(kind, dist.declared().alpha, spec.beta, spec.dim, cfg.estimator.p)?;
    let label = "rates";
    let rows = par_map(&jobs(cfg), |&(n, r)| {
        let (excess, ms) = timed(opts, || {
            let s = replicate_sample(cfg, dist.as_ref(), n, r)?;
            let f = fit_classifier(kind, cfg, dist.as_ref(), &spec, s)?;
            evaluate(cfg, dist.as_ref(), &f, &[n as u64, r as u64])
        })?;
        Ok(ResultRow {
            experiment: label.into(),
            n,
            replicate: r,
            seed: replicate_seed(cfg, n, r),
            excess: excess.value,
            se: excess.se,
            wall_ms: ms,
        })
    })?;
    let out = OutputDir::create(&opts.out)?;
    let files = vec![write_rows(&out, "rates.csv", &rows)?];
    let series = aggregate(&rows, label, &cfg.n_grid);
    let fit = rate_fit(&series, theoretical);
    let pass = fit.as_ref().map(|f| f.within(cfg.tolerance.slope)).unwrap_or(false);
    let summary = json!({
        "theoretical": theoretical,
        "measured": fit.as_ref().map(|f| f.slope).ok(),
        "tolerance": cfg.tolerance.slope,
        "classifier": kind,
        "fit": fit_json(&fit),
        "series": series_json(&series),
        "checks": checks,
        "bandwidth_beta": spec.beta,
    });
    finish(cfg, opts, &out, files, pass, summary, Some(("n", "excess risk", rate_plot(&[(label, &series)]))))
}

pub fn run_sieve_vs_plugin(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let dist = cfg.distribution.build()?;
    let checks = check_distribution(cfg, dist.as_ref())?;
    let spec = estimator_holder(cfg, dist.as_ref())?;
    if spec.beta > 1.0 {
        return Err(CliError::Config(
            margin_rates::Error::UnsupportedClass(format!("sieve arm needs beta <= 1, got {}", spec.beta)).to_string(),
        ));
    }
    if dist.support_box().0.iter().chain(&dist.support_box().1).any(|v| !(0.0..=1.0).contains(v)) {
        return Err(config_error("sieve arm needs a distribution supported in the unit cube"));
    }
    let alpha = dist.declared().alpha;
    let arms = [(ClassifierKind::Plugin, "sieve-vs-plugin:plugin"), (ClassifierKind::Sieve, "sieve-vs-plugin:sieve")];
    let per_job = par_map(&jobs(cfg), |&(n, r)| {
        let s = replicate_sample(cfg, dist.as_ref(), n, r)?;
        arms.iter()
            .map(|&(kind, label)| {
                let ((excess, hash), ms) = timed(opts, || {
                    let sample = s.clone();
                    let hash = sample.fingerprint();
                    let f = fit_classifier(kind, cfg, dist.as_ref(), &spec, sample)?;
                    Ok((evaluate(cfg, dist.as_ref(), &f, &[n as u64, r as u64])?, hash))
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
                Ok((row, hash))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let first_hashes: Vec<String> = per_job[0].iter().map(|(_, h)| format!("{h:016x}")).collect();
    let rows: Vec<ResultRow> = per_job.into_iter().flatten().map(|(row, _)| row).collect();
    let out = OutputDir::create(&opts.out)?;
    let files = vec![write_rows(&out, "sieve-vs-plugin.csv", &rows)?];
    let mut arm_json = serde_json::Map::new();
    let mut slopes = vec![];
    let mut series_all = vec![];
    for &(kind, label) in &arms {
        let theoretical = exponent_for(kind, alpha, spec.beta, spec.dim, cfg.estimator.p)?;
        let series = aggregate(&rows, label, &cfg.n_grid);
        let fit = rate_fit(&series, theoretical);
        slopes.push(fit.as_ref().map(|f| f.slope).ok());
        let key = if kind == ClassifierKind::Plugin { "plugin" } else { "sieve" };
        arm_json.insert(
            key.into(),
            json!({"theoretical": theoretical, "fit": fit_json(&fit), "series": series_json(&series)}),
        );
        series_all.push((label, series));
    }
    let pass = match (slopes[0], slopes[1]) {
        (Some(p), Some(s)) => p < 0.0 && s < 0.0 && p <= s + cfg.tolerance.slope_gap,
        _ => false,
    };
    let summary = json!({
        "theoretical": {"plugin": arm_json["plugin"]["theoretical"], "sieve": arm_json["sieve"]["theoretical"]},
        "measured": {"plugin": slopes[0], "sieve": slopes[1]},
        "tolerance": cfg.tolerance.slope_gap,
        "arms": arm_json,
        "first_sample_hash": {"plugin": first_hashes[0], "sieve": first_hashes[1]},
        "checks": checks,
    });
    let plot = rate_plot(&series_all.iter().map(|(l, s)| (*l, s.as_slice())).collect::<Vec<_>>());
    finish(cfg, opts, &out, files, pass, summary, Some(("n", "excess risk", plot)))
}
