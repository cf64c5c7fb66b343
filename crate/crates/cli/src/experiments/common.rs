use std::time::Instant;

use margin_rates::distributions::SyntheticDistribution;
use margin_rates::lp_estimator::{LPConfig, LocalPolyEstimator};
use margin_rates::math::{floor_strict, HolderSpec, KernelSpec};
use margin_rates::risk::{excess_risk, RiskEstimate, RiskMethod};
use margin_rates::sieve::{epsilon_schedule, sieve_fit, NetSpec};
use margin_rates::{distributions::validate_holder, rng, Sample};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{BandwidthRule, ClassifierKind, ExperimentConfig, RiskConfig};
use crate::output::{csv_text, loglog_svg, OutputDir, ResultRow, Series, RESULT_COLUMNS};
use crate::{CliError, Outcome, RunOptions};

/// Stream path tag for pre-flight checks, disjoint from `(n, replicate)`.
pub const CHECK_STREAM: u64 = u64::MAX;

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Smoothness the estimator assumes: explicit values or the declared ones.
pub fn estimator_holder(cfg: &ExperimentConfig, dist: &dyn SyntheticDistribution) -> Result<HolderSpec, CliError> {
    let dec = dist.declared();
    Ok(HolderSpec::new(
        cfg.estimator.beta.unwrap_or(dec.beta),
        cfg.estimator.lipschitz.unwrap_or(dec.lipschitz),
        dist.dim(),
    )?)
}

pub fn bandwidth(rule: BandwidthRule, n: usize, spec: &HolderSpec) -> f64 {
    match rule {
        BandwidthRule::Holder { scale } => scale * (n as f64).powf(-1.0 / (2.0 * spec.beta + spec.dim as f64)),
        BandwidthRule::Fixed { h } => h,
    }
}

pub fn lp_config(cfg: &ExperimentConfig, spec: &HolderSpec, n: usize) -> Result<LPConfig, CliError> {
    let kernel = KernelSpec::new(cfg.estimator.kernel.kind, spec.dim, cfg.estimator.kernel.radius)?;
    let order = cfg.estimator.order.unwrap_or_else(|| floor_strict(spec.beta));
    Ok(LPConfig::new(order, bandwidth(cfg.estimator.bandwidth, n, spec), kernel)?.with_guard(cfg.estimator.guard))
}

pub type Classifier = Box<dyn Fn(&[f64]) -> u8 + Send + Sync>;

pub fn fit_classifier(
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
    dist: &dyn SyntheticDistribution,
    spec: &HolderSpec,
    sample: Sample,
) -> Result<Classifier, CliError> {
    let n = sample.len();
    Ok(match kind {
        ClassifierKind::Plugin => {
            let est = LocalPolyEstimator::fit(sample, lp_config(cfg, spec, n)?)?;
            Box::new(move |x| est.classify(x))
        }
        ClassifierKind::Sieve => {
            let rho = spec.dim as f64 / spec.beta;
            let eps = epsilon_schedule(n, dist.declared().alpha, rho, cfg.estimator.p)?;
            let sieve = sieve_fit(&sample, &NetSpec::new(*spec, eps)?)?;
            Box::new(move |x| sieve.classify(x))
        }
        ClassifierKind::BayesPlus => {
            let cube = dist
                .as_hypercube()
                .ok_or_else(|| config_error("bayes-plus classifier needs a hypercube distribution"))?;
            let plus = cube.with_sigma(vec![1; cube.m()])?;
            Box::new(move |x| plus.bayes_label(x))
        }
        ClassifierKind::Constant0 => Box::new(|_| 0),
        ClassifierKind::Constant1 => Box::new(|_| 1),
    })
}

pub fn risk_method(cfg: &ExperimentConfig) -> RiskMethod {
    match cfg.risk {
        RiskConfig::Quadrature => RiskMethod::Quadrature { nodes: cfg.mc_budget },
        RiskConfig::MonteCarlo => RiskMethod::MonteCarlo { draws: cfg.mc_budget },
        RiskConfig::ClosedForm => RiskMethod::ClosedForm { nodes_per_ball: cfg.mc_budget },
    }
}

/// Excess risk of `f`; Monte Carlo draws come from stream `(seed, path + [1])`.
pub fn evaluate(
    cfg: &ExperimentConfig,
    dist: &dyn SyntheticDistribution,
    f: &dyn Fn(&[f64]) -> u8,
    path: &[u64],
) -> Result<RiskEstimate, CliError> {
    let mut p = path.to_vec();
    p.push(1);
    Ok(excess_risk(dist, f, risk_method(cfg), &mut rng::stream(cfg.seed, &p))?)
}

/// Sample for replicate `r` at size `n`: stream `(seed, [n, r])`.
pub fn replicate_sample(cfg: &ExperimentConfig, dist: &dyn SyntheticDistribution, n: usize, r: usize) -> Result<Sample, CliError> {
    Ok(dist.sample(n, &mut rng::stream(cfg.seed, &[n as u64, r as u64]))?)
}

pub fn replicate_seed(cfg: &ExperimentConfig, n: usize, r: usize) -> u64 {
    rng::derive_seed(cfg.seed, &[n as u64, r as u64])
}

/// `(n, replicate)` jobs in output order.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.n_grid.iter().flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r))).collect()
}

/// Order-preserving parallel map on the current pool.
pub fn par_map<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> Result<T, CliError> + Sync + Send) -> Result<Vec<T>, CliError> {
    items.par_iter().map(f).collect()
}

pub fn timed<T>(opts: &RunOptions, f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, u64), CliError> {
    let start = Instant::now();
    let v = f()?;
    let ms = if opts.wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    Ok((v, ms))
}

/// Mean and standard error of the mean of the rows with a given label and `n`.
pub fn aggregate(rows: &[ResultRow], label: &str, n_grid: &[usize]) -> Vec<(usize, RiskEstimate)> {
    n_grid
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n && r.experiment == label).map(|r| r.excess).collect();
            let (mean, se) = mean_se(&v);
            (n, RiskEstimate { value: mean, se, method: RiskMethod::MonteCarlo { draws: v.len().max(2) } })
        })
        .collect()
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn series_json(series: &[(usize, RiskEstimate)]) -> Value {
    Value::Array(series.iter().map(|(n, r)| json!({"n": n, "excess": r.value, "se": r.se})).collect())
}

/// Pre-flight: declared Hölder class and margin envelope must hold.
pub fn check_distribution(cfg: &ExperimentConfig, dist: &dyn SyntheticDistribution) -> Result<Value, CliError> {
    let dec = dist.declared();
    let spec = HolderSpec::new(dec.beta, dec.lipschitz, dist.dim())?;
    let report = validate_holder(dist, &spec, 2000, &mut rng::stream(cfg.seed, &[CHECK_STREAM]))?;
    if !report.pass {
        return Err(config_error(format!(
            "distribution violates its declared Hölder class (beta = {}, L = {}): worst ratio {}",
            dec.beta, dec.lipschitz, report.worst_ratio
        )));
    }
    for k in 0..=200 {
        let t = 10f64.powf(-4.0 + 4.0 * k as f64 / 200.0);
        if dist.margin_mass(t) > dec.c0 * t.powf(dec.alpha) * (1.0 + 1e-12) {
            return Err(config_error(format!("margin envelope violated at t = {t}")));
        }
    }
    Ok(json!({"holder_worst_ratio": report.worst_ratio, "declared": dec}))
}

pub fn write_rows(out: &OutputDir, name: &str, rows: &[ResultRow]) -> Result<std::path::PathBuf, CliError> {
    out.write(name, &csv_text(&RESULT_COLUMNS, rows.iter().map(ResultRow::fields)))
}

/// Writes the summary (and optional SVG) and assembles the outcome.
pub fn finish(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    out: &OutputDir,
    mut files: Vec<std::path::PathBuf>,
    pass: bool,
    mut summary: Value,
    plot: Option<(&str, &str, Vec<Series>)>,
) -> Result<Outcome, CliError> {
    let name = cfg.experiment.name();
    summary["experiment"] = json!(name);
    summary["pass"] = json!(pass);
    summary["seed"] = json!(cfg.seed);
    summary["workers"] = json!(cfg.workers);
    files.push(out.write_json(&format!("{name}_summary.json"), &summary)?);
    if let (Some(svg), Some((xl, yl, series))) = (&opts.svg, plot) {
        files.push(out.write(svg, &loglog_svg(name, xl, yl, &series))?);
    }
    Ok(Outcome { pass, summary, files })
}
