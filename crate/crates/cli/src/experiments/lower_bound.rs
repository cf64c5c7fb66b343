use margin_rates::risk::assouad_bound;
use serde_json::json;

use super::common::*;
use crate::config::{ClassifierKind, ExperimentConfig};
use crate::output::{OutputDir, ResultRow, Series};
use crate::{CliError, Outcome, RunOptions};

fn sigma_label(sigma: &[i8]) -> String {
    sigma.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn run_lower_bound(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let base = cfg
        .distribution
        .build_hypercube()?
        .ok_or_else(|| config_error("lower-bound experiment needs a hypercube distribution"))?;
    let m = base.m();
    if m > 4 {
        return Err(config_error(format!("lower-bound enumerates 2^m laws and needs m <= 4, got m = {m}")));
    }
    let laws = (0..1usize << m)
        .map(|mask| base.with_sigma((0..m).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = estimator_holder(cfg, &base)?;
    let kind = cfg.estimator.classifier;
    let random = matches!(kind, ClassifierKind::Plugin | ClassifierKind::Sieve);
    let reps = if random { cfg.replicates } else { 1 };
    let jobs: Vec<(usize, usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..reps).flat_map(move |r| (0..1usize << m).map(move |l| (n, r, l))))
        .collect();
    let rows = par_map(&jobs, |&(n, r, l)| {
        let law = &laws[l];
        let (excess, ms) = timed(opts, || {
            // The X draws do not depend on sigma, so every law sees the same points.
            let s = replicate_sample(cfg, law, n, r)?;
            let f = fit_classifier(kind, cfg, law, &spec, s)?;
            evaluate(cfg, law, &f, &[n as u64, r as u64, l as u64])
        })?;
        Ok(ResultRow {
            experiment: format!("lower-bound:sigma={}", sigma_label(law.sigma())),
            n,
            replicate: r,
            seed: replicate_seed(cfg, n, r),
            excess: excess.value,
            se: excess.se,
            wall_ms: ms,
        })
    })?;
    let out = OutputDir::create(&opts.out)?;
    let files = vec![write_rows(&out, "lower-bound.csv", &rows)?];
    let b = base.ball_gap();
    let w = base.w();
    let sig = cfg.tolerance.sigmas;
    let mut pass = true;
    let mut per_n = vec![];
    let mut plot_avg = vec![];
    let mut plot_bound = vec![];
    for &n in &cfg.n_grid {
        let law_avg: Vec<f64> = (0..reps)
            .map(|r| {
                let v: Vec<f64> = rows.iter().filter(|x| x.n == n && x.replicate == r).map(|x| x.excess).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        let (avg, se) = mean_se(&law_avg);
        let bound = assouad_bound(m, w, n, b, b);
        let vacuous = b * (n as f64 * w).sqrt() >= 1.0;
        let ok = avg >= bound - sig * se;
        pass &= ok;
        let per_law: Vec<_> = laws
            .iter()
            .map(|law| {
                let label = format!("lower-bound:sigma={}", sigma_label(law.sigma()));
                let v: Vec<f64> = rows.iter().filter(|x| x.n == n && x.experiment == label).map(|x| x.excess).collect();
                json!({"sigma": sigma_label(law.sigma()), "excess": mean_se(&v).0})
            })
            .collect();
        per_n.push(json!({"n": n, "average": avg, "se": se, "bound": bound, "vacuous": vacuous, "ok": ok, "laws": per_law}));
        plot_avg.push((n as f64, avg));
        plot_bound.push((n as f64, bound));
    }
    let first = &per_n[0];
    let summary = json!({
        "theoretical": first["bound"],
        "measured": first["average"],
        "tolerance": sig,
        "vacuous": per_n.iter().all(|p| p["vacuous"].as_bool() == Some(true)),
        "classifier": kind,
        "b": b,
        "m": m,
        "w": w,
        "results": per_n,
    });
    let plot = vec![
        Series { label: "average excess".into(), points: plot_avg },
        Series { label: "bound".into(), points: plot_bound },
    ];
    finish(cfg, opts, &out, files, pass, summary, Some(("n", "excess risk", plot)))
}
