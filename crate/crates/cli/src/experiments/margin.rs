use margin_rates::rng;
use serde_json::json;

use super::common::*;
use crate::config::ExperimentConfig;
use crate::output::{csv_text, num, OutputDir, Series};
use crate::{CliError, Outcome, RunOptions};

const COLUMNS: [&str; 7] = ["experiment", "t", "draws", "empirical", "closed_form", "se", "envelope"];

pub fn run_margin_check(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let margin = cfg.margin.as_ref().ok_or_else(|| config_error("missing \"margin\" section"))?;
    if margin.t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(config_error("t_grid entries must be positive"));
    }
    let dist = cfg.distribution.build()?;
    let dec = dist.declared();
    let mut ts = margin.t_grid.clone();
    if let Some(cube) = dist.as_hypercube() {
        let thr = cube.margin_threshold();
        ts.extend([thr, thr * (1.0 - 1e-9)]);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let draws = cfg.mc_budget;
    let chunk = 4096;
    let chunks: Vec<usize> = (0..draws.div_ceil(chunk)).collect();
    let gaps: Vec<f64> = par_map(&chunks, |&c| {
        let mut rng = rng::stream(cfg.seed, &[c as u64]);
        let len = chunk.min(draws - c * chunk);
        Ok((0..len).map(|_| (dist.eta(&dist.sample_x(&mut rng)) - 0.5).abs()).collect::<Vec<f64>>())
    })?
    .into_iter()
    .flatten()
    .collect();
    let sig = cfg.tolerance.sigmas;
    let mut rows = vec![];
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut points = vec![];
    for &t in &ts {
        let emp = gaps.iter().filter(|&&g| g > 0.0 && g <= t).count() as f64 / draws as f64;
        let closed = dist.margin_mass(t);
        let se = (closed * (1.0 - closed) / draws as f64).sqrt();
        let envelope = dec.c0 * t.powf(dec.alpha);
        let within = if se > 0.0 { (emp - closed).abs() <= sig * se } else { emp == closed };
        if se > 0.0 {
            worst = worst.max((emp - closed).abs() / se);
        } else if emp != closed {
            worst = f64::INFINITY;
        }
        let under = closed <= envelope * (1.0 + 1e-12);
        pass &= within && under;
        points.push(json!({"t": t, "empirical": emp, "closed_form": closed, "se": se, "envelope": envelope, "within": within, "under_envelope": under}));
        rows.push(vec!["margin-check".into(), num(t), draws.to_string(), num(emp), num(closed), num(se), num(envelope)]);
    }
    let out = OutputDir::create(&opts.out)?;
    let files = vec![out.write("margin-check.csv", &csv_text(&COLUMNS, rows))?];
    let mut summary = json!({
        "theoretical": {"alpha": dec.alpha, "c0": dec.c0},
        "measured": {"worst_se_ratio": if worst.is_finite() { json!(worst) } else { json!("inf") }},
        "tolerance": sig,
        "distribution": dist.describe(),
        "points": points,
    });
    if let Some(cube) = dist.as_hypercube() {
        summary["step_threshold"] = json!(cube.margin_threshold());
    }
    let plot = vec![
        Series { label: "empirical".into(), points: ts.iter().zip(&summary["points"].as_array().cloned().unwrap_or_default()).map(|(t, p)| (*t, p["empirical"].as_f64().unwrap_or(0.0))).collect() },
        Series { label: "closed form".into(), points: ts.iter().map(|&t| (t, dist.margin_mass(t))).collect() },
        Series { label: "envelope".into(), points: ts.iter().map(|&t| (t, dec.c0 * t.powf(dec.alpha))).collect() },
    ];
    finish(cfg, opts, &out, files, pass, summary, Some(("t", "P(0 < |eta - 1/2| <= t)", plot)))
}
