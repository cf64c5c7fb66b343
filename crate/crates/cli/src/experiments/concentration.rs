use margin_rates::math::KernelSpec;
use margin_rates::risk::{probe_point, ConcentrationProbe};
use serde_json::json;

use super::common::*;
use crate::config::ExperimentConfig;
use crate::output::{csv_text, num, OutputDir, Series};
use crate::{CliError, Outcome, RunOptions};

const COLUMNS: [&str; 8] = ["experiment", "n", "h", "delta", "replicates", "exceed", "probability", "scaling"];

pub fn run_concentration(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let probe_cfg = cfg.concentration.as_ref().ok_or_else(|| config_error("missing \"concentration\" section"))?;
    if cfg.replicates < 100 {
        return Err(config_error(format!("concentration needs replicates >= 100, got {}", cfg.replicates)));
    }
    let dist = cfg.distribution.build()?;
    let x = &probe_cfg.x;
    if x.len() != dist.dim() {
        return Err(config_error(format!("query point has dimension {}, distribution {}", x.len(), dist.dim())));
    }
    if dist.density(x) <= 0.0 {
        return Err(config_error("query point must lie in the support"));
    }
    if probe_cfg.grid.iter().any(|p| p.n == 0 || !(p.h > 0.0) || !(p.delta > 0.0)) {
        return Err(config_error("grid entries need n >= 1, h > 0 and delta > 0"));
    }
    let spec = estimator_holder(cfg, dist.as_ref())?;
    let kernel = KernelSpec::new(cfg.estimator.kernel.kind, spec.dim, cfg.estimator.kernel.radius)?;
    let order = cfg.estimator.order.unwrap_or_else(|| margin_rates::math::floor_strict(spec.beta));
    let indexed: Vec<(usize, _)> = probe_cfg.grid.iter().copied().enumerate().collect();
    let cells = par_map(&indexed, |&(i, p)| {
        Ok(probe_point(dist.as_ref(), x, p, order, &kernel, cfg.estimator.guard, cfg.replicates, cfg.seed, i as u64)?)
    })?;
    let probe = ConcentrationProbe { x: x.clone(), replicates: cfg.replicates, cells };
    let out = OutputDir::create(&opts.out)?;
    let rows = probe.cells.iter().map(|c| {
        vec![
            "concentration".to_string(),
            c.point.n.to_string(),
            num(c.point.h),
            num(c.point.delta),
            c.replicates.to_string(),
            c.exceed.to_string(),
            num(c.probability),
            num(c.scaling),
        ]
    });
    let files = vec![out.write("concentration.csv", &csv_text(&COLUMNS, rows))?];
    // Doubling n at fixed (h, delta) should not raise the exceedance by more than 2 SE.
    let se = |p: f64| (p * (1.0 - p) / cfg.replicates as f64).sqrt();
    let mut monotone = vec![];
    for a in &probe.cells {
        for b in &probe.cells {
            if b.point.n == 2 * a.point.n && b.point.h == a.point.h && b.point.delta == a.point.delta {
                let ok = b.probability <= a.probability + 2.0 * (se(a.probability) + se(b.probability));
                monotone.push(json!({"n": a.point.n, "n_doubled": b.point.n, "ok": ok}));
            }
        }
    }
    let rho = probe.spearman();
    let pass = rho.is_some_and(|r| r <= cfg.tolerance.spearman);
    let summary = json!({
        "theoretical": "exceedance decreasing in n h^d delta^2",
        "measured": rho,
        "tolerance": cfg.tolerance.spearman,
        "spearman": rho,
        "cells_used": probe.cells.iter().filter(|c| c.exceed > 0).count(),
        "monotonicity": monotone,
        "probe": probe,
    });
    let plot = vec![Series {
        label: "exceedance".into(),
        points: probe.cells.iter().map(|c| (c.scaling, c.probability)).collect(),
    }];
    finish(cfg, opts, &out, files, pass, summary, Some(("n h^d delta^2", "P(|eta* - eta| >= delta)", plot)))
}
