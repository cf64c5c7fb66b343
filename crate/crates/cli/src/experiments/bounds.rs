use margin_rates::distributions::SyntheticDistribution;
use margin_rates::risk::{comparison_bound_linf, comparison_bound_lp};
use margin_rates::rng;
use rand::Rng;
use serde_json::json;

use super::common::*;
use crate::config::ExperimentConfig;
use crate::output::{csv_text, num, OutputDir};
use crate::{CliError, Outcome, RunOptions};

const COLUMNS: [&str; 11] = [
    "experiment", "trial", "distribution", "noise", "sup_err", "l1_err", "l2_err", "excess", "bound_linf", "bound_l1", "bound_l2",
];

/// Piecewise-constant regression function on a regular grid over a box.
struct CellFunction {
    lo: Vec<f64>,
    hi: Vec<f64>,
    k: usize,
    values: Vec<f64>,
}

impl CellFunction {
    fn cell_box(&self, c: usize) -> (Vec<f64>, Vec<f64>) {
        let mut r = c;
        let mut a = vec![0.0; self.lo.len()];
        let mut b = vec![0.0; self.lo.len()];
        for i in 0..self.lo.len() {
            let step = (self.hi[i] - self.lo[i]) / self.k as f64;
            let j = r % self.k;
            r /= self.k;
            a[i] = self.lo[i] + step * j as f64;
            b[i] = if j + 1 == self.k { self.hi[i] } else { self.lo[i] + step * (j + 1) as f64 };
        }
        (a, b)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut c = 0;
        let mut stride = 1;
        for i in 0..x.len() {
            let t = (x[i] - self.lo[i]) / (self.hi[i] - self.lo[i]);
            let j = ((t * self.k as f64).floor().max(0.0) as usize).min(self.k - 1);
            c += j * stride;
            stride *= self.k;
        }
        self.values[c]
    }
}

struct Trial {
    row: Vec<String>,
    violations: Vec<&'static str>,
}

fn run_trial(cfg: &ExperimentConfig, dist: &dyn SyntheticDistribution, trial: usize, name: &str) -> Result<Trial, CliError> {
    let cc = cfg.compare.as_ref().expect("checked");
    let mut rng = rng::stream(cfg.seed, &[trial as u64]);
    let (lo, hi) = dist.support_box();
    let d = dist.dim();
    let k = cc.cells_per_axis;
    let cells = k.pow(d as u32);
    let noise = cc.max_noise * rng.random::<f64>();
    let mut g = CellFunction { lo, hi, k, values: vec![0.0; cells] };
    for c in 0..cells {
        let (a, b) = g.cell_box(c);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect();
        g.values[c] = (dist.eta(&mid) + noise * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0);
    }
    let mut sup_err = 0.0f64;
    for c in 0..cells {
        let (a, b) = g.cell_box(c);
        if let Some((mn, mx)) = dist.eta_range_on_box(&a, &b) {
            sup_err = sup_err.max((g.values[c] - mn).abs()).max((g.values[c] - mx).abs());
        }
    }
    let rule = dist.quadrature(cfg.mc_budget).ok_or_else(|| config_error(format!("{name}: no quadrature rule")))?;
    let l1 = rule.integrate(|x| (g.eval(x) - dist.eta(x)).abs());
    let l2 = rule.integrate(|x| (g.eval(x) - dist.eta(x)).powi(2)).sqrt();
    let excess = rule.integrate(|x| {
        if ((g.eval(x) >= 0.5) as u8) != dist.bayes_label(x) {
            (2.0 * dist.eta(x) - 1.0).abs()
        } else {
            0.0
        }
    });
    let dec = dist.declared();
    let b_inf = comparison_bound_linf(dec.alpha, dec.c0, sup_err);
    let b_1 = comparison_bound_lp(dec.alpha, dec.c0, 1.0, l1)?;
    let b_2 = comparison_bound_lp(dec.alpha, dec.c0, 2.0, l2)?;
    // Deterministic quadrature: the 3-SE allowance is zero; 1e-12 absorbs rounding.
    let mut violations = vec![];
    for (bound, label) in [(b_inf, "linf"), (b_1, "l1"), (b_2, "l2")] {
        if excess > bound + 1e-12 {
            violations.push(label);
        }
    }
    let row = vec![
        "compare-bounds".into(),
        trial.to_string(),
        name.to_string(),
        num(noise),
        num(sup_err),
        num(l1),
        num(l2),
        num(excess),
        num(b_inf),
        num(b_1),
        num(b_2),
    ];
    Ok(Trial { row, violations })
}

pub fn run_compare_bounds(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let cc = cfg.compare.as_ref().ok_or_else(|| config_error("missing \"compare\" section"))?;
    if cc.distributions.is_empty() || cc.trials == 0 || cc.cells_per_axis == 0 {
        return Err(config_error("compare needs distributions, trials >= 1 and cells_per_axis >= 1"));
    }
    let dists = cc.distributions.iter().map(|d| d.build()).collect::<Result<Vec<_>, _>>()?;
    for d in &dists {
        if d.declared().alpha <= 0.0 {
            return Err(config_error(format!("{}: the L_p comparison needs alpha > 0", d.name())));
        }
    }
    let trials: Vec<usize> = (0..cc.trials).collect();
    let results = par_map(&trials, |&t| {
        let dist = dists[t % dists.len()].as_ref();
        run_trial(cfg, dist, t, dist.name())
    })?;
    let mut counts = std::collections::BTreeMap::new();
    for r in &results {
        for v in &r.violations {
            *counts.entry(*v).or_insert(0usize) += 1;
        }
    }
    let total: usize = counts.values().sum();
    let out = OutputDir::create(&opts.out)?;
    let files = vec![out.write("compare-bounds.csv", &csv_text(&COLUMNS, results.iter().map(|r| r.row.clone())))?];
    let pass = total == 0;
    let summary = json!({
        "theoretical": "excess <= bound for every trial",
        "measured": {"violations": total, "by_bound": counts},
        "tolerance": 0,
        "trials": cc.trials,
        "distributions": cc.distributions,
    });
    finish(cfg, opts, &out, files, pass, summary, None)
}
