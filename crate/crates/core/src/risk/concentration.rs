use serde::{Deserialize, Serialize};

use crate::distributions::SyntheticDistribution;
use crate::error::{invalid, Result};
use crate::lp_estimator::{eta_star, LPConfig};
use crate::math::KernelSpec;
use crate::lp_estimator::GuardThreshold;
use crate::rng::stream;

/// One `(n, h, delta)` cell of a probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub n: usize,
    pub h: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeCell {
    pub point: ProbePoint,
    pub exceed: usize,
    pub replicates: usize,
    pub probability: f64,
    /// `n h^d delta^2`.
    pub scaling: f64,
}

/// Empirical `P(|eta*(x) - eta(x)| >= delta)` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationProbe {
    pub x: Vec<f64>,
    pub replicates: usize,
    pub cells: Vec<ProbeCell>,
}

impl ConcentrationProbe {
    /// Spearman correlation of `log p` against `n h^d delta^2`, over cells
    /// with at least one exceedance.
    pub fn spearman(&self) -> Option<f64> {
        let (a, b): (Vec<f64>, Vec<f64>) =
            self.cells.iter().filter(|c| c.exceed > 0).map(|c| (c.probability.ln(), c.scaling)).unzip();
        spearman(&a, &b)
    }
}

/// Runs `replicates` independent fits at `x` for one grid cell. Replicate
/// `r` of cell `index` draws its sample from stream `(seed, [index, r])`.
pub fn probe_point(
    dist: &dyn SyntheticDistribution,
    x: &[f64],
    point: ProbePoint,
    order: u32,
    kernel: &KernelSpec,
    guard: GuardThreshold,
    replicates: usize,
    seed: u64,
    index: u64,
) -> Result<ProbeCell> {
    if replicates < 100 {
        return Err(invalid(format!("concentration probes need at least 100 replicates, got {replicates}")));
    }
    let cfg = LPConfig::new(order, point.h, *kernel)?.with_guard(guard);
    let truth = dist.eta(x);
    let mut exceed = 0;
    for r in 0..replicates {
        let mut rng = stream(seed, &[index, r as u64]);
        let s = dist.sample(point.n, &mut rng)?;
        if (eta_star(&s, x, &cfg)? - truth).abs() >= point.delta {
            exceed += 1;
        }
    }
    Ok(ProbeCell {
        point,
        exceed,
        replicates,
        probability: exceed as f64 / replicates as f64,
        scaling: point.n as f64 * point.h.powi(dist.dim() as i32) * point.delta * point.delta,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn concentration_probe(
    dist: &dyn SyntheticDistribution,
    x: &[f64],
    grid: &[ProbePoint],
    order: u32,
    kernel: &KernelSpec,
    guard: GuardThreshold,
    replicates: usize,
    seed: u64,
) -> Result<ConcentrationProbe> {
    if dist.density(x) <= 0.0 {
        return Err(invalid("query point must lie in the support"));
    }
    let cells = grid
        .iter()
        .enumerate()
        .map(|(i, &p)| probe_point(dist, x, p, order, kernel, guard, replicates, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationProbe { x: x.to_vec(), replicates, cells })
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` with
/// fewer than 3 points or a constant input.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return None;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}
