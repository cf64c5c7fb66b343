//! Empirical risk minimisation over an epsilon-net of a Hölder class with
//! `beta <= 1` on `[0, 1]^d`.
//!
//! The net is the set of piecewise-constant functions on a regular partition
//! into cubes, taking values in a grid of spacing `epsilon`. It is never
//! enumerated: since net elements choose per-cell values independently and
//! the empirical risk only sees `1{value >= 1/2}`, the minimiser takes the
//! majority label in every cell.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::HolderSpec;
use crate::sample::Sample;

/// Upper limit on the number of cells of a net.
pub const MAX_CELLS: usize = 1 << 24;

/// Norm index `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormIndex {
    Finite(f64),
    Infinity,
}

/// `epsilon_n = n^{-1/(2+alpha+rho)}` for `p = inf` and
/// `n^{-(p+alpha)/((2+alpha)p + rho(p+alpha))}` for finite `p`.
pub fn epsilon_schedule(n: usize, alpha: f64, rho: f64, p: NormIndex) -> Result<f64> {
    if n == 0 || !(alpha >= 0.0) || !(rho > 0.0) {
        return Err(invalid("epsilon schedule needs n >= 1, alpha >= 0, rho > 0"));
    }
    let exponent = match p {
        NormIndex::Infinity => 1.0 / (2.0 + alpha + rho),
        NormIndex::Finite(p) if p >= 1.0 => (p + alpha) / ((2.0 + alpha) * p + rho * (p + alpha)),
        NormIndex::Finite(p) => return Err(invalid(format!("norm index must be >= 1, got {p}"))),
    };
    Ok((n as f64).powf(-exponent))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetSpec {
    pub holder: HolderSpec,
    pub epsilon: f64,
}

impl NetSpec {
    pub fn new(holder: HolderSpec, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { holder, epsilon })
    }

    /// `rho = d / beta`.
    pub fn entropy_exponent(&self) -> f64 {
        self.holder.dim as f64 / self.holder.beta
    }
}

/// Implicit net: a regular partition plus a value grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    dim: usize,
    cells_per_axis: usize,
    values: Vec<f64>,
}

/// Builds the net. The cell side is `(epsilon/(2L))^{1/beta}`, clamped to 1,
/// and shrunk by `2/sqrt(d)` when `d > 4` so that every point lies within
/// `epsilon/2` (in function value) of its cell centre. Values are
/// `epsilon (k + 1/2)` in `[0, 1]`; when the last one would exceed 1 it is
/// replaced by 1, so every level in `[0, 1]` is within `epsilon/2` of the grid.
pub fn build_net(spec: &NetSpec) -> Result<Net> {
    let HolderSpec { beta, lipschitz, dim } = spec.holder;
    if beta > 1.0 {
        return Err(Error::UnsupportedClass(format!(
            "piecewise-constant nets need beta <= 1, got beta = {beta}"
        )));
    }
    let eps = spec.epsilon;
    let mut side = (eps / (2.0 * lipschitz)).powf(1.0 / beta).min(1.0);
    if dim > 4 {
        side *= 2.0 / (dim as f64).sqrt();
    }
    let cells_per_axis = if eps >= 1.0 { 1 } else { ((1.0 / side) - 1e-9).ceil().max(1.0) as usize };
    let total = (cells_per_axis as f64).powi(dim as i32);
    if total > MAX_CELLS as f64 {
        return Err(invalid(format!("net would have {total} cells (limit {MAX_CELLS})")));
    }
    let count = ((1.0 / eps) - 1e-12).ceil().max(1.0) as usize;
    let values = (0..count).map(|k| (eps * (k as f64 + 0.5)).min(1.0)).collect();
    Ok(Net { dim, cells_per_axis, values })
}

impl Net {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    pub fn cell_side(&self) -> f64 {
        1.0 / self.cells_per_axis as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `log card(N) = (#cells) log(#values)`.
    pub fn log_cardinality(&self) -> f64 {
        self.cell_count() as f64 * (self.values.len() as f64).ln()
    }

    /// Cell containing `x`; points outside the cube go to the nearest cell.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let k = self.cells_per_axis;
        x.iter().rev().fold(0, |acc, &v| {
            let c = ((v * k as f64).floor().max(0.0) as usize).min(k - 1);
            acc * k + c
        })
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        let k = self.cells_per_axis;
        let mut rest = cell;
        (0..self.dim)
            .map(|_| {
                let c = rest % k;
                rest /= k;
                (c as f64 + 0.5) / k as f64
            })
            .collect()
    }

    /// Smallest grid value below 1/2, and smallest at or above 1/2.
    fn side_values(&self) -> (Option<f64>, Option<f64>) {
        (
            self.values.iter().copied().find(|&v| v < 0.5),
            self.values.iter().copied().find(|&v| v >= 0.5),
        )
    }

    /// Net element closest in sup norm to `g`, by quantising `g` at cell
    /// centres.
    pub fn project(&self, g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.cell_count())
            .map(|c| {
                let target = g(&self.cell_center(c));
                self.values
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                    .expect("non-empty value grid")
            })
            .collect()
    }
}

/// Plug-in rule of the selected net element.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveClassifier {
    net: Net,
    labels: Vec<u8>,
    values: Vec<f64>,
}

impl SieveClassifier {
    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn classify(&self, x: &[f64]) -> u8 {
        self.labels[self.net.cell_of(x)]
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        self.values[self.net.cell_of(x)]
    }

    pub fn is_consistent(&self) -> bool {
        self.labels.iter().zip(&self.values).all(|(&l, &v)| l == (v >= 0.5) as u8)
    }
}

/// Fraction of sample points with `f(X_i) != Y_i`.
pub fn empirical_risk(f: impl Fn(&[f64]) -> u8, sample: &Sample) -> Result<f64> {
    if sample.is_empty() {
        return Err(invalid("empirical risk of an empty sample"));
    }
    let wrong = sample.iter().filter(|&(x, y)| f(x) != y).count();
    Ok(wrong as f64 / sample.len() as f64)
}

/// Empirical risk minimiser over the net: per-cell majority label. Ties and
/// empty cells take label 0; each cell stores the smallest grid value on the
/// chosen side of 1/2. If the grid has values on one side only, every cell
/// takes that side.
pub fn sieve_fit(sample: &Sample, spec: &NetSpec) -> Result<SieveClassifier> {
    if sample.dim() != spec.holder.dim {
        return Err(Error::DimensionMismatch { expected: spec.holder.dim, got: sample.dim() });
    }
    if sample.iter().any(|(x, _)| x.iter().any(|&v| !(0.0..=1.0).contains(&v))) {
        return Err(invalid("sieve sample points must lie in [0,1]^d"));
    }
    let net = build_net(spec)?;
    let mut ones = vec![0u64; net.cell_count()];
    let mut zeros = vec![0u64; net.cell_count()];
    for (x, y) in sample.iter() {
        let c = net.cell_of(x);
        if y == 1 {
            ones[c] += 1;
        } else {
            zeros[c] += 1;
        }
    }
    let (below, above) = net.side_values();
    let (labels, values) = ones
        .iter()
        .zip(&zeros)
        .map(|(&o, &z)| match (below, above) {
            (Some(b), Some(a)) => {
                if o > z {
                    (1u8, a)
                } else {
                    (0u8, b)
                }
            }
            (Some(b), None) => (0, b),
            (None, Some(a)) => (1, a),
            (None, None) => unreachable!("value grid is never empty"),
        })
        .unzip();
    Ok(SieveClassifier { net, labels, values })
}
