//! Local polynomial regression `LP(l)` and the guarded, clipped estimator
//! `eta*` used by the plug-in classifier.
//!
//! For a query point `x`, bandwidth `h` and kernel `K`, with
//! `w_i = K((X_i - x)/h)` and the monomials `U(u) = (u^s)_{|s| <= l}`:
//!
//! ```text
//! Q     = sum_i w_i U(X_i - x) U(X_i - x)^T
//! V     = sum_i Y_i w_i U(X_i - x)
//! Omega = 1/(n h^d) sum_i w_i U((X_i - x)/h) U((X_i - x)/h)^T
//! ```
//!
//! The LP value is the constant coefficient of `Q^{-1} V`. `eta*` returns it
//! projected on `[0, 1]` when `lambda_min(Omega)` exceeds the guard
//! threshold, and 0 otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_solve, eigen_solve, jacobi_eigen, SymMatrix};
use crate::math::{enumerate_multiindices, HolderSpec, KernelSpec, MultiIndex};
use crate::sample::Sample;

/// Relative eigenvalue tolerance below which `Q` counts as singular.
pub const PD_REL_TOL: f64 = 1e-12;
/// Convergence tolerance of the symmetric eigen-solver.
pub const EIGEN_TOL: f64 = 1e-10;
/// Guard threshold used for `n <= 2`, where `1/log n` degenerates.
pub const GUARD_FLOOR: f64 = 1e-12;

/// Threshold on `lambda_min(Omega)` as a function of the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GuardThreshold {
    /// `scale / log n` (the default has `scale = 1`).
    InverseLog { scale: f64 },
    Constant { value: f64 },
}

impl Default for GuardThreshold {
    fn default() -> Self {
        GuardThreshold::InverseLog { scale: 1.0 }
    }
}

impl GuardThreshold {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            GuardThreshold::InverseLog { scale } => {
                if n <= 2 {
                    GUARD_FLOOR
                } else {
                    scale / (n as f64).ln()
                }
            }
            GuardThreshold::Constant { value } => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPConfig {
    pub order: u32,
    pub bandwidth: f64,
    pub kernel: KernelSpec,
    pub guard: GuardThreshold,
}

impl LPConfig {
    pub fn new(order: u32, bandwidth: f64, kernel: KernelSpec) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(invalid(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Self { order, bandwidth, kernel, guard: GuardThreshold::default() })
    }

    pub fn with_guard(mut self, guard: GuardThreshold) -> Self {
        self.guard = guard;
        self
    }

    /// Order `floor(beta)` and bandwidth `n^{-1/(2 beta + d)}` with the
    /// uniform unit-ball kernel.
    pub fn for_holder(spec: &HolderSpec, n: usize) -> Self {
        Self {
            order: spec.floor_beta(),
            bandwidth: default_bandwidth(n, spec),
            kernel: KernelSpec::uniform_ball(spec.dim),
            guard: GuardThreshold::default(),
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.kernel.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.kernel.dim() });
        }
        if !(self.bandwidth > 0.0) {
            return Err(invalid("bandwidth must be positive"));
        }
        Ok(())
    }
}

/// Local design at one query point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDesign {
    pub indices: Vec<MultiIndex>,
    pub q: SymMatrix,
    pub v: Vec<f64>,
    pub omega_bar: SymMatrix,
    /// `V` on the same scale as `Omega`: `1/(n h^d) sum_i Y_i w_i U((X_i - x)/h)`.
    pub v_bar: Vec<f64>,
    pub n: usize,
}

/// Outcome of the local least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpSolution {
    Estimate(f64),
    Singular,
}

impl LpSolution {
    pub fn value(self) -> Option<f64> {
        match self {
            LpSolution::Estimate(v) => Some(v),
            LpSolution::Singular => None,
        }
    }
}

fn check_point(sample: &Sample, x: &[f64]) -> Result<()> {
    if x.len() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), got: x.len() });
    }
    Ok(())
}

/// Monomial vectors `U(u)`, with the exponent table precomputed.
#[derive(Debug, Clone)]
struct Monomials {
    indices: Vec<MultiIndex>,
    dim: usize,
}

impl Monomials {
    fn new(dim: usize, order: u32) -> Self {
        Self { indices: enumerate_multiindices(dim, order), dim }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    fn fill(&self, u: &[f64], out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.indices) {
            *o = s.exponents().iter().zip(u).fold(1.0, |acc, (&e, &v)| acc * v.powi(e as i32));
        }
        debug_assert_eq!(u.len(), self.dim);
    }
}

/// Accumulates the scaled system (`Omega`, `V bar`) over candidate points.
struct Accumulator<'a> {
    mono: &'a Monomials,
    x: &'a [f64],
    h: f64,
    kernel: &'a KernelSpec,
    omega: Vec<f64>,
    rhs: Vec<f64>,
    scaled: Vec<f64>,
    buf: Vec<f64>,
}

impl<'a> Accumulator<'a> {
    fn new(mono: &'a Monomials, x: &'a [f64], h: f64, kernel: &'a KernelSpec) -> Self {
        let m = mono.len();
        Self {
            mono,
            x,
            h,
            kernel,
            omega: vec![0.0; m * m],
            rhs: vec![0.0; m],
            scaled: vec![0.0; x.len()],
            buf: vec![0.0; m],
        }
    }

    #[inline]
    fn push(&mut self, p: &[f64], y: u8) {
        let mut r2 = 0.0;
        for ((s, &pi), &xi) in self.scaled.iter_mut().zip(p).zip(self.x) {
            *s = (pi - xi) / self.h;
            r2 += *s * *s;
        }
        let w = self.kernel.eval_sq_norm(r2);
        if w == 0.0 {
            return;
        }
        self.mono.fill(&self.scaled, &mut self.buf);
        let m = self.buf.len();
        for a in 0..m {
            let wa = w * self.buf[a];
            if y == 1 {
                self.rhs[a] += wa;
            }
            for b in a..m {
                self.omega[a * m + b] += wa * self.buf[b];
            }
        }
    }

    /// Returns `(Omega, V bar)` normalised by `1/(n h^d)`.
    fn finish(self, n: usize) -> (SymMatrix, Vec<f64>) {
        let m = self.buf.len();
        let norm = 1.0 / (n as f64 * self.h.powi(self.x.len() as i32));
        let mut omega = SymMatrix::zeros(m);
        for a in 0..m {
            for b in a..m {
                let v = self.omega[a * m + b] * norm;
                omega.set(a, b, v);
                omega.set(b, a, v);
            }
        }
        (omega, self.rhs.into_iter().map(|v| v * norm).collect())
    }
}

/// Assembles `Q`, `V` and `Omega` at `x` by a direct pass over the sample.
pub fn build_design(sample: &Sample, x: &[f64], cfg: &LPConfig) -> Result<LocalDesign> {
    if sample.is_empty() {
        return Err(invalid("sample must be non-empty"));
    }
    check_point(sample, x)?;
    cfg.check(sample.dim())?;
    let d = sample.dim();
    let h = cfg.bandwidth;
    let mono = Monomials::new(d, cfg.order);
    let m = mono.len();
    let mut q = SymMatrix::zeros(m);
    let mut v = vec![0.0; m];
    let mut diff = vec![0.0; d];
    let mut u = vec![0.0; m];
    let mut acc = Accumulator::new(&mono, x, h, &cfg.kernel);
    for (p, y) in sample.iter() {
        acc.push(p, y);
        let mut r2 = 0.0;
        for ((di, &pi), &xi) in diff.iter_mut().zip(p).zip(x) {
            *di = pi - xi;
            r2 += (*di / h) * (*di / h);
        }
        let w = cfg.kernel.eval_sq_norm(r2);
        if w == 0.0 {
            continue;
        }
        mono.fill(&diff, &mut u);
        for a in 0..m {
            let wa = w * u[a];
            v[a] += y as f64 * wa;
            q.add(a, a, wa * u[a]);
            for b in a + 1..m {
                q.add(a, b, wa * u[b]);
                q.add(b, a, wa * u[b]);
            }
        }
    }
    let (omega_bar, v_bar) = acc.finish(sample.len());
    Ok(LocalDesign { indices: mono.indices, q, v, omega_bar, v_bar, n: sample.len() })
}

/// Solves `Q T = V` and returns `T_0`, the value of the fitted local
/// polynomial at the query point. `Q` counts as positive definite when its
/// smallest eigenvalue exceeds `1e-12` times its largest.
pub fn lp_solve(design: &LocalDesign) -> LpSolution {
    solve_constant_coefficient(&design.q, &design.v)
}

fn solve_constant_coefficient(a: &SymMatrix, b: &[f64]) -> LpSolution {
    if !a.is_finite() || a.max_abs() == 0.0 {
        return LpSolution::Singular;
    }
    let eig = jacobi_eigen(a, EIGEN_TOL * 1e-4);
    if !(eig.min() > PD_REL_TOL * eig.max()) {
        return LpSolution::Singular;
    }
    let t = cholesky_solve(a, b, PD_REL_TOL).unwrap_or_else(|| eigen_solve(&eig, b));
    LpSolution::Estimate(t[0])
}

/// Guarded, clipped estimate from an assembled design.
fn guarded_value(omega: &SymMatrix, v_bar: &[f64], threshold: f64) -> f64 {
    let eig = jacobi_eigen(omega, EIGEN_TOL);
    if !(eig.min() > threshold) {
        return 0.0;
    }
    let t = cholesky_solve(omega, v_bar, PD_REL_TOL).unwrap_or_else(|| eigen_solve(&eig, v_bar));
    t[0].clamp(0.0, 1.0)
}

/// `eta*(x)`: the LP estimate projected on `[0, 1]` when
/// `lambda_min(Omega) > guard(n)`, otherwise 0 (ties go to the guard).
pub fn eta_star(sample: &Sample, x: &[f64], cfg: &LPConfig) -> Result<f64> {
    let design = build_design(sample, x, cfg)?;
    Ok(guarded_value(&design.omega_bar, &design.v_bar, cfg.guard.at(sample.len())))
}

/// `h = n^{-1/(2 beta + d)}`.
pub fn default_bandwidth(n: usize, spec: &HolderSpec) -> f64 {
    (n.max(1) as f64).powf(-1.0 / (2.0 * spec.beta + spec.dim as f64))
}

/// Plug-in rule `1{eta_hat(x) >= 1/2}`.
pub fn plugin_classify(eta_hat: impl Fn(&[f64]) -> f64, x: &[f64]) -> u8 {
    (eta_hat(x) >= 0.5) as u8
}

/// Uniform grid over the sample's bounding box, cell side at least the
/// kernel support radius, stored in compressed-row form.
#[derive(Debug, Clone)]
struct GridIndex {
    origin: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    starts: Vec<usize>,
    items: Vec<u32>,
}

impl GridIndex {
    fn build(sample: &Sample, reach: f64) -> Self {
        let d = sample.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (p, _) in sample.iter() {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let max_cells = (4 * sample.len()).max(1024) as f64;
        let mut cell = reach.max(1e-12);
        let dims = loop {
            let dims: Vec<usize> = (0..d).map(|k| ((hi[k] - lo[k]) / cell).floor() as usize + 1).collect();
            if dims.iter().map(|&v| v as f64).product::<f64>() <= max_cells {
                break dims;
            }
            cell *= 2.0;
        };
        let total: usize = dims.iter().product();
        let cell_of = |p: &[f64]| -> usize {
            (0..d).rev().fold(0, |acc, k| {
                let c = (((p[k] - lo[k]) / cell) as usize).min(dims[k] - 1);
                acc * dims[k] + c
            })
        };
        let mut counts = vec![0usize; total + 1];
        let cells: Vec<usize> = sample.iter().map(|(p, _)| cell_of(p)).collect();
        cells.iter().for_each(|&c| counts[c + 1] += 1);
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; sample.len()];
        for (i, &c) in cells.iter().enumerate() {
            items[fill[c]] = i as u32;
            fill[c] += 1;
        }
        Self { origin: lo, cell, dims, starts: counts, items }
    }

    /// Calls `f` with every sample index whose cell intersects the box
    /// `[x - reach, x + reach]`.
    fn for_each_near(&self, x: &[f64], reach: f64, mut f: impl FnMut(usize)) {
        let d = self.dims.len();
        let mut lo = vec![0usize; d];
        let mut hi = vec![0usize; d];
        for k in 0..d {
            let a = ((x[k] - reach - self.origin[k]) / self.cell).floor();
            let b = ((x[k] + reach - self.origin[k]) / self.cell).floor();
            if b < 0.0 || a > (self.dims[k] - 1) as f64 {
                return;
            }
            lo[k] = a.max(0.0) as usize;
            hi[k] = (b as usize).min(self.dims[k] - 1);
        }
        let mut cur = lo.clone();
        loop {
            let idx = (0..d).rev().fold(0, |acc, k| acc * self.dims[k] + cur[k]);
            for &i in &self.items[self.starts[idx]..self.starts[idx + 1]] {
                f(i as usize);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// `eta*` bound to one sample, with a spatial index so that evaluation at a
/// query point only visits points near the kernel support.
#[derive(Debug, Clone)]
pub struct LocalPolyEstimator {
    sample: Sample,
    cfg: LPConfig,
    mono: Monomials,
    index: GridIndex,
    threshold: f64,
}

impl LocalPolyEstimator {
    pub fn fit(sample: Sample, cfg: LPConfig) -> Result<Self> {
        if sample.is_empty() {
            return Err(invalid("sample must be non-empty"));
        }
        cfg.check(sample.dim())?;
        let reach = cfg.kernel.radius() * cfg.bandwidth;
        let index = GridIndex::build(&sample, reach);
        let threshold = cfg.guard.at(sample.len());
        let mono = Monomials::new(sample.dim(), cfg.order);
        Ok(Self { sample, cfg, mono, index, threshold })
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn config(&self) -> &LPConfig {
        &self.cfg
    }

    /// `(Omega, V bar)` at `x` using only nearby points.
    pub fn scaled_design(&self, x: &[f64]) -> (SymMatrix, Vec<f64>) {
        let reach = self.cfg.kernel.radius() * self.cfg.bandwidth;
        let mut acc = Accumulator::new(&self.mono, x, self.cfg.bandwidth, &self.cfg.kernel);
        self.index.for_each_near(x, reach, |i| acc.push(self.sample.point(i), self.sample.label(i)));
        acc.finish(self.sample.len())
    }

    /// `eta*(x)` in `[0, 1]`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (omega, v_bar) = self.scaled_design(x);
        guarded_value(&omega, &v_bar, self.threshold)
    }

    pub fn classify(&self, x: &[f64]) -> u8 {
        plugin_classify(|p| self.eval(p), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::KernelKind;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_sample(dim: usize, n: usize, seed: u64, label: impl Fn(&[f64], f64) -> u8) -> Sample {
        let mut rng = stream(seed, &[]);
        let mut xs = Vec::with_capacity(n * dim);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            ys.push(label(&p, rng.random()));
            xs.extend(p);
        }
        Sample::new(dim, xs, ys).unwrap()
    }

    #[test]
    fn single_point_order_zero() {
        let s = Sample::new(1, vec![0.3], vec![1]).unwrap();
        let cfg = LPConfig::new(0, 0.5, KernelSpec::uniform_ball(1)).unwrap();
        let d = build_design(&s, &[0.3], &cfg).unwrap();
        assert_eq!(d.q.as_slice(), &[0.5]);
        assert_eq!(d.v, vec![0.5]);
        assert!((lp_solve(&d).value().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_neighbourhood_is_singular() {
        let s = Sample::new(2, vec![5.0, 5.0, 6.0, 6.0], vec![1, 0]).unwrap();
        let cfg = LPConfig::new(1, 0.1, KernelSpec::uniform_ball(2)).unwrap();
        let d = build_design(&s, &[0.0, 0.0], &cfg).unwrap();
        assert!(d.q.as_slice().iter().all(|&v| v == 0.0));
        assert!(d.v.iter().all(|&v| v == 0.0));
        assert_eq!(lp_solve(&d), LpSolution::Singular);
        assert_eq!(eta_star(&s, &[0.0, 0.0], &cfg).unwrap(), 0.0);
    }

    #[test]
    fn design_matches_naive_double_loop() {
        let s = random_sample(2, 300, 11, |_, u| (u < 0.4) as u8);
        let cfg = LPConfig::new(1, 0.3, KernelSpec::uniform_ball(2)).unwrap();
        let x = [0.45, 0.6];
        let d = build_design(&s, &x, &cfg).unwrap();
        let idx = enumerate_multiindices(2, 1);
        for (a, sa) in idx.iter().enumerate() {
            for (b, sb) in idx.iter().enumerate() {
                let mut want = 0.0;
                let mut want_omega = 0.0;
                for (p, _) in s.iter() {
                    let diff = [p[0] - x[0], p[1] - x[1]];
                    let w = cfg.kernel.eval(&[diff[0] / 0.3, diff[1] / 0.3]);
                    want += sa.add(sb).monomial(&diff) * w;
                    want_omega += sa.add(sb).monomial(&[diff[0] / 0.3, diff[1] / 0.3]) * w;
                }
                assert!((d.q.get(a, b) - want).abs() <= 1e-12 * want.abs().max(1.0));
                let want_omega = want_omega / (300.0 * 0.09);
                assert!((d.omega_bar.get(a, b) - want_omega).abs() <= 1e-12 * want_omega.abs().max(1.0));
            }
        }
        assert!(d.q.is_symmetric(0.0) && d.omega_bar.is_symmetric(1e-15));
        // indexed path agrees with the direct pass
        let est = LocalPolyEstimator::fit(s.clone(), cfg.clone()).unwrap();
        let (omega, vb) = est.scaled_design(&x);
        for (g, w) in omega.as_slice().iter().zip(d.omega_bar.as_slice()) {
            assert!((g - w).abs() < 1e-12);
        }
        for (g, w) in vb.iter().zip(&d.v_bar) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn order_zero_is_nadaraya_watson() {
        let s = random_sample(1, 200, 3, |p, u| (u < p[0]) as u8);
        let cfg = LPConfig::new(0, 0.2, KernelSpec::new(KernelKind::SmoothBump, 1, 1.0).unwrap()).unwrap();
        let x = [0.4];
        let (mut num, mut den) = (0.0, 0.0);
        for (p, y) in s.iter() {
            let w = cfg.kernel.eval(&[(p[0] - x[0]) / 0.2]);
            num += y as f64 * w;
            den += w;
        }
        let got = lp_solve(&build_design(&s, &x, &cfg).unwrap()).value().unwrap();
        assert!((got - num / den).abs() < 1e-12);
    }

    #[test]
    fn affine_data_is_reproduced() {
        // Y must be in {0,1} for a Sample, so check reproduction on Q/V directly.
        let mut rng = stream(5, &[]);
        let pts: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let (a, b, x) = (0.2, 0.5, 0.37);
        let cfg = LPConfig::new(1, 0.5, KernelSpec::uniform_ball(1)).unwrap();
        let s = Sample::new(1, pts.clone(), vec![0; 50]).unwrap();
        let mut d = build_design(&s, &[x], &cfg).unwrap();
        d.v = vec![0.0; 2];
        for &p in &pts {
            let w = cfg.kernel.eval(&[(p - x) / 0.5]);
            let y = a + b * p;
            d.v[0] += y * w;
            d.v[1] += y * w * (p - x);
        }
        let got = lp_solve(&d).value().unwrap();
        assert!((got - (a + b * x)).abs() < 1e-8);
    }

    #[test]
    fn guard_trips_on_identical_points() {
        let s = Sample::new(2, [0.5, 0.5].repeat(40), vec![1; 40]).unwrap();
        for order in 1..=2 {
            let cfg = LPConfig::new(order, 0.3, KernelSpec::uniform_ball(2)).unwrap();
            let d = build_design(&s, &[0.5, 0.5], &cfg).unwrap();
            assert!(jacobi_eigen(&d.omega_bar, EIGEN_TOL).min() <= cfg.guard.at(40));
            assert_eq!(eta_star(&s, &[0.5, 0.5], &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn clipping_to_unit_interval() {
        // Omega = I, V bar = (1.3, 0) gives a raw value of 1.3
        let omega = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(guarded_value(&omega, &[1.3, 0.0], 0.1), 1.0);
        assert_eq!(guarded_value(&omega, &[-0.2, 0.0], 0.1), 0.0);
        // tie at the threshold takes the guard branch
        assert_eq!(guarded_value(&omega, &[0.7, 0.0], 1.0), 0.0);
    }

    #[test]
    fn constant_eta_dense_sample() {
        let n = 4000;
        let s = random_sample(1, n, 21, |_, u| (u < 0.7) as u8);
        let cfg = LPConfig::new(0, 0.1, KernelSpec::uniform_ball(1)).unwrap();
        let x = [0.5];
        let got = eta_star(&s, &x, &cfg).unwrap();
        let local: Vec<u8> = s.iter().filter(|(p, _)| (p[0] - 0.5).abs() <= 0.1).map(|(_, y)| y).collect();
        let nw = local.iter().map(|&y| y as f64).sum::<f64>() / local.len() as f64;
        assert!((got - nw).abs() < 1e-12);
        let se = (0.7 * 0.3 / local.len() as f64).sqrt();
        assert!((got - 0.7).abs() < 3.0 * se);
    }

    #[test]
    fn bandwidth_rule() {
        let spec = HolderSpec::new(1.0, 1.0, 1).unwrap();
        assert!((default_bandwidth(1024, &spec) - 0.099_212_565).abs() < 1e-8);
        assert_eq!(default_bandwidth(1, &spec), 1.0);
        let spec2 = HolderSpec::new(2.0, 1.0, 2).unwrap();
        assert!((default_bandwidth(4096, &spec2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn plugin_rule_boundary() {
        assert_eq!(plugin_classify(|_| 0.5, &[0.0]), 1);
        assert_eq!(plugin_classify(|_| 0.49, &[0.0]), 0);
        assert_eq!(plugin_classify(|_| 0.0, &[3.0]), 0);
    }

    #[test]
    fn guard_threshold_floor() {
        let g = GuardThreshold::default();
        assert_eq!(g.at(1), GUARD_FLOOR);
        assert_eq!(g.at(2), GUARD_FLOOR);
        assert!((g.at(100) - 1.0 / 100f64.ln()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn eta_star_in_unit_interval_and_translation_equivariant(
            seed in 0u64..1000, shift in -5.0f64..5.0, order in 0u32..=2, xq in 0.0f64..1.0
        ) {
            let s = random_sample(2, 150, seed, |p, u| (u < p[0]) as u8);
            let cfg = LPConfig::new(order, 0.35, KernelSpec::new(KernelKind::UniformBall, 2, 2.0).unwrap()).unwrap();
            let x = [xq, 0.5];
            let v = eta_star(&s, &x, &cfg).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            let shifted = Sample::new(2, s.coords().iter().map(|c| c + shift).collect(), s.labels().to_vec()).unwrap();
            let v2 = eta_star(&shifted, &[x[0] + shift, x[1] + shift], &cfg).unwrap();
            prop_assert!((v - v2).abs() < 1e-10);
            let est = LocalPolyEstimator::fit(s, cfg).unwrap();
            prop_assert!((est.eval(&x) - v).abs() < 1e-12);
        }
    }
}
