use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{ball_rule, uniform_in_ball, Declared, DistributionDescriptor, QuadratureRule, SyntheticDistribution};
use crate::error::{Error, Result};
use crate::math::{bump_u_derivative, bump_u_max_curvature, bump_u_max_slope, enumerate_multiindices, unit_ball_volume, MultiIndex};

/// Region carrying the residual mass `1 - m w`, on which `eta = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum A0Mode {
    /// `[0,1]^d` minus the `m` active cells.
    #[default]
    CubeComplement,
    /// Ball of radius 1/2 centred at `(-1, 1/2, ..., 1/2)`, disjoint from the cube.
    OutsideBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypercubeParams {
    pub d: usize,
    pub q: usize,
    pub m: usize,
    pub w: f64,
    pub beta: f64,
    #[serde(default = "default_c_phi")]
    pub c_phi: f64,
    /// Defaults to all `+1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<i8>>,
    #[serde(default)]
    pub a0: A0Mode,
    /// Margin exponent to declare; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Hölder constant to declare; defaults to a bound computed from `c_phi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

fn default_c_phi() -> f64 {
    0.5
}

/// Tunable constants of the regime builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConstants {
    pub c_bar: f64,
    pub c_prime: f64,
    pub c_second: f64,
    pub c_phi: f64,
}

impl Default for RegimeConstants {
    fn default() -> Self {
        Self { c_bar: 1.0, c_prime: 0.5, c_second: 1.0, c_phi: 0.5 }
    }
}

/// Hölder constant of `x -> (C_phi/2) q^{-beta} u(q ||x - z||)` summed over
/// cells, valid for every `q`. Needs `beta <= 2`.
pub fn hypercube_holder_constant(beta: f64, c_phi: f64) -> Option<f64> {
    let m1 = bump_u_max_slope();
    if beta <= 1.0 {
        return Some(c_phi * (m1 / 2.0).powf(beta));
    }
    if beta > 2.0 {
        return None;
    }
    // Remainder in units s = q ||x - x'|| is below min(m2 s^2/4, 1 + m1 s/2)
    // times C_phi q^{-beta}; the sup of that over s^beta sits at the crossing.
    let m2 = bump_u_max_curvature().max(4.0 * m1) * 1.01;
    let s = (m1 / 2.0 + (m1 * m1 / 4.0 + m2).sqrt()) / (m2 / 2.0);
    Some(c_phi * (1.0 + m1 * s / 2.0) / s.powf(beta))
}

/// The hypercube family: `m` balls of radius `1/(4q)` at the first `m`
/// cell centres of the grid `G_q`, each of mass `w`, with
/// `eta = (1 + sigma_j phi)/2` on cell `j` and `eta = 1/2` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeDistribution {
    params: HypercubeParams,
    sigma: Vec<i8>,
    alpha: f64,
    lipschitz: f64,
    radius: f64,
    ball_density: f64,
    a0_density: f64,
    cells: usize,
}

fn violated(msg: String) -> Error {
    Error::Validation(msg)
}

impl HypercubeDistribution {
    pub fn new(params: HypercubeParams) -> Result<Self> {
        let HypercubeParams { d, q, m, w, beta, c_phi, .. } = params;
        if d == 0 || d > 3 {
            return Err(violated(format!("1 <= d <= 3 violated: d = {d}")));
        }
        if q == 0 {
            return Err(violated("q >= 1 violated: q = 0".into()));
        }
        let cells = q
            .checked_pow(d as u32)
            .filter(|&c| c <= 1 << 24)
            .ok_or_else(|| violated(format!("q^d <= 2^24 violated: q = {q}, d = {d}")))?;
        if m == 0 || m > cells {
            return Err(violated(format!("1 <= m <= q^d violated: m = {m}, q^d = {cells}")));
        }
        if !(w > 0.0 && w * m as f64 <= 1.0 + 1e-12) {
            return Err(violated(format!("0 < w <= 1/m violated: w = {w}, 1/m = {}", 1.0 / m as f64)));
        }
        if !(c_phi > 0.0 && c_phi <= 1.0) {
            return Err(violated(format!("0 < C_phi <= 1 violated: C_phi = {c_phi}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(violated(format!("beta > 0 violated: beta = {beta}")));
        }
        let sigma = params.sigma.clone().unwrap_or_else(|| vec![1; m]);
        if sigma.len() != m {
            return Err(violated(format!("|sigma| = m violated: |sigma| = {}, m = {m}", sigma.len())));
        }
        if sigma.iter().any(|&s| s != 1 && s != -1) {
            return Err(violated("sigma entries in {-1, +1} violated".into()));
        }
        let alpha = params.alpha.unwrap_or(1.0);
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(violated(format!("alpha >= 0 violated: alpha = {alpha}")));
        }
        let lipschitz = match params.lipschitz {
            Some(l) if l > 0.0 => l,
            Some(l) => return Err(violated(format!("L > 0 violated: L = {l}"))),
            None => hypercube_holder_constant(beta, c_phi)
                .ok_or_else(|| Error::UnsupportedClass(format!("no Hölder bound for beta = {beta} > 2; pass lipschitz")))?,
        };
        let radius = 1.0 / (4.0 * q as f64);
        let ball_density = w / (unit_ball_volume(d) * radius.powi(d as i32));
        let rest = (1.0 - m as f64 * w).max(0.0);
        let a0_volume = match params.a0 {
            A0Mode::CubeComplement => (cells - m) as f64 / cells as f64,
            A0Mode::OutsideBall => unit_ball_volume(d) * 0.5f64.powi(d as i32),
        };
        if rest > 1e-12 && a0_volume <= 0.0 {
            return Err(violated(format!(
                "lambda(A0) > 0 when m w < 1 violated: m = q^d = {m} leaves no cube complement"
            )));
        }
        let a0_density = if rest > 1e-12 { rest / a0_volume } else { 0.0 };
        Ok(Self { params, sigma, alpha, lipschitz, radius, ball_density, a0_density, cells })
    }

    /// `q = floor(c_bar n^{1/(2 beta + d)})`, `w = c' q^{-d}`,
    /// `m = floor(c'' q^{d - alpha beta})`, residual mass on the cube complement.
    pub fn strong_density_regime(n: usize, d: usize, alpha: f64, beta: f64, k: &RegimeConstants) -> Result<Self> {
        if alpha * beta > d as f64 {
            return Err(violated(format!("alpha beta <= d violated: alpha beta = {}, d = {d}", alpha * beta)));
        }
        let q = (k.c_bar * (n as f64).powf(1.0 / (2.0 * beta + d as f64))).floor() as usize;
        let qf = q as f64;
        let w = k.c_prime * qf.powi(-(d as i32));
        let m = (k.c_second * qf.powf(d as f64 - alpha * beta)).floor() as usize;
        Self::check_margin_mass(m, w, q, alpha, beta)?;
        Self::new(HypercubeParams {
            d,
            q,
            m,
            w,
            beta,
            c_phi: k.c_phi,
            sigma: None,
            a0: A0Mode::CubeComplement,
            alpha: Some(alpha),
            lipschitz: None,
        })
    }

    /// `q = floor(c_bar n^{1/((2+alpha) beta + d)})`, `w = c' q^{2 beta}/n`,
    /// `m = q^d`, residual mass on a ball outside the cube.
    pub fn mild_density_regime(n: usize, d: usize, alpha: f64, beta: f64, k: &RegimeConstants) -> Result<Self> {
        let q = (k.c_bar * (n as f64).powf(1.0 / ((2.0 + alpha) * beta + d as f64))).floor() as usize;
        let m = q.pow(d as u32);
        let w = k.c_prime * (q as f64).powf(2.0 * beta) / n as f64;
        Self::check_margin_mass(m, w, q, alpha, beta)?;
        Self::new(HypercubeParams {
            d,
            q,
            m,
            w,
            beta,
            c_phi: k.c_phi,
            sigma: None,
            a0: A0Mode::OutsideBall,
            alpha: Some(alpha),
            lipschitz: None,
        })
    }

    fn check_margin_mass(m: usize, w: f64, q: usize, alpha: f64, beta: f64) -> Result<()> {
        if q == 0 {
            return Err(violated("q >= 1 violated: q = 0 (increase n or c_bar)".into()));
        }
        let bound = (q as f64).powf(-alpha * beta);
        if m as f64 * w > bound * (1.0 + 1e-12) {
            return Err(violated(format!("m w <= q^(-alpha beta) violated: m w = {}, bound = {bound}", m as f64 * w)));
        }
        Ok(())
    }

    /// Same law with a different sign vector.
    pub fn with_sigma(&self, sigma: Vec<i8>) -> Result<Self> {
        let mut p = self.params.clone();
        p.sigma = Some(sigma);
        p.lipschitz = Some(self.lipschitz);
        p.alpha = Some(self.alpha);
        Self::new(p)
    }

    pub fn params(&self) -> &HypercubeParams {
        &self.params
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn w(&self) -> f64 {
        self.params.w
    }

    pub fn sigma(&self) -> &[i8] {
        &self.sigma
    }

    pub fn ball_radius(&self) -> f64 {
        self.radius
    }

    /// `C_phi q^{-beta}`, the value of `|2 eta - 1|` on every support ball.
    pub fn ball_gap(&self) -> f64 {
        self.params.c_phi * (self.params.q as f64).powf(-self.params.beta)
    }

    /// `C_phi / (2 q^beta)`.
    pub fn margin_threshold(&self) -> f64 {
        self.params.c_phi / (2.0 * (self.params.q as f64).powf(self.params.beta))
    }

    /// Realized `(min, max)` of the density over the support.
    pub fn density_bounds(&self) -> (f64, f64) {
        if self.a0_density > 0.0 {
            (self.ball_density.min(self.a0_density), self.ball_density.max(self.a0_density))
        } else {
            (self.ball_density, self.ball_density)
        }
    }

    /// Centre of grid cell `j`; the first coordinate varies fastest.
    pub fn center(&self, j: usize) -> Vec<f64> {
        let q = self.params.q;
        let mut r = j;
        (0..self.params.d)
            .map(|_| {
                let k = r % q;
                r /= q;
                (2 * k + 1) as f64 / (2 * q) as f64
            })
            .collect()
    }

    /// Grid cell containing `x`, if `x` lies in the cube.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let q = self.params.q;
        let mut j = 0;
        let mut stride = 1;
        for &v in x {
            if !(0.0..=1.0).contains(&v) {
                return None;
            }
            let k = ((v * q as f64).ceil() as usize).saturating_sub(1).min(q - 1);
            j += k * stride;
            stride *= q;
        }
        Some(j)
    }

    fn active_cell(&self, x: &[f64]) -> Option<(usize, f64)> {
        let j = self.cell_of(x)?;
        if j >= self.params.m {
            return None;
        }
        let z = self.center(j);
        let r = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Some((j, r))
    }

    /// Index of the support ball containing `x`.
    pub fn ball_of(&self, x: &[f64]) -> Option<usize> {
        self.active_cell(x).filter(|&(_, r)| r <= self.radius * (1.0 + 1e-12)).map(|(j, _)| j)
    }

    fn in_a0(&self, x: &[f64]) -> bool {
        match self.params.a0 {
            A0Mode::CubeComplement => self.cell_of(x).is_some_and(|j| j >= self.params.m),
            A0Mode::OutsideBall => {
                let c = self.a0_center();
                x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= 0.25
            }
        }
    }

    fn a0_center(&self) -> Vec<f64> {
        let mut c = vec![0.5; self.params.d];
        c[0] = -1.0;
        c
    }

    /// Rule integrating against the uniform law on support ball `j` with
    /// total weight `w`.
    pub fn ball_quadrature(&self, j: usize, budget: usize) -> QuadratureRule {
        let mut rule = QuadratureRule::new(self.params.d);
        ball_rule(&self.center(j), self.radius, self.params.w, budget, &mut rule).expect("d <= 3");
        rule
    }

    fn a0_quadrature(&self, budget: usize, rule: &mut QuadratureRule) {
        let rest = 1.0 - self.params.m as f64 * self.params.w;
        if rest <= 1e-12 {
            return;
        }
        match self.params.a0 {
            A0Mode::OutsideBall => {
                ball_rule(&self.a0_center(), 0.5, rest, budget, rule).expect("d <= 3");
            }
            A0Mode::CubeComplement => {
                let d = self.params.d;
                let free = self.cells - self.params.m;
                let k = ((budget as f64 / free as f64).powf(1.0 / d as f64).floor() as usize).max(1);
                let nodes = k.pow(d as u32);
                let wt = rest / (free * nodes) as f64;
                let h = 1.0 / (self.params.q * k) as f64;
                for j in self.params.m..self.cells {
                    let z = self.center(j);
                    for i in 0..nodes {
                        let mut r = i;
                        let x: Vec<f64> = z
                            .iter()
                            .map(|&c| {
                                let off = (r % k) as f64;
                                r /= k;
                                c - 0.5 / self.params.q as f64 + (off + 0.5) * h
                            })
                            .collect();
                        rule.push(&x, wt);
                    }
                }
            }
        }
    }
}

impl SyntheticDistribution for HypercubeDistribution {
    fn dim(&self) -> usize {
        self.params.d
    }

    fn name(&self) -> &'static str {
        "hypercube"
    }

    fn eta(&self, x: &[f64]) -> f64 {
        match self.active_cell(x) {
            Some((j, r)) => {
                let q = self.params.q as f64;
                let phi = self.ball_gap() * crate::math::bump::bump_u_unchecked(q * r);
                0.5 * (1.0 + self.sigma[j] as f64 * phi)
            }
            None => 0.5,
        }
    }

    fn density(&self, x: &[f64]) -> f64 {
        if self.ball_of(x).is_some() {
            self.ball_density
        } else if self.in_a0(x) {
            self.a0_density
        } else {
            0.0
        }
    }

    fn sample_x(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let (m, w) = (self.params.m, self.params.w);
        let u: f64 = rng.random();
        if u < m as f64 * w || self.a0_density == 0.0 {
            let j = ((u / w) as usize).min(m - 1);
            return uniform_in_ball(&self.center(j), self.radius, rng);
        }
        match self.params.a0 {
            A0Mode::OutsideBall => uniform_in_ball(&self.a0_center(), 0.5, rng),
            A0Mode::CubeComplement => {
                // Direct draw: a uniform inactive cell, then a uniform point in it.
                let j = rng.random_range(m..self.cells);
                let h = 1.0 / self.params.q as f64;
                self.center(j).into_iter().map(|c| c - 0.5 * h + h * rng.random::<f64>()).collect()
            }
        }
    }

    fn margin_mass(&self, t: f64) -> f64 {
        if t >= self.margin_threshold() {
            self.params.m as f64 * self.params.w
        } else {
            0.0
        }
    }

    fn declared(&self) -> Declared {
        let q = self.params.q as f64;
        let c0 = self.params.m as f64 * self.params.w * (2.0 * q.powf(self.params.beta) / self.params.c_phi).powf(self.alpha);
        Declared { alpha: self.alpha, c0, beta: self.params.beta, lipschitz: self.lipschitz }
    }

    fn eta_derivatives(&self, x: &[f64], order: u32) -> Option<BTreeMap<MultiIndex, f64>> {
        if order > 1 {
            return None;
        }
        let d = self.params.d;
        let mut out: BTreeMap<MultiIndex, f64> = enumerate_multiindices(d, order).into_iter().map(|s| (s, 0.0)).collect();
        out.insert(MultiIndex::zero(d), self.eta(x));
        if order == 1 {
            if let Some((j, r)) = self.active_cell(x) {
                if r > 0.0 {
                    let q = self.params.q as f64;
                    let z = self.center(j);
                    let scale = 0.5 * self.sigma[j] as f64 * self.ball_gap() * q * bump_u_derivative(q * r) / r;
                    for k in 0..d {
                        let mut e = vec![0u32; d];
                        e[k] = 1;
                        out.insert(MultiIndex::new(e), scale * (x[k] - z[k]));
                    }
                }
            }
        }
        Some(out)
    }

    fn quadrature(&self, budget: usize) -> Option<QuadratureRule> {
        let per_ball = (budget / (2 * self.params.m)).max(16);
        let mut rule = QuadratureRule::new(self.params.d);
        for j in 0..self.params.m {
            let b = self.ball_quadrature(j, per_ball);
            rule.nodes.extend(b.nodes);
            rule.weights.extend(b.weights);
        }
        self.a0_quadrature(budget / 2, &mut rule);
        Some(rule)
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; self.params.d];
        if self.params.a0 == A0Mode::OutsideBall {
            lo[0] = -1.5;
        }
        (lo, vec![1.0; self.params.d])
    }

    fn describe(&self) -> DistributionDescriptor {
        let mut p = self.params.clone();
        p.sigma = Some(self.sigma.clone());
        p.alpha = Some(self.alpha);
        p.lipschitz = Some(self.lipschitz);
        DistributionDescriptor::Hypercube(p)
    }

    fn as_hypercube(&self) -> Option<&HypercubeDistribution> {
        Some(self)
    }

    fn eta_range_on_box(&self, lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
        let d = self.params.d;
        let q = self.params.q;
        let mut out: Option<(f64, f64)> = None;
        let mut include = |v: f64| {
            out = Some(match out {
                Some((a, b)) => (a.min(v), b.max(v)),
                None => (v, v),
            })
        };
        if self.params.a0 == A0Mode::OutsideBall && self.a0_density > 0.0 && box_meets_ball(lo, hi, &self.a0_center(), 0.5) {
            include(0.5);
        }
        // Grid cells overlapping the box.
        let mut first = vec![0usize; d];
        let mut last = vec![0usize; d];
        for k in 0..d {
            let (a, b) = (lo[k].max(0.0), hi[k].min(1.0));
            if a > b {
                return out;
            }
            first[k] = ((a * q as f64).floor() as usize).min(q - 1);
            last[k] = (((b * q as f64).ceil() as usize).max(1) - 1).min(q - 1).max(first[k]);
        }
        let mut idx = first.clone();
        loop {
            let j = idx.iter().rev().fold(0, |acc, &k| acc * q + k);
            if j < self.params.m {
                if box_meets_ball(lo, hi, &self.center(j), self.radius) {
                    include(0.5 * (1.0 + self.sigma[j] as f64 * self.ball_gap()));
                }
            } else if self.params.a0 == A0Mode::CubeComplement && self.a0_density > 0.0 {
                include(0.5);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return out;
                }
                if idx[k] < last[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = first[k];
                k += 1;
            }
        }
    }
}

fn box_meets_ball(lo: &[f64], hi: &[f64], c: &[f64], r: f64) -> bool {
    let dist2: f64 = c.iter().zip(lo.iter().zip(hi)).map(|(&x, (&a, &b))| (x - x.clamp(a, b)).powi(2)).sum();
    dist2 < r * r
}
