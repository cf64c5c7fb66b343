//! Experiment configuration: JSON schema, per-experiment defaults and
//! validation.

use std::path::Path;

use margin_rates::distributions::{A0Mode, DistributionDescriptor, HypercubeParams};
use margin_rates::lp_estimator::GuardThreshold;
use margin_rates::math::KernelKind;
use margin_rates::risk::ProbePoint;
use margin_rates::sieve::NormIndex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Rates,
    Concentration,
    MarginCheck,
    LowerBound,
    CompareBounds,
    SieveVsPlugin,
    Corridor,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Concentration => "concentration",
            Self::MarginCheck => "margin-check",
            Self::LowerBound => "lower-bound",
            Self::CompareBounds => "compare-bounds",
            Self::SieveVsPlugin => "sieve-vs-plugin",
            Self::Corridor => "corridor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BandwidthRule {
    /// `scale * n^{-1/(2 beta + d)}`.
    Holder { scale: f64 },
    /// The same `h` for every `n`.
    Fixed { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    /// Plug-in rule of the local polynomial estimator.
    Plugin,
    /// Hybrid plug-in/ERM rule over an epsilon-net.
    Sieve,
    /// Bayes rule of the all-plus hypercube law.
    BayesPlus,
    Constant0,
    Constant1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub classifier: ClassifierKind,
    /// Smoothness assumed by the estimator; defaults to the declared one.
    pub beta: Option<f64>,
    pub lipschitz: Option<f64>,
    /// Polynomial order; defaults to the largest integer below `beta`.
    pub order: Option<u32>,
    pub bandwidth: BandwidthRule,
    pub kernel: KernelConfig,
    pub guard: GuardThreshold,
    /// Norm of the sieve net.
    pub p: NormIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RiskConfig {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Allowed `|slope + theoretical|`.
    pub slope: f64,
    /// Sieve-vs-plugin: plug-in slope may exceed the sieve slope by this much.
    pub slope_gap: f64,
    /// Width of SE-aware gates, in standard errors.
    pub sigmas: f64,
    /// Corridor: largest allowed excess at the largest `n`.
    pub excess: f64,
    /// Concentration: required upper bound on the Spearman correlation.
    pub spearman: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { slope: 0.15, slope_gap: 0.1, sigmas: 3.0, excess: 1e-3, spearman: -0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub x: Vec<f64>,
    pub grid: Vec<ProbePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginConfig {
    /// Explicit `t` values; the hypercube step point is always added.
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub trials: usize,
    /// Laws cycled through by the trials.
    pub distributions: Vec<DistributionDescriptor>,
    /// Cells per axis of the random piecewise-constant `eta bar`.
    pub cells_per_axis: usize,
    /// Largest perturbation amplitude.
    pub max_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub distribution: DistributionDescriptor,
    pub estimator: EstimatorConfig,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    /// Quadrature nodes, Monte Carlo draws or per-ball nodes, by risk method.
    pub mc_budget: usize,
    pub risk: RiskConfig,
    pub seed: u64,
    pub workers: usize,
    pub tolerance: Tolerance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<MarginConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

fn estimator(kind: KernelKind, radius: f64, bandwidth: BandwidthRule) -> EstimatorConfig {
    EstimatorConfig {
        classifier: ClassifierKind::Plugin,
        beta: None,
        lipschitz: None,
        order: None,
        bandwidth,
        kernel: KernelConfig { kind, radius },
        guard: GuardThreshold::default(),
        p: NormIndex::Infinity,
    }
}

fn small_cube() -> HypercubeParams {
    HypercubeParams {
        d: 2,
        q: 4,
        m: 6,
        w: 0.1,
        beta: 1.0,
        c_phi: 0.5,
        sigma: None,
        a0: A0Mode::CubeComplement,
        alpha: None,
        lipschitz: None,
    }
}

impl ExperimentConfig {
    pub fn default_for(kind: ExperimentKind) -> Self {
        let holder = BandwidthRule::Holder { scale: 1.0 };
        let base = Self {
            experiment: kind,
            distribution: DistributionDescriptor::Ball { d: 2, curvature: 0.25 },
            estimator: estimator(KernelKind::UniformBall, 1.0, holder),
            n_grid: powers_of_two(8, 13),
            replicates: 50,
            mc_budget: 2048,
            risk: RiskConfig::Quadrature,
            seed: 1,
            workers: 1,
            tolerance: Tolerance::default(),
            concentration: None,
            margin: None,
            compare: None,
        };
        match kind {
            ExperimentKind::Rates => Self { estimator: estimator(KernelKind::UniformBall, 1.8, holder), ..base },
            ExperimentKind::SieveVsPlugin => Self {
                distribution: DistributionDescriptor::Crossing { slope: 0.75, x0: 0.6 },
                mc_budget: 4096,
                ..base
            },
            ExperimentKind::Corridor => Self {
                distribution: DistributionDescriptor::Corridor { gap: 0.25, slope: 0.25, alpha: 1.0 },
                estimator: estimator(KernelKind::UniformBall, 1.0, BandwidthRule::Fixed { h: 0.1 }),
                n_grid: powers_of_two(6, 12),
                replicates: 20,
                mc_budget: 4096,
                ..base
            },
            ExperimentKind::Concentration => Self {
                distribution: DistributionDescriptor::Ball { d: 1, curvature: 0.25 },
                estimator: EstimatorConfig { order: Some(0), ..estimator(KernelKind::UniformBall, 1.0, BandwidthRule::Fixed { h: 0.1 }) },
                n_grid: vec![],
                replicates: 500,
                concentration: Some(ConcentrationConfig {
                    x: vec![0.3],
                    grid: powers_of_two(7, 12).into_iter().map(|n| ProbePoint { n, h: 0.1, delta: 0.05 }).collect(),
                }),
                ..base
            },
            ExperimentKind::MarginCheck => Self {
                distribution: DistributionDescriptor::Hypercube(small_cube()),
                n_grid: vec![],
                replicates: 1,
                mc_budget: 100_000,
                margin: Some(MarginConfig { t_grid: (0..12).map(|k| 10f64.powf(-3.0 + 3.0 * k as f64 / 11.0)).collect() }),
                ..base
            },
            ExperimentKind::LowerBound => Self {
                distribution: DistributionDescriptor::Hypercube(HypercubeParams {
                    d: 1,
                    q: 8,
                    m: 4,
                    w: 0.1,
                    a0: A0Mode::CubeComplement,
                    ..small_cube()
                }),
                estimator: estimator(KernelKind::UniformBall, 1.0, BandwidthRule::Fixed { h: 0.125 }),
                n_grid: vec![25],
                replicates: 50,
                mc_budget: 256,
                risk: RiskConfig::ClosedForm,
                ..base
            },
            ExperimentKind::CompareBounds => Self {
                n_grid: vec![],
                replicates: 1,
                mc_budget: 4096,
                compare: Some(CompareConfig {
                    trials: 1000,
                    distributions: vec![
                        DistributionDescriptor::Ball { d: 2, curvature: 0.25 },
                        DistributionDescriptor::Corridor { gap: 0.25, slope: 0.25, alpha: 1.0 },
                        DistributionDescriptor::Crossing { slope: 0.75, x0: 0.6 },
                        DistributionDescriptor::Hypercube(small_cube()),
                    ],
                    cells_per_axis: 8,
                    max_noise: 0.3,
                }),
                ..base
            },
        }
    }

    /// Loads a config, filling absent keys from the defaults of `kind`.
    pub fn load(kind: ExperimentKind, path: Option<&Path>) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(Self::default_for(kind)).expect("defaults serialize");
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !user.is_object() {
                return Err(CliError::Config("config must be a JSON object".into()));
            }
            merge(&mut value, user);
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.experiment != kind {
            return Err(CliError::Config(format!(
                "config is for experiment \"{}\" but subcommand is \"{}\"",
                cfg.experiment.name(),
                kind.name()
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if self.n_grid.first() == Some(&0) {
            return bad("n_grid entries must be >= 1".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if self.mc_budget < 2 {
            return bad("mc_budget must be >= 2".into());
        }
        match self.estimator.bandwidth {
            BandwidthRule::Holder { scale } if !(scale > 0.0) => return bad("bandwidth scale must be positive".into()),
            BandwidthRule::Fixed { h } if !(h > 0.0) => return bad("fixed bandwidth must be positive".into()),
            _ => {}
        }
        let needs_grid = matches!(
            self.experiment,
            ExperimentKind::Rates | ExperimentKind::SieveVsPlugin | ExperimentKind::Corridor | ExperimentKind::LowerBound
        );
        if needs_grid && self.n_grid.is_empty() {
            return bad("n_grid must be non-empty".into());
        }
        Ok(())
    }
}

/// Recursive merge of JSON objects; `distribution` and arrays are replaced.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if k != "distribution" && slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::ValueEnum;

    #[test]
    fn defaults_round_trip_and_validate() {
        for kind in ExperimentKind::value_variants() {
            let cfg = ExperimentConfig::default_for(*kind);
            cfg.validate().unwrap();
            let json = serde_json::to_string(&cfg).unwrap();
            let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn partial_configs_merge_onto_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"replicates": 3, "estimator": {"kernel": {"radius": 2.0}}, "tolerance": {"slope": 0.2}}"#).unwrap();
        let cfg = ExperimentConfig::load(ExperimentKind::Rates, Some(&p)).unwrap();
        assert_eq!(cfg.replicates, 3);
        assert_eq!(cfg.estimator.kernel.radius, 2.0);
        assert_eq!(cfg.estimator.kernel.kind, KernelKind::UniformBall);
        assert_eq!(cfg.tolerance.slope, 0.2);
        assert_eq!(cfg.tolerance.sigmas, 3.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        for text in [
            r#"{"n_grid": [512, 256]}"#,
            r#"{"replicates": 0}"#,
            r#"{"experiment": "corridor"}"#,
            r#"{"bogus": 1}"#,
            r#"[1, 2]"#,
            r#"{"seed": -1}"#,
        ] {
            std::fs::write(&p, text).unwrap();
            assert!(matches!(ExperimentConfig::load(ExperimentKind::Rates, Some(&p)), Err(CliError::Config(_))), "{text}");
        }
    }
}
