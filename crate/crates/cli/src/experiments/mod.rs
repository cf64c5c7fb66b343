mod bounds;
mod common;
mod concentration;
mod corridor;
mod lower_bound;
mod margin;
mod rates;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::{CliError, Outcome, RunOptions};

pub fn dispatch(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    match cfg.experiment {
        ExperimentKind::Rates => rates::run_rates(cfg, opts),
        ExperimentKind::SieveVsPlugin => rates::run_sieve_vs_plugin(cfg, opts),
        ExperimentKind::Corridor => corridor::run_corridor(cfg, opts),
        ExperimentKind::Concentration => concentration::run_concentration(cfg, opts),
        ExperimentKind::MarginCheck => margin::run_margin_check(cfg, opts),
        ExperimentKind::LowerBound => lower_bound::run_lower_bound(cfg, opts),
        ExperimentKind::CompareBounds => bounds::run_compare_bounds(cfg, opts),
    }
}
