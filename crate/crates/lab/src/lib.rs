//! Experiment runner for `macroreal-core`: JSON formats, scenario configs,
//! reports and the acceptance suite behind the `macroreal` CLI.

// `!(x <= bound)` is used deliberately so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod formats;
pub mod parallel;
pub mod render;
pub mod report;
pub mod suite;

pub use config::ScenarioConfig;
pub use error::{LabError, LabResult};
pub use report::{Check, Report};
pub use suite::{run_scenario, verify_all, SuiteReport};

/// `folded_tree(k)` or `simple_tree(k)`.
pub fn anticommute_family(k: usize, folded: bool) -> LabResult<macroreal_core::anticommute::OperatorFamily> {
    use macroreal_core::anticommute::{folded_tree, simple_tree};
    Ok(if folded { folded_tree(k)? } else { simple_tree(k)? })
}
