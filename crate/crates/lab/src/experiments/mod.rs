//! One module per experiment kind. Each returns its records, summary and
//! checks; the checks only read the records.

mod budget;
mod chsh;
mod membership;
mod pipeline;
mod pq;
mod tree;
mod werner;
mod zb;

use rand::Rng;

use macroreal_core::random::{random_mixed, random_pure};
use macroreal_core::state::AnyState;

use crate::config::Experiment;
use crate::error::LabResult;
use crate::report::Outcome;

pub use pipeline::{pipeline_trial, PipelineTrial};
pub use zb::ZbCsvRow;

/// Runs every kind except `determinism`, which needs the suite.
pub fn run_experiment(experiment: &Experiment, seed: u64) -> LabResult<Outcome> {
    match experiment {
        Experiment::ZbSweep(p) => zb::run(p, seed),
        Experiment::PqCheck(p) => pq::run(p, seed),
        Experiment::TreeBuild(p) => tree::run(p, seed),
        Experiment::StrategyPipeline(p) => pipeline::run(p, seed),
        Experiment::WernerThresholds(p) => werner::run(p, seed),
        Experiment::Chsh(p) => chsh::run(p, seed),
        Experiment::Membership(p) => membership::run(p, seed),
        Experiment::Budget(p) => budget::run(p),
        Experiment::Determinism(p) => crate::suite::run_determinism(p, seed),
    }
}

/// Haar pure state for rank 1, Ginibre mixed state of that rank otherwise.
pub(crate) fn random_state<R: Rng + ?Sized>(qubits: usize, rank: usize, rng: &mut R) -> LabResult<AnyState> {
    Ok(if rank == 1 {
        AnyState::Pure(random_pure(qubits, rng)?)
    } else {
        AnyState::Mixed(random_mixed(qubits, rank, rng)?)
    })
}
