use std::f64::consts::SQRT_2;

use macroreal_core::bell::chsh_optimize;
use macroreal_core::criteria::{correlation_tensor, zb_value};
use macroreal_core::pauli::MeasurementFrame;
use macroreal_core::random::random_mixed;
use macroreal_core::state::{named_state, WernerState};
use serde::Serialize;

use crate::config::{ChshParams, ChshState};
use crate::error::LabResult;
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct Record {
    index: usize,
    state: ChshState,
    value: f64,
    analytic_bound: f64,
    expected_value: Option<f64>,
    /// Criterion value with both regions in the standard `x, y` frame.
    l_standard: f64,
    expected_l: Option<f64>,
    alice: [[f64; 3]; 2],
    bob: [[f64; 3]; 2],
}

pub fn run(p: &ChshParams, seed: u64) -> LabResult<Outcome> {
    let records = map_trials(p.states.len(), |i| {
        let mut rng = trial_rng(seed, i as u64);
        let choice = &p.states[i];
        let (rho, expected_value, expected_l) = match choice {
            ChshState::Werner(v) => (
                WernerState::new(*v)?.to_density(),
                Some(2.0 * SQRT_2 * v.abs()),
                Some(2.0 * v * v),
            ),
            ChshState::Named(name) => {
                let known = match name.as_str() {
                    "singlet" => (Some(2.0 * SQRT_2), Some(2.0)),
                    "max_mixed" => (Some(0.0), Some(0.0)),
                    _ => (None, None),
                };
                (named_state(name, 2)?.to_density()?, known.0, known.1)
            }
            ChshState::RandomMixed(rank) => (random_mixed(2, *rank, &mut rng)?, None, None),
        };
        let opt = chsh_optimize(&rho, &mut rng)?;
        let standard = [MeasurementFrame::standard(), MeasurementFrame::standard()];
        let l_standard = zb_value(&correlation_tensor(&rho, &standard)?);
        Ok(Record {
            index: i,
            state: choice.clone(),
            value: opt.value,
            analytic_bound: opt.analytic_bound,
            expected_value,
            l_standard,
            expected_l,
            alice: [opt.alice[0].components(), opt.alice[1].components()],
            bob: [opt.bob[0].components(), opt.bob[1].components()],
        })
    })?;
    let mut out = Outcome::default();
    let analytic_dev = nan_max(records.iter().map(|r| (r.value - r.analytic_bound).abs()));
    let expected_dev = nan_max(
        records
            .iter()
            .filter_map(|r| r.expected_value.map(|e| (r.value - e).abs())),
    );
    let l_dev = nan_max(
        records
            .iter()
            .filter_map(|r| r.expected_l.map(|e| (r.l_standard - e).abs())),
    );
    let max_value = nan_max(records.iter().map(|r| r.value));
    out.summarize("states", records.len());
    out.summarize("max_value", max_value);
    out.summarize("max_analytic_deviation", analytic_dev);
    out.check(Check::at_most(
        "optimizer_matches_analytic",
        analytic_dev,
        p.optimizer_tolerance,
    ));
    if records.iter().any(|r| r.expected_value.is_some()) {
        out.summarize("max_expected_value_deviation", expected_dev);
        out.check(Check::at_most(
            "value_matches_expected",
            expected_dev,
            p.optimizer_tolerance,
        ));
    }
    if records.iter().any(|r| r.expected_l.is_some()) {
        out.summarize("max_expected_l_deviation", l_dev);
        out.check(Check::at_most("l_matches_expected", l_dev, p.correlation_tolerance));
    }
    out.check(Check::at_most(
        "below_quantum_ceiling",
        max_value,
        2.0 * SQRT_2 + p.optimizer_tolerance,
    ));
    for r in records {
        out.record(r);
    }
    Ok(out)
}
