use macroreal_core::bell::{chsh_optimize, lhv_membership, quantum_distribution};
use macroreal_core::state::named_state;
use serde::Serialize;

use super::pipeline_trial;
use crate::config::MembershipParams;
use crate::error::LabResult;
use crate::formats::{ScenarioDocument, VerdictRecord};
use crate::parallel::{map_trials, trial_rng};
use crate::report::{Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct Record {
    source: String,
    run: Option<usize>,
    trial: Option<usize>,
    chsh_value: Option<f64>,
    verdict: VerdictRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<ScenarioDocument>,
}

/// Stream reserved for the singlet control, clear of the pipeline streams.
const CONTROL_STREAM: u64 = u64::MAX;

pub fn run(p: &MembershipParams, seed: u64) -> LabResult<Outcome> {
    let mut records = Vec::new();
    for (r, run) in p.runs.iter().enumerate() {
        records.extend(map_trials(run.trials, |t| {
            let tr = pipeline_trial(seed, r, t, run)?;
            let verdict = lhv_membership(&tr.quantum, &tr.scenario)?;
            Ok(Record {
                source: "effective_state".into(),
                run: Some(r),
                trial: Some(t),
                chsh_value: None,
                verdict: VerdictRecord::from(&verdict),
                scenario: None,
            })
        })?);
    }
    if p.singlet_control {
        let rho = named_state("singlet", 2)?.to_density()?;
        let opt = chsh_optimize(&rho, &mut trial_rng(seed, CONTROL_STREAM))?;
        let scenario = opt.scenario()?;
        let dist = quantum_distribution(&rho, &scenario)?;
        let verdict = lhv_membership(&dist, &scenario)?;
        records.push(Record {
            source: "singlet_chsh_optimal".into(),
            run: None,
            trial: None,
            chsh_value: Some(dist.chsh_value()?),
            verdict: VerdictRecord::from(&verdict),
            scenario: Some(ScenarioDocument::from_scenario(&scenario)),
        });
    }

    let mut out = Outcome::default();
    let effective: Vec<&Record> = records.iter().filter(|r| r.source == "effective_state").collect();
    let rejected = effective.iter().filter(|r| !r.verdict.feasible).count();
    let bad_certificates = effective
        .iter()
        .filter(|r| r.verdict.feasible && !(r.verdict.residual <= 1e-9))
        .count();
    let max_iterations = effective.iter().map(|r| r.verdict.iterations).max().unwrap_or(0);
    out.summarize("distributions", effective.len());
    out.summarize("rejected", rejected);
    out.summarize("max_iterations", max_iterations);
    out.check(Check::count_zero(
        "effective_statistics_accepted",
        rejected,
        effective.len(),
    ));
    out.check(Check::count_zero(
        "certificates_reproduce_input",
        bad_certificates,
        effective.len(),
    ));
    if let Some(control) = records.iter().find(|r| r.source == "singlet_chsh_optimal") {
        let violation = control
            .verdict
            .witness
            .as_ref()
            .map(|w| w.value - w.local_bound)
            .unwrap_or(f64::NAN);
        out.summarize("singlet_chsh", control.chsh_value);
        out.summarize("singlet_witness_violation", violation);
        out.check(Check::new(
            "singlet_rejected",
            !control.verdict.feasible,
            format!("feasible = {}", control.verdict.feasible),
        ));
        out.check(Check::at_least("singlet_witness_violated", violation, 1e-6));
    }
    for r in records {
        out.record(r);
    }
    Ok(out)
}
