//! Shipped acceptance configs, single-scenario runs and the full suite.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{DeterminismParams, Experiment, ScenarioConfig};
use crate::error::{LabError, LabResult};
use crate::experiments::run_experiment;
use crate::parallel::with_threads;
use crate::report::{Check, Outcome, Report};

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../../configs/", $name, ".json")))),*]
    };
}

/// `(name, JSON text)` of every shipped config, in suite order.
pub const SHIPPED_CONFIGS: &[(&str, &str)] = shipped!(
    "criterion01_zb_sweep",
    "criterion02_pq_check",
    "criterion03_chsh_control",
    "criterion04_strategy_pipeline",
    "criterion05_membership",
    "criterion06_tree_build",
    "criterion07_monogamy_norms",
    "criterion08_werner_thresholds",
    "criterion09_budget",
    "criterion10_determinism",
);

pub fn shipped_config(name: &str) -> LabResult<ScenarioConfig> {
    let (_, text) = SHIPPED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| LabError::Invalid(format!("no shipped config named {name:?}")))?;
    ScenarioConfig::from_json(text)
}

/// Runs one scenario; checks decide `passed`.
pub fn run_scenario(cfg: &ScenarioConfig) -> LabResult<Report> {
    let start = Instant::now();
    let outcome = run_experiment(&cfg.experiment, cfg.seed)?;
    Ok(assemble(cfg, outcome, start.elapsed().as_secs_f64()))
}

fn assemble(cfg: &ScenarioConfig, outcome: Outcome, seconds: f64) -> Report {
    let passed = !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.passed);
    Report {
        name: cfg.name.clone(),
        kind: cfg.kind().into(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        records: outcome.records,
        summary: outcome.summary,
        checks: outcome.checks,
        passed,
        wall_clock_seconds: seconds,
    }
}

/// Like [`run_scenario`], but an error becomes a failed report instead of
/// aborting the caller.
pub fn run_scenario_reporting(cfg: &ScenarioConfig) -> Report {
    let start = Instant::now();
    match run_experiment(&cfg.experiment, cfg.seed) {
        Ok(outcome) => assemble(cfg, outcome, start.elapsed().as_secs_f64()),
        Err(e) => {
            let mut outcome = Outcome::default();
            outcome.check(Check::new("completed", false, e.to_string()));
            assemble(cfg, outcome, start.elapsed().as_secs_f64())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed_override: Option<u64>,
    pub reports: Vec<Report>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl SuiteReport {
    pub fn canonical_json(&self) -> LabResult<String> {
        let mut v = serde_json::to_value(self)?;
        crate::report::strip_timing(&mut v);
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }
}

/// Every shipped config in order, optionally all with seed `seed_override`.
/// `progress` sees each report as it completes.
pub fn verify_all(seed_override: Option<u64>, mut progress: impl FnMut(&Report)) -> LabResult<SuiteReport> {
    let start = Instant::now();
    let mut reports = Vec::with_capacity(SHIPPED_CONFIGS.len());
    for (name, _) in SHIPPED_CONFIGS {
        let mut cfg = shipped_config(name)?;
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        let report = run_scenario_reporting(&cfg);
        progress(&report);
        reports.push(report);
    }
    Ok(SuiteReport {
        seed_override,
        passed: reports.iter().all(|r| r.passed),
        reports,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct RerunRecord {
    config: String,
    threads: usize,
    passed: bool,
    bytes: usize,
    fingerprint: String,
    matches_first: bool,
}

fn fingerprint(text: &str) -> String {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Reruns each listed config (with this experiment's seed) under every
/// thread count and compares the canonical reports byte for byte.
pub fn run_determinism(p: &DeterminismParams, seed: u64) -> LabResult<Outcome> {
    let mut records = Vec::new();
    for name in &p.configs {
        let mut cfg = shipped_config(name)?;
        if matches!(cfg.experiment, Experiment::Determinism(_)) {
            return Err(LabError::Invalid(format!("{name} is itself a determinism config")));
        }
        cfg.seed = seed;
        let mut first: Option<String> = None;
        for &threads in &p.threads {
            let report = with_threads(Some(threads.max(1)), || run_scenario(&cfg))??;
            let text = report.canonical_json()?;
            let matches_first = first.as_ref().is_none_or(|f| *f == text);
            records.push(RerunRecord {
                config: name.clone(),
                threads,
                passed: report.passed,
                bytes: text.len(),
                fingerprint: fingerprint(&text),
                matches_first,
            });
            first.get_or_insert(text);
        }
    }
    let mut out = Outcome::default();
    let mismatches = records.iter().filter(|r| !r.matches_first).count();
    let failed = records.iter().filter(|r| !r.passed).count();
    out.summarize("reruns", records.len());
    out.check(Check::count_zero("reports_identical", mismatches, records.len()));
    out.check(Check::count_zero("reruns_pass", failed, records.len()));
    records.into_iter().for_each(|r| out.record(r));
    Ok(out)
}
