//! Scenario configuration files. Every random draw is derived from the
//! explicit `seed`; unknown fields are rejected so typos do not silently fall
//! back to defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::formats::{parse_json, read_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub experiment: Experiment,
    /// Where `run` writes the JSON report when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let cfg: ScenarioConfig = parse_json(text)?;
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let cfg: ScenarioConfig = read_json(path)?;
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> &'static str {
        self.experiment.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    ZbSweep(ZbSweepParams),
    PqCheck(PqCheckParams),
    TreeBuild(TreeBuildParams),
    #[serde(rename = "section4_pipeline")]
    StrategyPipeline(PipelineParams),
    WernerThresholds(WernerParams),
    Chsh(ChshParams),
    Membership(MembershipParams),
    Budget(BudgetParams),
    Determinism(DeterminismParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::ZbSweep(_) => "zb_sweep",
            Experiment::PqCheck(_) => "pq_check",
            Experiment::TreeBuild(_) => "tree_build",
            Experiment::StrategyPipeline(_) => "section4_pipeline",
            Experiment::WernerThresholds(_) => "werner_thresholds",
            Experiment::Chsh(_) => "chsh",
            Experiment::Membership(_) => "membership",
            Experiment::Budget(_) => "budget",
            Experiment::Determinism(_) => "determinism",
        }
    }

    /// Range checks serde cannot express.
    pub fn validate(&self) -> LabResult<()> {
        let bad = |path: &str, message: String| {
            Err(LabError::Schema {
                path: format!("experiment.{path}"),
                message,
            })
        };
        match self {
            Experiment::ZbSweep(p) => {
                if p.min_qubits < 2 || p.min_qubits > p.max_qubits {
                    return bad(
                        "min_qubits",
                        format!(
                            "need 2 <= min_qubits <= max_qubits, got {}..{}",
                            p.min_qubits, p.max_qubits
                        ),
                    );
                }
                if p.max_qubits > 12 {
                    return bad("max_qubits", format!("{} exceeds the dense limit 12", p.max_qubits));
                }
                if p.ranks.is_empty() || p.ranks.contains(&0) {
                    return bad("ranks", "need at least one positive rank".into());
                }
                if p.min_region_size == 0 || 2 * p.min_region_size > p.min_qubits {
                    return bad(
                        "min_region_size",
                        format!("{} cannot split {} qubits", p.min_region_size, p.min_qubits),
                    );
                }
            }
            Experiment::PqCheck(p) => {
                if p.min_qubits < 3 || p.min_qubits > p.max_qubits || p.max_qubits > 12 {
                    return bad(
                        "min_qubits",
                        format!(
                            "need 3 <= min_qubits <= max_qubits <= 12, got {}..{}",
                            p.min_qubits, p.max_qubits
                        ),
                    );
                }
                if p.ranks.is_empty() || p.ranks.contains(&0) {
                    return bad("ranks", "need at least one positive rank".into());
                }
            }
            Experiment::TreeBuild(p) => {
                if p.min_k < 2 || p.min_k > p.max_k || p.max_k > 8 {
                    return bad(
                        "min_k",
                        format!("need 2 <= min_k <= max_k <= 8, got {}..{}", p.min_k, p.max_k),
                    );
                }
                if p.variants.is_empty() {
                    return bad("variants", "empty".into());
                }
            }
            Experiment::StrategyPipeline(p) => validate_runs(&p.runs, "runs")?,
            Experiment::Membership(p) => validate_runs(&p.runs, "runs")?,
            Experiment::WernerThresholds(p) => {
                for (i, v) in p.classifications.iter().enumerate() {
                    let x = v.visibility.value();
                    if !(-1.0 / 3.0..=1.0).contains(&x) {
                        return bad(
                            &format!("classifications[{i}].visibility"),
                            format!("{x} outside [-1/3, 1]"),
                        );
                    }
                }
            }
            Experiment::Chsh(p) => {
                if p.states.is_empty() {
                    return bad("states", "empty".into());
                }
            }
            Experiment::Budget(p) => {
                for (i, c) in p.cases.iter().enumerate() {
                    if c.region_size.is_none() && (c.total.is_none() || c.partitions.is_none()) {
                        return bad(
                            &format!("cases[{i}]"),
                            "give region_size or both total and partitions".into(),
                        );
                    }
                    for (field, count) in [("total", &c.total), ("partitions", &c.partitions)] {
                        if count.as_ref().is_some_and(|n| n.value().is_none()) {
                            return bad(
                                &format!("cases[{i}].{field}"),
                                format!("{count:?} is not a count below 2^128"),
                            );
                        }
                    }
                }
            }
            Experiment::Determinism(p) => {
                if p.configs.is_empty() {
                    return bad("configs", "empty".into());
                }
            }
        }
        Ok(())
    }
}

fn validate_runs(runs: &[PipelineRun], field: &str) -> LabResult<()> {
    for (i, r) in runs.iter().enumerate() {
        let err = |message: String| {
            Err(LabError::Schema {
                path: format!("experiment.{field}[{i}]"),
                message,
            })
        };
        if r.region_sizes.len() != 2 || r.region_sizes.iter().sum::<usize>() != r.qubits {
            return err(format!(
                "region sizes {:?} must split {} qubits into two regions",
                r.region_sizes, r.qubits
            ));
        }
        if r.block_size == 0 || r.region_sizes.iter().any(|s| s % r.block_size != 0) {
            return err(format!("block size {} must divide every region", r.block_size));
        }
        if r.qubits > 10 {
            return err(format!("{} qubits exceeds the pipeline limit 10", r.qubits));
        }
        if r.settings == 0 {
            return err("zero settings".into());
        }
    }
    Ok(())
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZbSweepParams {
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub states: usize,
    pub frames_per_partition: usize,
    pub min_region_size: usize,
    /// Ginibre ranks cycled over the states; rank 1 gives Haar pure states.
    pub ranks: Vec<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Optional CSV export of the per-state maxima.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqCheckParams {
    pub instances: usize,
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub ranks: Vec<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeVariant {
    Simple,
    Folded,
}

impl TreeVariant {
    pub fn name(self) -> &'static str {
        match self {
            TreeVariant::Simple => "simple",
            TreeVariant::Folded => "folded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSizeExpectation {
    pub k: usize,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeBuildParams {
    pub min_k: usize,
    pub max_k: usize,
    pub variants: Vec<TreeVariant>,
    /// Random shift/flip applications per family, for `k <= operation_max_k`.
    pub operation_trials: usize,
    pub operation_max_k: usize,
    /// Families up to this `k` are listed in full in the report.
    pub list_max_k: usize,
    /// Random states per family for the squared-norm bound.
    pub norm_states: usize,
    #[serde(default)]
    pub min_region_size: Vec<RegionSizeExpectation>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// A bipartite pipeline run: `trials` random states of `qubits` qubits split
/// into two regions, grouped into blocks of `block_size` qubits, measured with
/// `settings` random projective measurements per region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineRun {
    pub qubits: usize,
    pub region_sizes: Vec<usize>,
    pub settings: usize,
    pub trials: usize,
    #[serde(default = "one")]
    pub block_size: usize,
    /// Ginibre rank of the random states; omitted means full rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineParams {
    pub runs: Vec<PipelineRun>,
    #[serde(default = "pipeline_tolerance")]
    pub tolerance: f64,
}

fn pipeline_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipParams {
    /// Regenerated exactly as by a pipeline config with the same seed.
    pub runs: Vec<PipelineRun>,
    /// Also feed the singlet at its CHSH-optimal settings, which must be rejected.
    pub singlet_control: bool,
}

/// A number or an exact fraction written `"p/q"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    Float(f64),
    Fraction(String),
}

impl Rational {
    pub fn value(&self) -> f64 {
        match self {
            Rational::Float(x) => *x,
            Rational::Fraction(s) => parse_fraction(s).map(|(p, q)| p as f64 / q as f64).unwrap_or(f64::NAN),
        }
    }
}

/// Parses `"p/q"` or `"p"` with `p >= 0`, `q > 0`.
pub fn parse_fraction(s: &str) -> Option<(i64, u64)> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse().ok()?, q.trim().parse().ok()?),
        None => (s.trim().parse().ok()?, 1),
    };
    (q > 0).then_some((p, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapExpectation {
    pub n_a: u64,
    pub n_b: u64,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationCase {
    pub visibility: Rational,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityOptimization {
    pub qubits: usize,
    pub region_a: Vec<usize>,
    pub region_b: Vec<usize>,
    pub iterations: usize,
    pub expected: Rational,
    pub tolerance: f64,
    /// Also check a copy rotated by a random collective SU(2) element.
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSampling {
    pub states: usize,
    pub min_qubits: usize,
    pub max_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WernerParams {
    pub caps: Vec<CapExpectation>,
    /// Region sizes for the classification table.
    pub region_sizes: [u64; 2],
    pub classifications: Vec<ClassificationCase>,
    #[serde(default)]
    pub optimizations: Vec<VisibilityOptimization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalSampling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChshState {
    Werner(f64),
    Named(String),
    /// Random two-qubit state of the given Ginibre rank.
    RandomMixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshParams {
    pub states: Vec<ChshState>,
    #[serde(default = "chsh_tolerance")]
    pub optimizer_tolerance: f64,
    #[serde(default = "default_tolerance")]
    pub correlation_tolerance: f64,
}

fn chsh_tolerance() -> f64 {
    1e-6
}

/// A count that may exceed `u64`: a JSON integer, a decimal string, or a
/// power written `"10^23"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigCount {
    Small(u64),
    Text(String),
}

impl BigCount {
    pub fn value(&self) -> Option<u128> {
        match self {
            BigCount::Small(n) => Some(*n as u128),
            BigCount::Text(s) => match s.split_once('^') {
                Some((b, e)) => {
                    let b: u128 = b.trim().parse().ok()?;
                    b.checked_pow(e.trim().parse().ok()?)
                }
                None => s.trim().parse().ok(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<BigCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<BigCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_size: Option<u64>,
    pub body: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetParams {
    pub cases: Vec<BudgetCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterminismParams {
    /// Names of shipped configs to rerun.
    pub configs: Vec<String>,
    /// Thread counts for the reruns; every count must give the same report.
    pub threads: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_names_the_field() {
        let text = r#"{"name": "x", "experiment": {"kind": "budget", "cases": []}}"#;
        let err = ScenarioConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let text = r#"{"name": "x", "seed": 1, "experiment": {"kind": "budget", "cases": [], "extra": 1}}"#;
        let err = ScenarioConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn nested_field_path_is_reported() {
        let text = r#"{"name": "x", "seed": 1, "experiment": {"kind": "budget", "cases": [{"body": 1}]}}"#;
        let err = ScenarioConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("expected"), "{err}");
    }

    #[test]
    fn large_counts_parse() {
        let text = r#"{"name": "x", "seed": 18446744073709551615, "experiment": {"kind": "budget",
            "cases": [{"total": "10^23", "partitions": 10000000, "body": 10000000, "expected": 1000000000},
                      {"total": "100000000000000000000000", "partitions": "10^7", "body": 1, "expected": 1}]}}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.seed, u64::MAX);
        let Experiment::Budget(b) = cfg.experiment else {
            panic!("wrong kind")
        };
        let big = 100_000_000_000_000_000_000_000u128;
        assert_eq!(b.cases[0].total.as_ref().and_then(BigCount::value), Some(big));
        assert_eq!(b.cases[1].total.as_ref().and_then(BigCount::value), Some(big));
        assert_eq!(
            b.cases[1].partitions.as_ref().and_then(BigCount::value),
            Some(10_000_000)
        );
    }

    #[test]
    fn malformed_count_is_a_schema_error() {
        let text = r#"{"name": "x", "seed": 1, "experiment": {"kind": "budget",
            "cases": [{"total": "ten", "partitions": 1, "body": 1, "expected": 1}]}}"#;
        let err = ScenarioConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("cases[0].total"), "{err}");
    }

    #[test]
    fn fractions_are_exact() {
        assert_eq!(Rational::Fraction("5/12".into()).value(), 5.0 / 12.0);
        assert_eq!(parse_fraction("2/3"), Some((2, 3)));
        assert_eq!(parse_fraction("1"), Some((1, 1)));
        assert_eq!(parse_fraction("1/0"), None);
    }
}
