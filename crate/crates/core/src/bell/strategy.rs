use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::distribution::JointDistribution;
use super::scenario::BellScenario;
use crate::linalg::{expect_local_product, CMatrix, Radix};
use crate::state::{BlockLayout, DensityMatrix, QuantumState};
use crate::{Error, Result};

/// Largest number of joint deterministic strategies handled.
pub const MAX_STRATEGIES: u128 = 1_000_000;
pub const WEIGHT_TOLERANCE: f64 = 1e-10;
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// One region's script: `outcomes[i]` is reported when setting `i` is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    outcomes: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(outcomes: Vec<usize>) -> Self {
        DeterministicStrategy { outcomes }
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn respond(&self, setting: usize) -> usize {
        self.outcomes[setting]
    }
}

/// Enumeration of joint strategy tuples for a shape `outcomes[region][setting]`,
/// lexicographic with region 0 / setting 0 most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySpace {
    outcomes: Vec<Vec<usize>>,
    radix: Radix,
}

impl StrategySpace {
    pub fn new(outcomes: Vec<Vec<usize>>) -> Result<Self> {
        let count = outcomes
            .iter()
            .flatten()
            .try_fold(1u128, |acc, &o| acc.checked_mul(o as u128))
            .unwrap_or(u128::MAX);
        if count > MAX_STRATEGIES {
            return Err(Error::ScenarioTooLarge {
                strategies: count,
                cap: MAX_STRATEGIES,
            });
        }
        let radix = Radix::new(outcomes.iter().flatten().copied().collect());
        Ok(StrategySpace { outcomes, radix })
    }

    pub fn len(&self) -> usize {
        self.radix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn outcome_counts(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn decode(&self, flat: usize) -> Vec<DeterministicStrategy> {
        let digits = self.radix.digits(flat);
        let mut out = Vec::with_capacity(self.outcomes.len());
        let mut at = 0;
        for o in &self.outcomes {
            out.push(DeterministicStrategy::new(digits[at..at + o.len()].to_vec()));
            at += o.len();
        }
        out
    }

    pub fn index(&self, tuple: &[DeterministicStrategy]) -> usize {
        let digits: Vec<usize> = tuple.iter().flat_map(|s| s.outcomes.iter().copied()).collect();
        self.radix.index(&digits)
    }

    fn check(&self, tuple: &[DeterministicStrategy]) -> Result<()> {
        if tuple.len() != self.outcomes.len() {
            return Err(Error::LengthMismatch {
                left: tuple.len(),
                right: self.outcomes.len(),
            });
        }
        for (x, (s, o)) in tuple.iter().zip(&self.outcomes).enumerate() {
            if s.outcomes.len() != o.len() {
                return Err(Error::LengthMismatch {
                    left: s.outcomes.len(),
                    right: o.len(),
                });
            }
            if let Some(i) = (0..o.len()).find(|&i| s.outcomes[i] >= o[i]) {
                return Err(Error::InvalidArgument(format!(
                    "region {x}, setting {i}: outcome {} is not a valid label",
                    s.outcomes[i]
                )));
            }
        }
        Ok(())
    }
}

/// Shared randomness over joint deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct LHVModel {
    outcomes: Vec<Vec<usize>>,
    entries: Vec<(Vec<DeterministicStrategy>, f64)>,
}

impl LHVModel {
    pub fn new(outcomes: Vec<Vec<usize>>, entries: Vec<(Vec<DeterministicStrategy>, f64)>) -> Result<Self> {
        let space = StrategySpace::new(outcomes.clone())?;
        for (tuple, w) in &entries {
            space.check(tuple)?;
            if !(*w >= -WEIGHT_TOLERANCE) {
                return Err(Error::InvalidArgument(format!("strategy weight {w:e} is negative")));
            }
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("strategy weights sum to {total}")));
        }
        Ok(LHVModel { outcomes, entries })
    }

    pub fn outcome_counts(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn entries(&self) -> &[(Vec<DeterministicStrategy>, f64)] {
        &self.entries
    }

    pub fn min_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min)
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Entries with weight above `threshold`.
    pub fn support(&self, threshold: f64) -> usize {
        self.entries.iter().filter(|(_, w)| *w > threshold).count()
    }
}

/// Largest number of settings per site-region for which the deterministic
/// construction applies when observables act on `m` spins: `floor(n_x / m)`.
pub fn settings_budget(n_x: u64, m: u64) -> Result<u64> {
    if m == 0 || m > n_x {
        return Err(Error::InvalidArgument(format!("body count {m} must lie in 1..={n_x}")));
    }
    Ok(n_x / m)
}

/// Weights of the local deterministic model built from a (permutation
/// symmetrized) state: site `i` of region `X` answers setting `i`, so the
/// weight of a strategy tuple is `Tr(rho' (x)_X (x)_i E^X_{i, m_X(i)})`.
/// Regions with fewer settings than sites repeat setting 0 on the spare
/// sites, and the spare entries are summed out afterwards.
pub fn strategy_distribution(
    rho_prime: &DensityMatrix,
    layout: &BlockLayout,
    scenario: &BellScenario,
) -> Result<LHVModel> {
    let k = layout.region_count();
    if scenario.region_count() != k {
        return Err(Error::LengthMismatch {
            left: scenario.region_count(),
            right: k,
        });
    }
    let n = rho_prime.qubit_count();
    if let Some(q) = layout.regions().iter().flatten().flatten().find(|&&q| q >= n) {
        return Err(Error::InvalidPartition(format!(
            "layout uses qubit {q} of a {n}-qubit state"
        )));
    }
    let local_dim = 1usize << layout.block_size();
    let sites = layout.sites_per_region();
    let mut padded = Vec::with_capacity(k);
    for (x, region) in scenario.regions().iter().enumerate() {
        if region.local_dim() != local_dim {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                found: region.local_dim(),
            });
        }
        if region.setting_count() > sites[x] {
            return Err(Error::BudgetExceeded {
                region: x,
                settings: region.setting_count(),
                sites: sites[x],
            });
        }
        padded.push(region.padded(sites[x]));
    }
    let padded_space = StrategySpace::new(padded.iter().map(|r| r.outcome_counts()).collect())?;
    let original = StrategySpace::new(scenario.outcome_counts())?;
    let mut weights = vec![0.0; original.len()];
    for flat in 0..padded_space.len() {
        let tuple = padded_space.decode(flat);
        let factors: Vec<(&[usize], &CMatrix)> = layout
            .regions()
            .iter()
            .zip(&padded)
            .zip(&tuple)
            .flat_map(|((blocks, region), m)| {
                blocks
                    .iter()
                    .enumerate()
                    .map(move |(i, qubits)| (qubits.as_slice(), region.element(i, m.respond(i))))
            })
            .collect();
        let w = expect_local_product(rho_prime.matrix(), n, &factors).re;
        let truncated: Vec<DeterministicStrategy> = tuple
            .iter()
            .zip(scenario.regions())
            .map(|(m, r)| DeterministicStrategy::new(m.outcomes[..r.setting_count()].to_vec()))
            .collect();
        weights[original.index(&truncated)] += w;
    }
    let entries = weights
        .into_iter()
        .enumerate()
        .map(|(flat, w)| (original.decode(flat), w))
        .collect();
    LHVModel::new(scenario.outcome_counts(), entries)
}

/// `p(j | i) = sum_lambda w(lambda) prod_X [m_X(i_X) = j_X]`.
pub fn reconstruct_distribution(model: &LHVModel, scenario: &BellScenario) -> Result<JointDistribution> {
    let outcomes = scenario.outcome_counts();
    if model.outcomes != outcomes {
        return Err(Error::InvalidScenario(
            "model and scenario have different shapes".into(),
        ));
    }
    let tuples = Radix::new(scenario.settings_per_region());
    let probs = tuples
        .iter()
        .map(|i| {
            let radix = Radix::new(i.iter().enumerate().map(|(x, &s)| outcomes[x][s]).collect());
            let mut row = vec![0.0; radix.len()];
            for (tuple, w) in &model.entries {
                let j: Vec<usize> = tuple.iter().zip(&i).map(|(m, &s)| m.respond(s)).collect();
                row[radix.index(&j)] += w;
            }
            row
        })
        .collect();
    JointDistribution::new(outcomes, probs)
}
