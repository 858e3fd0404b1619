use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::scenario::BellScenario;
use crate::linalg::{expect_local_product, Radix};
use crate::state::{DensityMatrix, QuantumState};
use crate::{Error, Result};

pub const PROBABILITY_TOLERANCE: f64 = 1e-10;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
pub const SIGNALLING_TOLERANCE: f64 = 1e-9;

/// `p(j | i)` for every setting tuple `i` and outcome tuple `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    // probs[flat setting tuple][flat outcome tuple]
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    /// Shape from `outcomes[region][setting]`; `probs` indexed by flat
    /// setting tuple then flat outcome tuple (first region most significant).
    pub fn new(outcomes: Vec<Vec<usize>>, probs: Vec<Vec<f64>>) -> Result<Self> {
        let d = JointDistribution::unchecked(outcomes, probs)?;
        d.validate()?;
        Ok(d)
    }

    pub(crate) fn unchecked(outcomes: Vec<Vec<usize>>, probs: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&outcomes)?;
        let settings: Vec<usize> = outcomes.iter().map(Vec::len).collect();
        let d = JointDistribution {
            settings,
            outcomes,
            probs,
        };
        let tuples = d.setting_radix();
        if d.probs.len() != tuples.len() {
            return Err(Error::LengthMismatch {
                left: d.probs.len(),
                right: tuples.len(),
            });
        }
        for (flat, row) in d.probs.iter().enumerate() {
            let expected = d.outcome_radix(&tuples.digits(flat)).len();
            if row.len() != expected {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: expected,
                });
            }
        }
        Ok(d)
    }

    /// Uniform distribution over outcomes for every setting tuple.
    pub fn uniform(outcomes: Vec<Vec<usize>>) -> Result<Self> {
        check_shape(&outcomes)?;
        let settings: Vec<usize> = outcomes.iter().map(Vec::len).collect();
        let tuples = Radix::new(settings);
        let probs = tuples
            .iter()
            .map(|i| {
                let n: usize = i.iter().enumerate().map(|(x, &s)| outcomes[x][s]).product();
                vec![1.0 / n as f64; n]
            })
            .collect();
        JointDistribution::new(outcomes, probs)
    }

    pub fn validate(&self) -> Result<()> {
        for (flat, row) in self.probs.iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !(**p >= -PROBABILITY_TOLERANCE)) {
                return Err(Error::InvalidArgument(format!(
                    "negative probability {p:e} at setting tuple {flat}"
                )));
            }
        }
        let norm = self.normalization_deviation();
        if norm > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to 1 only within {norm:e}"
            )));
        }
        let sig = self.signalling_deviation();
        if sig > SIGNALLING_TOLERANCE {
            return Err(Error::InvalidArgument(format!("marginals signal by {sig:e}")));
        }
        Ok(())
    }

    pub fn region_count(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcome_counts(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn setting_radix(&self) -> Radix {
        Radix::new(self.settings.clone())
    }

    pub fn outcome_radix(&self, setting_tuple: &[usize]) -> Radix {
        Radix::new(
            setting_tuple
                .iter()
                .enumerate()
                .map(|(x, &s)| self.outcomes[x][s])
                .collect(),
        )
    }

    /// Rows by flat setting tuple.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn probability(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        let row = self.setting_radix().index(settings);
        self.probs[row][self.outcome_radix(settings).index(outcomes)]
    }

    /// Largest `|sum_j p(j|i) - 1|`.
    pub fn normalization_deviation(&self) -> f64 {
        self.probs
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest change in the marginal of all other regions when one region
    /// switches setting.
    pub fn signalling_deviation(&self) -> f64 {
        let tuples = self.setting_radix();
        let mut worst = 0.0f64;
        for x in 0..self.region_count() {
            for flat in 0..tuples.len() {
                let i = tuples.digits(flat);
                if i[x] == 0 {
                    continue;
                }
                let mut base = i.clone();
                base[x] = 0;
                let a = self.marginal_without(x, &i);
                let b = self.marginal_without(x, &base);
                for (p, q) in a.iter().zip(&b) {
                    worst = worst.max((p - q).abs());
                }
            }
        }
        worst
    }

    /// Distribution of the other regions' outcomes (flat, region `x` summed
    /// out) for setting tuple `i`.
    fn marginal_without(&self, x: usize, i: &[usize]) -> Vec<f64> {
        let radix = self.outcome_radix(i);
        let mut rest = radix.radices().to_vec();
        rest.remove(x);
        let rest = Radix::new(rest);
        let mut out = vec![0.0; rest.len()];
        let row = &self.probs[self.setting_radix().index(i)];
        for (flat, p) in row.iter().enumerate() {
            let mut j = radix.digits(flat);
            j.remove(x);
            out[rest.index(&j)] += p;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> Result<f64> {
        if self.outcomes != other.outcomes {
            return Err(Error::InvalidScenario("distributions have different shapes".into()));
        }
        Ok(self
            .probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `sum_j (-1)^(j_1 + ... + j_K) p(j | i)` for two-outcome settings.
    pub fn correlator(&self, settings: &[usize]) -> Result<f64> {
        let radix = self.outcome_radix(settings);
        if radix.radices().iter().any(|&o| o != 2) {
            return Err(Error::InvalidScenario("correlator needs two-outcome settings".into()));
        }
        let row = &self.probs[self.setting_radix().index(settings)];
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, p)| if j.count_ones() % 2 == 0 { *p } else { -p })
            .sum())
    }

    /// `E00 + E01 + E10 - E11` for a two-region, two-setting, two-outcome
    /// distribution.
    pub fn chsh_value(&self) -> Result<f64> {
        if self.outcomes != [vec![2, 2], vec![2, 2]] {
            return Err(Error::InvalidScenario(
                "CHSH needs 2 regions x 2 settings x 2 outcomes".into(),
            ));
        }
        Ok(
            self.correlator(&[0, 0])? + self.correlator(&[0, 1])? + self.correlator(&[1, 0])?
                - self.correlator(&[1, 1])?,
        )
    }
}

fn check_shape(outcomes: &[Vec<usize>]) -> Result<()> {
    if outcomes.is_empty() || outcomes.iter().any(|o| o.is_empty() || o.contains(&0)) {
        return Err(Error::InvalidScenario(
            "every region needs settings with outcomes".into(),
        ));
    }
    Ok(())
}

/// `p(j | i) = Tr(rho (E^1_{i_1 j_1} (x) ... (x) E^K_{i_K j_K}))`; region `X`
/// acts on the next `log2 d_X` qubits of `rho`.
pub fn quantum_distribution(rho: &DensityMatrix, scenario: &BellScenario) -> Result<JointDistribution> {
    let per_region = scenario.qubits_per_region();
    let n: usize = per_region.iter().sum();
    if rho.qubit_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.qubit_count(),
        });
    }
    let mut qubits = Vec::with_capacity(per_region.len());
    let mut next = 0;
    for &q in &per_region {
        qubits.push((next..next + q).collect::<Vec<usize>>());
        next += q;
    }
    let outcomes = scenario.outcome_counts();
    let tuples = Radix::new(scenario.settings_per_region());
    let regions = scenario.regions();
    let probs = tuples
        .iter()
        .map(|i| {
            let radix = Radix::new(i.iter().enumerate().map(|(x, &s)| outcomes[x][s]).collect());
            radix
                .iter()
                .map(|j| {
                    let factors: Vec<(&[usize], &crate::linalg::CMatrix)> = (0..regions.len())
                        .map(|x| (qubits[x].as_slice(), regions[x].element(i[x], j[x])))
                        .collect();
                    expect_local_product(rho.matrix(), n, &factors).re
                })
                .collect()
        })
        .collect();
    JointDistribution::new(outcomes, probs)
}
