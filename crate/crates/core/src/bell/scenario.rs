use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{c, hermitian_deviation, max_abs_diff, min_eigenvalue, CMatrix};
use crate::pauli::Direction;
use crate::{Error, Result};

pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// POVM elements for one region: `elements[setting][outcome]`, all acting on
/// the same local space.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSettings {
    local_dim: usize,
    elements: Vec<Vec<CMatrix>>,
}

impl RegionSettings {
    pub fn new(elements: Vec<Vec<CMatrix>>) -> Result<Self> {
        let first = elements
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::InvalidScenario("region without settings or outcomes".into()))?;
        let dim = first.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidScenario(format!(
                "local dimension {dim} is not a power of two >= 2"
            )));
        }
        let identity = CMatrix::identity(dim, dim);
        for (s, setting) in elements.iter().enumerate() {
            if setting.is_empty() {
                return Err(Error::InvalidScenario(format!("setting {s} has no outcomes")));
            }
            let mut sum = CMatrix::zeros(dim, dim);
            for (o, e) in setting.iter().enumerate() {
                if e.nrows() != dim || e.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: e.nrows().max(e.ncols()),
                    });
                }
                if hermitian_deviation(e) > POSITIVITY_TOLERANCE || min_eigenvalue(e) < -POSITIVITY_TOLERANCE {
                    return Err(Error::InvalidScenario(format!(
                        "setting {s}, outcome {o}: element is not positive semi-definite"
                    )));
                }
                sum += e;
            }
            let dev = max_abs_diff(&sum, &identity);
            if dev > COMPLETENESS_TOLERANCE {
                return Err(Error::InvalidScenario(format!(
                    "setting {s}: elements sum to identity only within {dev:e}"
                )));
            }
        }
        Ok(RegionSettings {
            local_dim: dim,
            elements,
        })
    }

    /// Two-outcome projective qubit measurements along `directions`; outcome
    /// 0 is the `+1` eigenspace.
    pub fn projective(directions: &[Direction]) -> Result<Self> {
        RegionSettings::new(directions.iter().map(projectors).collect())
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn setting_count(&self) -> usize {
        self.elements.len()
    }

    pub fn outcome_count(&self, setting: usize) -> usize {
        self.elements[setting].len()
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.elements.iter().map(Vec::len).collect()
    }

    pub fn element(&self, setting: usize, outcome: usize) -> &CMatrix {
        &self.elements[setting][outcome]
    }

    pub fn elements(&self) -> &[Vec<CMatrix>] {
        &self.elements
    }

    /// Copy with setting 0 repeated until there are `count` settings.
    pub(crate) fn padded(&self, count: usize) -> RegionSettings {
        let mut elements = self.elements.clone();
        while elements.len() < count {
            elements.push(self.elements[0].clone());
        }
        RegionSettings {
            local_dim: self.local_dim,
            elements,
        }
    }
}

/// `(1 + n.sigma)/2` and `(1 - n.sigma)/2`.
pub fn projectors(n: &Direction) -> Vec<CMatrix> {
    let half = c(0.5, 0.0);
    let id = CMatrix::identity(2, 2);
    let obs = n.observable();
    alloc::vec![(&id + &obs) * half, (&id - &obs) * half]
}

/// A `K`-region Bell scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BellScenario {
    regions: Vec<RegionSettings>,
}

impl BellScenario {
    pub fn new(regions: Vec<RegionSettings>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidScenario("no regions".into()));
        }
        Ok(BellScenario { regions })
    }

    /// Projective qubit scenario, one direction list per region.
    pub fn projective(directions: &[Vec<Direction>]) -> Result<Self> {
        BellScenario::new(
            directions
                .iter()
                .map(|d| RegionSettings::projective(d))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn regions(&self) -> &[RegionSettings] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn settings_per_region(&self) -> Vec<usize> {
        self.regions.iter().map(RegionSettings::setting_count).collect()
    }

    /// `outcomes[region][setting]`.
    pub fn outcome_counts(&self) -> Vec<Vec<usize>> {
        self.regions.iter().map(RegionSettings::outcome_counts).collect()
    }

    /// Total local dimension `prod d_X`.
    pub fn total_dim(&self) -> usize {
        self.regions.iter().map(RegionSettings::local_dim).product()
    }

    /// Qubits per region (`log2 d_X`).
    pub fn qubits_per_region(&self) -> Vec<usize> {
        self.regions
            .iter()
            .map(|r| r.local_dim.trailing_zeros() as usize)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_settings_are_valid() {
        let r = RegionSettings::projective(&[Direction::X, Direction::Z]).unwrap();
        assert_eq!(r.setting_count(), 2);
        assert_eq!(r.outcome_counts(), [2, 2]);
        assert_eq!(r.local_dim(), 2);
    }

    #[test]
    fn incomplete_povm_rejected() {
        let p = projectors(&Direction::Z);
        assert!(RegionSettings::new(alloc::vec![alloc::vec![p[0].clone()]]).is_err());
    }

    #[test]
    fn non_positive_element_rejected() {
        let z = Direction::Z.observable();
        let id = CMatrix::identity(2, 2);
        // z + (1 - z) sums to identity but z has a negative eigenvalue.
        assert!(RegionSettings::new(alloc::vec![alloc::vec![z.clone(), &id - &z]]).is_err());
    }

    #[test]
    fn padding_repeats_first_setting() {
        let r = RegionSettings::projective(&[Direction::X]).unwrap().padded(3);
        assert_eq!(r.setting_count(), 3);
        assert_eq!(r.element(2, 0), r.element(0, 0));
    }
}
