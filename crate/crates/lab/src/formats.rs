//! JSON documents for states, correlation tensors, operator families, Bell
//! scenarios and membership verdicts. Complex numbers are `[re, im]` pairs,
//! matrices are row-major, and floats are written in shortest round-trip
//! form so reading back reproduces them exactly.

use macroreal_core::anticommute::{LocalOp, OperatorFamily, OperatorSequence, XyLabel};
use macroreal_core::bell::{BellScenario, BellWitness, MembershipVerdict, RegionSettings};
use macroreal_core::criteria::CorrelationTensor;
use macroreal_core::linalg::{c, CMatrix, C64};
use macroreal_core::pauli::{Direction, MeasurementFrame};
use macroreal_core::state::{AnyState, DensityMatrix, PureState, QuantumState};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub type ComplexPair = [f64; 2];

fn pair(z: &C64) -> ComplexPair {
    [z.re, z.im]
}

fn complex(p: &ComplexPair) -> C64 {
    c(p[0], p[1])
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<ComplexPair> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| pair(&m[(i, j)]))
        .collect()
}

pub fn matrix_from_pairs(dim: usize, data: &[ComplexPair]) -> LabResult<CMatrix> {
    if data.len() != dim * dim {
        return Err(LabError::Invalid(format!(
            "matrix of dimension {dim} needs {} entries, found {}",
            dim * dim,
            data.len()
        )));
    }
    let values: Vec<C64> = data.iter().map(complex).collect();
    Ok(CMatrix::from_row_slice(dim, dim, &values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    Mixed,
}

/// `{"qubits": N, "kind": "pure" | "mixed", "data": [[re, im], ...]}`; pure
/// data is the amplitude vector, mixed data the row-major density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub qubits: usize,
    pub kind: StateKind,
    pub data: Vec<ComplexPair>,
}

impl StateDocument {
    pub fn from_state(state: &AnyState) -> Self {
        match state {
            AnyState::Pure(p) => StateDocument {
                qubits: p.qubit_count(),
                kind: StateKind::Pure,
                data: p.amplitudes().iter().map(pair).collect(),
            },
            AnyState::Mixed(m) => StateDocument {
                qubits: m.qubit_count(),
                kind: StateKind::Mixed,
                data: matrix_to_pairs(m.matrix()),
            },
        }
    }

    pub fn to_state(&self) -> LabResult<AnyState> {
        let dim = 1usize
            .checked_shl(self.qubits as u32)
            .ok_or_else(|| LabError::Invalid(format!("{} qubits", self.qubits)))?;
        match self.kind {
            StateKind::Pure => {
                if self.data.len() != dim {
                    return Err(LabError::Invalid(format!(
                        "pure state on {} qubits needs {dim} amplitudes, found {}",
                        self.qubits,
                        self.data.len()
                    )));
                }
                let amps: Vec<C64> = self.data.iter().map(complex).collect();
                Ok(AnyState::Pure(PureState::from_amplitudes(&amps)?))
            }
            StateKind::Mixed => {
                let m = matrix_from_pairs(dim, &self.data)?;
                Ok(AnyState::Mixed(DensityMatrix::new(m)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDocument {
    pub x: [f64; 3],
    pub y: [f64; 3],
}

impl FrameDocument {
    pub fn from_frame(f: &MeasurementFrame) -> Self {
        FrameDocument {
            x: f.x_axis().components(),
            y: f.y_axis().components(),
        }
    }

    pub fn to_frame(&self) -> LabResult<MeasurementFrame> {
        Ok(MeasurementFrame::new(Direction::new(self.x)?, Direction::new(self.y)?)?)
    }
}

/// Correlations in lexicographic `{x, y}^K` order (first region most
/// significant) with the frames they were taken in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDocument {
    pub regions: usize,
    pub frames: Vec<FrameDocument>,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl TensorDocument {
    pub fn from_tensor(t: &CorrelationTensor) -> Self {
        TensorDocument {
            regions: t.region_count(),
            frames: t.frames().iter().map(FrameDocument::from_frame).collect(),
            labels: t.labels(),
            values: t.values().to_vec(),
        }
    }

    pub fn to_tensor(&self) -> LabResult<CorrelationTensor> {
        if self.frames.len() != self.regions {
            return Err(LabError::Invalid("one frame per region expected".into()));
        }
        let frames = self
            .frames
            .iter()
            .map(FrameDocument::to_frame)
            .collect::<LabResult<Vec<_>>>()?;
        let t = CorrelationTensor::new(self.values.clone(), frames)?;
        if t.labels() != self.labels {
            return Err(LabError::Invalid("tensor labels are not in lexicographic order".into()));
        }
        Ok(t)
    }
}

/// One factor of a sequence: 1-based region and qubit, `"X"` or `"Y"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpRecord {
    pub region: usize,
    pub qubit: usize,
    pub pauli: String,
}

pub type FamilyDocument = Vec<Vec<OpRecord>>;

pub fn family_to_document(f: &OperatorFamily) -> FamilyDocument {
    f.sequences()
        .iter()
        .map(|seq| {
            seq.ops()
                .iter()
                .enumerate()
                .map(|(j, op)| OpRecord {
                    region: j + 1,
                    qubit: op.qubit,
                    pauli: match op.pauli {
                        XyLabel::X => "X".into(),
                        XyLabel::Y => "Y".into(),
                    },
                })
                .collect()
        })
        .collect()
}

/// Region sizes are the largest qubit index used in each region unless
/// given explicitly.
pub fn family_from_document(doc: &FamilyDocument, region_sizes: Option<Vec<usize>>) -> LabResult<OperatorFamily> {
    let k = doc.first().map(Vec::len).unwrap_or(0);
    if k == 0 {
        return Err(LabError::Invalid("empty family".into()));
    }
    let mut inferred = vec![0usize; k];
    let mut sequences = Vec::with_capacity(doc.len());
    for (s, seq) in doc.iter().enumerate() {
        if seq.len() != k {
            return Err(LabError::Invalid(format!(
                "sequence {s} has {} factors, expected {k}",
                seq.len()
            )));
        }
        let mut ops = Vec::with_capacity(k);
        for (j, rec) in seq.iter().enumerate() {
            if rec.region != j + 1 {
                return Err(LabError::Invalid(format!(
                    "sequence {s}: factor {} names region {}",
                    j + 1,
                    rec.region
                )));
            }
            let pauli = match rec.pauli.as_str() {
                "X" => XyLabel::X,
                "Y" => XyLabel::Y,
                other => return Err(LabError::Invalid(format!("sequence {s}: Pauli label {other:?}"))),
            };
            inferred[j] = inferred[j].max(rec.qubit);
            ops.push(LocalOp {
                qubit: rec.qubit,
                pauli,
            });
        }
        sequences.push(OperatorSequence::new(ops));
    }
    Ok(OperatorFamily::new(region_sizes.unwrap_or(inferred), sequences)?)
}

/// Bell scenario: `measurements[region][setting][outcome]` is a row-major
/// matrix; `settings` and `outcomes` repeat the shape for readability and
/// are checked against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub regions: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
    pub measurements: Vec<Vec<Vec<Vec<ComplexPair>>>>,
}

impl ScenarioDocument {
    pub fn from_scenario(s: &BellScenario) -> Self {
        ScenarioDocument {
            regions: s.region_count(),
            settings: s.settings_per_region(),
            outcomes: s.outcome_counts(),
            measurements: s
                .regions()
                .iter()
                .map(|r| {
                    r.elements()
                        .iter()
                        .map(|setting| setting.iter().map(matrix_to_pairs).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_scenario(&self) -> LabResult<BellScenario> {
        if self.measurements.len() != self.regions
            || self.settings.len() != self.regions
            || self.outcomes.len() != self.regions
        {
            return Err(LabError::Invalid(
                "region count disagrees with the listed shapes".into(),
            ));
        }
        let mut regions = Vec::with_capacity(self.regions);
        for (x, region) in self.measurements.iter().enumerate() {
            if region.len() != self.settings[x] || self.outcomes[x].len() != self.settings[x] {
                return Err(LabError::Invalid(format!("region {x}: setting count disagrees")));
            }
            let mut settings = Vec::with_capacity(region.len());
            for (i, setting) in region.iter().enumerate() {
                if setting.len() != self.outcomes[x][i] {
                    return Err(LabError::Invalid(format!(
                        "region {x}, setting {i}: outcome count disagrees"
                    )));
                }
                let elements = setting
                    .iter()
                    .map(|data| {
                        let dim = (data.len() as f64).sqrt().round() as usize;
                        matrix_from_pairs(dim, data)
                    })
                    .collect::<LabResult<Vec<_>>>()?;
                settings.push(elements);
            }
            regions.push(RegionSettings::new(settings)?);
        }
        Ok(BellScenario::new(regions)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyWeight {
    /// `strategy[region][setting]` = reported outcome.
    pub strategy: Vec<Vec<usize>>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub coefficients: Vec<Vec<f64>>,
    pub local_bound: f64,
    pub value: f64,
}

impl From<&BellWitness> for WitnessRecord {
    fn from(w: &BellWitness) -> Self {
        WitnessRecord {
            coefficients: w.coefficients.clone(),
            local_bound: w.local_bound,
            value: w.value,
        }
    }
}

/// Membership verdict with its certificate (weights when local, a violated
/// inequality otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub feasible: bool,
    pub residual: f64,
    pub phase_one_objective: f64,
    pub iterations: usize,
    pub certificate: Vec<StrategyWeight>,
    pub witness: Option<WitnessRecord>,
}

impl From<&MembershipVerdict> for VerdictRecord {
    fn from(v: &MembershipVerdict) -> Self {
        let certificate = v
            .certificate
            .as_ref()
            .map(|m| {
                m.entries()
                    .iter()
                    .map(|(tuple, w)| StrategyWeight {
                        strategy: tuple.iter().map(|s| s.outcomes().to_vec()).collect(),
                        weight: *w,
                    })
                    .collect()
            })
            .unwrap_or_default();
        VerdictRecord {
            feasible: v.feasible,
            residual: v.residual,
            phase_one_objective: v.phase_one_objective,
            iterations: v.iterations,
            certificate,
            witness: v.witness.as_ref().map(WitnessRecord::from),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> LabResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path.display().to_string(), e))?;
    parse_json(&text)
}

/// Parses with the failing field's path in the error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> LabResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        LabError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> LabResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::io(path.display().to_string(), e))
}
