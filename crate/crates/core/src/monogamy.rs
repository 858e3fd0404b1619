//! Monogamy of correlations: anti-commuting expectation vectors, the paired
//! vector decompositions that bound the sum-of-squares criterion, and the
//! singlet-monogamy visibility caps of rotationally invariant states.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::Rng;

use crate::anticommute::{all_shifted_families, OperatorFamily};
use crate::criteria::PauliCorrelations;
use crate::linalg::{c, C64, ZERO};
use crate::pauli::{MeasurementFrame, PauliString};
use crate::random::random_pure;
use crate::state::{effective_state, twirl_werner, Partition, PureState, QuantumState, WernerState};
use crate::{Error, Result};

/// Slack on norm bounds.
pub const NORM_BOUND_TOLERANCE: f64 = 1e-9;
/// Slack on the visibility thresholds.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// `<O_i>` for each member of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationVector {
    components: Vec<f64>,
}

impl ExpectationVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(v) = components.iter().find(|v| !(v.abs() <= 1.0 + NORM_BOUND_TOLERANCE)) {
            return Err(Error::InvalidArgument(format!("expectation {v} outside [-1, 1]")));
        }
        Ok(ExpectationVector { components })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn squared_norm(&self) -> f64 {
        self.components.iter().map(|v| v * v).sum()
    }
}

/// Expectations of arbitrary Pauli strings on `state`.
pub fn pauli_expectations<S: QuantumState + ?Sized>(state: &S, strings: &[PauliString]) -> Result<ExpectationVector> {
    ExpectationVector::new(
        strings
            .iter()
            .map(|p| state.pauli_expectation(p))
            .collect::<Result<Vec<f64>>>()?,
    )
}

/// Expectations of a family's expanded strings; the state must span exactly
/// the family's qubits (regions laid out consecutively).
pub fn expectation_vector<S: QuantumState + ?Sized>(state: &S, family: &OperatorFamily) -> Result<ExpectationVector> {
    if state.qubit_count() != family.total_qubits() {
        return Err(Error::DimensionMismatch {
            expected: family.total_qubits(),
            found: state.qubit_count(),
        });
    }
    pauli_expectations(state, &family.expand())
}

/// Outcome of the paired-vector decomposition of the bipartite criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct PqDecomposition {
    /// `(|sum P|^2 + |sum Q|^2) / (2 N_A^2 N_B^2)`.
    pub value: f64,
    pub max_p_squared_norm: f64,
    pub max_q_squared_norm: f64,
    /// Regions were exchanged because only the first had two or more qubits.
    pub swapped: bool,
}

impl PqDecomposition {
    pub fn max_squared_norm(&self) -> f64 {
        self.max_p_squared_norm.max(self.max_q_squared_norm)
    }
}

/// Recomputes the criterion value `L` from pairwise correlations,
/// `P(ij) = (T_xx(ij), T_xy(ij), T_yx(i,j+1), T_yy(i,j+1))` and
/// `Q(ij) = (T_xx(i,j+1), T_xy(i,j+1), T_yx(ij), T_yy(ij))` with `j + 1` taken
/// cyclically in region B. Each vector collects expectations of four mutually
/// anti-commuting operators, so `|P|, |Q| <= 1` and hence `L <= 1`.
pub fn pq_bound<S: QuantumState + ?Sized>(
    state: &S,
    partition: &Partition,
    frames: &[MeasurementFrame],
) -> Result<PqDecomposition> {
    if partition.region_count() != 2 || frames.len() != 2 {
        return Err(Error::InvalidPartition(
            "paired decomposition needs two regions and two frames".into(),
        ));
    }
    partition.check_fits(state.qubit_count())?;
    let sizes = partition.region_sizes();
    let swapped = sizes[1] < 2 && sizes[0] >= 2;
    if sizes[0].max(sizes[1]) < 2 {
        return Err(Error::InvalidPartition(
            "paired decomposition needs a region with at least two qubits".into(),
        ));
    }
    let (a, b, fa, fb) = if swapped {
        (&partition.regions()[1], &partition.regions()[0], &frames[1], &frames[0])
    } else {
        (&partition.regions()[0], &partition.regions()[1], &frames[0], &frames[1])
    };
    let pair_frames = [*fa, *fb];
    // t[i][j] = (T_xx, T_xy, T_yx, T_yy) for qubit a[i], b[j].
    let mut t = vec![vec![[0.0f64; 4]; b.len()]; a.len()];
    for (i, &qa) in a.iter().enumerate() {
        for (j, &qb) in b.iter().enumerate() {
            let pair = state.reduced(&[qa, qb])?;
            let values = PauliCorrelations::new(&pair)?.project(&pair_frames)?;
            t[i][j].copy_from_slice(values.values());
        }
    }
    let nb = b.len();
    let mut sum_p = [0.0f64; 4];
    let mut sum_q = [0.0f64; 4];
    let (mut max_p, mut max_q) = (0.0f64, 0.0f64);
    for row in &t {
        for j in 0..nb {
            let (here, next) = (row[j], row[(j + 1) % nb]);
            let p = [here[0], here[1], next[2], next[3]];
            let q = [next[0], next[1], here[2], here[3]];
            for k in 0..4 {
                sum_p[k] += p[k];
                sum_q[k] += q[k];
            }
            max_p = max_p.max(p.iter().map(|v| v * v).sum());
            max_q = max_q.max(q.iter().map(|v| v * v).sum());
        }
    }
    let norm = (a.len() * nb) as f64;
    let sq = |v: &[f64; 4]| v.iter().map(|x| x * x).sum::<f64>();
    Ok(PqDecomposition {
        value: (sq(&sum_p) + sq(&sum_q)) / (2.0 * norm * norm),
        max_p_squared_norm: max_p,
        max_q_squared_norm: max_q,
        swapped,
    })
}

/// Multi-region analogue of [`pq_bound`]: every shifted copy of an
/// anti-commuting family contributes one vector of `2^K` pairwise-disjoint
/// correlations, and the copies together visit every qubit tuple once per
/// `x/y` pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDecomposition {
    /// `|sum_v V_v|^2 / (prod N_j)^2`.
    pub value: f64,
    pub max_squared_norm: f64,
    pub vectors: usize,
}

/// `family` is padded to the partition's region sizes (each must be at
/// least the family's). Qubit `l` (1-based) of region `j` is
/// `partition.regions()[j][l - 1]`; pattern bit `0/1` of region `j` selects
/// the first/second axis of `frames[j]`.
pub fn family_decomposition<S: QuantumState + ?Sized>(
    state: &S,
    partition: &Partition,
    frames: &[MeasurementFrame],
    family: &OperatorFamily,
) -> Result<FamilyDecomposition> {
    let k = partition.region_count();
    if family.k() != k || frames.len() != k {
        return Err(Error::LengthMismatch {
            left: family.k().max(frames.len()),
            right: k,
        });
    }
    partition.check_fits(state.qubit_count())?;
    let padded = family.with_region_sizes(&partition.region_sizes())?;
    if padded.len() != 1 << k {
        return Err(Error::InvalidArgument(format!(
            "family has {} members, expected {}",
            padded.len(),
            1usize << k
        )));
    }
    let copies = all_shifted_families(&padded)?;
    // Tensor of every visited qubit tuple, computed once.
    let mut tensors: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    let mut total = vec![0.0f64; 1 << k];
    let mut max_sq = 0.0f64;
    for copy in &copies {
        let mut v = vec![0.0f64; 1 << k];
        for seq in copy.sequences() {
            let tuple: Vec<usize> = seq
                .ops()
                .iter()
                .enumerate()
                .map(|(j, op)| partition.regions()[j][op.qubit - 1])
                .collect();
            if !tensors.contains_key(&tuple) {
                let reduced = state.reduced(&tuple)?;
                let t = PauliCorrelations::new(&reduced)?.project(frames)?;
                tensors.insert(tuple.clone(), t.values().to_vec());
            }
            let pattern = seq.pattern();
            v[pattern] = tensors[&tuple][pattern];
        }
        max_sq = max_sq.max(v.iter().map(|x| x * x).sum());
        for (acc, x) in total.iter_mut().zip(&v) {
            *acc += x;
        }
    }
    let norm: f64 = partition.region_sizes().iter().map(|&n| n as f64).product();
    Ok(FamilyDecomposition {
        value: total.iter().map(|x| x * x).sum::<f64>() / (norm * norm),
        max_squared_norm: max_sq,
        vectors: copies.len(),
    })
}

/// Upper bound on the Werner visibility of any two-region effective state
/// of a rotationally invariant state, from singlet monogamy:
/// `(R + 2) / (3R)` with `R = max(N_A, N_B)`, kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisibilityCap {
    numerator: u64,
    denominator: u64,
    region_sizes: (u64, u64),
}

impl VisibilityCap {
    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn region_sizes(&self) -> (u64, u64) {
        self.region_sizes
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Exact comparison with `p / q`.
    pub fn equals_fraction(&self, p: u64, q: u64) -> bool {
        self.numerator as u128 * q as u128 == p as u128 * self.denominator as u128
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn singlet_monogamy_cap(n_a: u64, n_b: u64) -> Result<VisibilityCap> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidArgument("region sizes must be positive".into()));
    }
    let r = n_a.max(n_b);
    let num = r
        .checked_add(2)
        .ok_or_else(|| Error::InvalidArgument("region size overflows".into()))?;
    let den = r
        .checked_mul(3)
        .ok_or_else(|| Error::InvalidArgument("region size overflows".into()))?;
    let g = gcd(num, den);
    Ok(VisibilityCap {
        numerator: num / g,
        denominator: den / g,
        region_sizes: (n_a, n_b),
    })
}

/// Visibility threshold below which no Bell inequality (POVMs allowed) is
/// violated.
pub const POVM_THRESHOLD: f64 = 5.0 / 12.0;
/// Visibility threshold below which no projective Bell inequality is violated.
pub const PROJECTIVE_THRESHOLD: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WernerRegime {
    /// `V <= 5/12`: local for all measurements.
    NoPovmViolation,
    /// `5/12 < V <= 2/3`: local for projective measurements.
    NoProjectiveViolation,
    /// `V > 2/3`: no locality guarantee from these thresholds.
    Unconstrained,
}

impl WernerRegime {
    pub fn name(self) -> &'static str {
        match self {
            WernerRegime::NoPovmViolation => "no_povm_violation",
            WernerRegime::NoProjectiveViolation => "no_projective_violation",
            WernerRegime::Unconstrained => "unconstrained",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerClassification {
    pub regime: WernerRegime,
    pub cap: VisibilityCap,
    /// `V` above the singlet-monogamy cap: no rotationally invariant state of
    /// these region sizes has this effective visibility.
    pub exceeds_cap: bool,
}

pub fn werner_classify(visibility: f64, n_a: u64, n_b: u64) -> Result<WernerClassification> {
    let v = WernerState::new(visibility)?.visibility();
    let cap = singlet_monogamy_cap(n_a, n_b)?;
    let regime = if v <= POVM_THRESHOLD + THRESHOLD_SLACK {
        WernerRegime::NoPovmViolation
    } else if v <= PROJECTIVE_THRESHOLD + THRESHOLD_SLACK {
        WernerRegime::NoProjectiveViolation
    } else {
        WernerRegime::Unconstrained
    };
    Ok(WernerClassification {
        regime,
        cap,
        exceeds_cap: v > cap.value() + THRESHOLD_SLACK,
    })
}

/// Werner visibility of the twirled bipartite effective state.
pub fn max_effective_visibility<S: QuantumState + ?Sized>(state: &S, partition: &Partition) -> Result<f64> {
    if partition.region_count() != 2 {
        return Err(Error::InvalidPartition("visibility needs exactly two regions".into()));
    }
    Ok(twirl_werner(&effective_state(state, partition)?)?.visibility())
}

/// Result of maximizing the mean singlet fidelity across a bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityOptimum {
    pub fidelity: f64,
    pub visibility: f64,
    pub state: PureState,
    pub iterations: usize,
}

/// `H psi` for `H = mean over cross pairs (a, b) of (1 - SWAP_ab) / 2`, the
/// mean singlet-projector.
fn apply_mean_singlet_projector(psi: &DVector<C64>, n: usize, pairs: &[(usize, usize)]) -> DVector<C64> {
    let dim = psi.len();
    let mut out = DVector::from_element(dim, ZERO);
    let w = c(0.5 / pairs.len() as f64, 0.0);
    for &(a, b) in pairs {
        let (ma, mb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        for i in 0..dim {
            let (ba, bb) = (i & ma != 0, i & mb != 0);
            let j = if ba != bb { i ^ ma ^ mb } else { i };
            out[i] += (psi[i] - psi[j]) * w;
        }
    }
    out
}

/// Power iteration for the largest eigenvalue of the mean singlet
/// projector; the eigenvalue is the best mean singlet fidelity of any pure
/// state, and `V = (4F - 1)/3` the best effective visibility.
pub fn optimize_mean_singlet_fidelity<R: Rng + ?Sized>(
    qubits: usize,
    partition: &Partition,
    max_iterations: usize,
    rng: &mut R,
) -> Result<FidelityOptimum> {
    if partition.region_count() != 2 {
        return Err(Error::InvalidPartition("fidelity needs exactly two regions".into()));
    }
    partition.check_fits(qubits)?;
    let pairs: Vec<(usize, usize)> = partition.regions()[0]
        .iter()
        .flat_map(|&a| partition.regions()[1].iter().map(move |&b| (a, b)))
        .collect();
    let mut psi = random_pure(qubits, rng)?.amplitudes().clone();
    let mut fidelity = 0.0;
    let mut iterations = 0;
    for _ in 0..max_iterations {
        let next = apply_mean_singlet_projector(&psi, qubits, &pairs);
        let rayleigh = psi.dotc(&next).re;
        let norm = next.norm();
        iterations += 1;
        if norm < 1e-300 {
            break;
        }
        psi = next / c(norm, 0.0);
        let converged = (rayleigh - fidelity).abs() < 1e-15;
        fidelity = rayleigh;
        if converged {
            break;
        }
    }
    let state = PureState::normalized(qubits, psi)?;
    let hpsi = apply_mean_singlet_projector(state.amplitudes(), qubits, &pairs);
    let fidelity = state.amplitudes().dotc(&hpsi).re;
    Ok(FidelityOptimum {
        fidelity,
        visibility: (4.0 * fidelity - 1.0) / 3.0,
        state,
        iterations,
    })
}
