//! Dense quantum states, partitions of a register into regions, and the
//! operations that reduce a many-qubit state to the few-qubit effective state
//! seen by collective measurements.
//!
//! Qubit 0 is the most significant bit of a computational-basis index. The
//! local dimension is fixed at 2.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::linalg::{bit, c, hermitian_deviation, min_eigenvalue, trace_product, CMatrix, C64, ONE, ZERO};
use crate::pauli::PauliString;
use crate::{Error, Result};

pub const MAX_DENSE_QUBITS: usize = 12;
pub const MAX_PURE_QUBITS: usize = 20;
/// Largest region (in sites) symmetrized by exact enumeration.
pub const MAX_EXACT_PERMUTATION_REGION: usize = 5;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-9;
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Anything that can produce reduced density matrices and Pauli expectations.
pub trait QuantumState {
    fn qubit_count(&self) -> usize;

    /// Reduced state on `qubits`, in the listed order (first listed qubit
    /// becomes qubit 0 of the result).
    fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix>;

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64>;
}

fn check_ordered_selection(qubits: &[usize], n: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::InvalidQubits("empty qubit selection".into()));
    }
    let mut seen = vec![false; n];
    for &q in qubits {
        if q >= n {
            return Err(Error::InvalidQubits(format!("qubit {q} outside a {n}-qubit register")));
        }
        if core::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidQubits(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Basis offsets for the kept qubits (in listed order) and for the rest.
fn split_offsets(qubits: &[usize], n: usize) -> (Vec<usize>, Vec<usize>) {
    let scatter = |value: usize, positions: &[usize]| -> usize {
        let k = positions.len();
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (((value >> (k - 1 - i)) & 1) << (n - 1 - q)))
    };
    let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let kept = (0..1usize << qubits.len()).map(|r| scatter(r, qubits)).collect();
    let traced = (0..1usize << rest.len()).map(|t| scatter(t, &rest)).collect();
    (kept, traced)
}

fn pauli_phase(p: &PauliString) -> C64 {
    let ny = p.labels().iter().filter(|&&l| l == crate::pauli::PauliLabel::Y).count();
    match ny % 4 {
        0 => ONE,
        1 => c(0.0, 1.0),
        2 => -ONE,
        _ => c(0.0, -1.0),
    }
}

/// Density matrix of `N <= 12` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn check_size(qubits: usize) -> Result<()> {
        if qubits == 0 || qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                requested: qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        Ok(())
    }

    /// Validating constructor: Hermitian, unit trace, positive semi-definite.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!(
                "{}x{} is not a 2^N square matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        Self::check_size(qubits)?;
        let rho = DensityMatrix { qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; the caller guarantees the invariants.
    pub fn from_matrix_unchecked(qubits: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << qubits);
        DensityMatrix { qubits, matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_deviation(&self.matrix);
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let lo = min_eigenvalue(&self.matrix);
        if lo < -PSD_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    pub fn from_pure(psi: &PureState) -> Result<Self> {
        Self::check_size(psi.qubit_count())?;
        let a = psi.amplitudes();
        Ok(DensityMatrix {
            qubits: psi.qubit_count(),
            matrix: a * a.adjoint(),
        })
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        Self::check_size(qubits)?;
        let dim = 1usize << qubits;
        Ok(DensityMatrix {
            qubits,
            matrix: CMatrix::identity(dim, dim) / c(dim as f64, 0.0),
        })
    }

    pub fn basis_state(qubits: usize, index: usize) -> Result<Self> {
        DensityMatrix::from_pure(&PureState::basis(qubits, index)?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(rho op)` for a full-register operator.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(trace_product(&self.matrix, op))
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &DensityMatrix, alpha: f64) -> Result<Self> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: other.qubits,
            });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("mixing weight {alpha} outside [0, 1]")));
        }
        Ok(DensityMatrix {
            qubits: self.qubits,
            matrix: &self.matrix * c(alpha, 0.0) + &other.matrix * c(1.0 - alpha, 0.0),
        })
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let qubits = self.qubits + other.qubits;
        Self::check_size(qubits)?;
        Ok(DensityMatrix {
            qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Partial trace keeping `keep` in ascending qubit order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    /// `U rho U^dagger` for a full-register unitary.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(DensityMatrix {
            qubits: self.qubits,
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    /// Applies the same single-qubit unitary to every qubit: `U^{(x)N} rho U^{(x)N dagger}`.
    pub fn collective_rotation(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != 2 || u.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: u.nrows(),
            });
        }
        let mut m = self.matrix.clone();
        for q in 0..self.qubits {
            m = apply_single_qubit_both_sides(&m, self.qubits, q, u);
        }
        Ok(DensityMatrix {
            qubits: self.qubits,
            matrix: m,
        })
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `map[q]` of the result.
    pub fn relabeled(&self, map: &[usize]) -> Result<Self> {
        if map.len() != self.qubits {
            return Err(Error::LengthMismatch {
                left: map.len(),
                right: self.qubits,
            });
        }
        check_ordered_selection(map, self.qubits)?;
        let basis = qubit_map_on_basis(map, self.qubits);
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(basis[i], basis[j])] = self.matrix[(i, j)];
            }
        }
        Ok(DensityMatrix {
            qubits: self.qubits,
            matrix: out,
        })
    }

    /// `<psi-| rho |psi->` for a two-qubit state.
    pub fn singlet_fidelity(&self) -> Result<f64> {
        if self.qubits != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.qubits,
            });
        }
        let m = &self.matrix;
        Ok(0.5 * (m[(1, 1)] + m[(2, 2)] - m[(1, 2)] - m[(2, 1)]).re)
    }
}

fn apply_single_qubit_both_sides(m: &CMatrix, n: usize, q: usize, u: &CMatrix) -> CMatrix {
    let dim = m.nrows();
    let stride = 1usize << (n - 1 - q);
    // Left multiply: rows.
    let mut left = m.clone();
    for i in 0..dim {
        if i & stride != 0 {
            continue;
        }
        let i1 = i | stride;
        for j in 0..dim {
            let a = m[(i, j)];
            let b = m[(i1, j)];
            left[(i, j)] = u[(0, 0)] * a + u[(0, 1)] * b;
            left[(i1, j)] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
    // Right multiply by U^dagger: columns.
    let mut out = left.clone();
    for j in 0..dim {
        if j & stride != 0 {
            continue;
        }
        let j1 = j | stride;
        for i in 0..dim {
            let a = left[(i, j)];
            let b = left[(i, j1)];
            out[(i, j)] = a * u[(0, 0)].conj() + b * u[(0, 1)].conj();
            out[(i, j1)] = a * u[(1, 0)].conj() + b * u[(1, 1)].conj();
        }
    }
    out
}

/// Basis permutation induced by sending qubit `q` to position `map[q]`.
fn qubit_map_on_basis(map: &[usize], n: usize) -> Vec<usize> {
    (0..1usize << n)
        .map(|b| (0..n).fold(0usize, |acc, q| acc | (bit(b, q, n) << (n - 1 - map[q]))))
        .collect()
}

impl QuantumState for DensityMatrix {
    fn qubit_count(&self) -> usize {
        self.qubits
    }

    fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        check_ordered_selection(qubits, self.qubits)?;
        let (kept, traced) = split_offsets(qubits, self.qubits);
        let k = kept.len();
        let mut out = CMatrix::zeros(k, k);
        for (r, &ro) in kept.iter().enumerate() {
            for (cc, &co) in kept.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &traced {
                    acc += self.matrix[(ro | t, co | t)];
                }
                out[(r, cc)] = acc;
            }
        }
        Ok(DensityMatrix {
            qubits: qubits.len(),
            matrix: out,
        })
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.qubit_count() != self.qubits {
            return Err(Error::LengthMismatch {
                left: p.qubit_count(),
                right: self.qubits,
            });
        }
        let (x, z) = p.xz_masks();
        let mut acc = ZERO;
        for b in 0..self.dim() {
            let v = self.matrix[(b, b ^ x)];
            if (b & z).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        Ok((acc * pauli_phase(p)).re)
    }
}

/// Normalized state vector of `N <= 20` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn check_size(qubits: usize) -> Result<()> {
        if qubits == 0 || qubits > MAX_PURE_QUBITS {
            return Err(Error::TooManyQubits {
                requested: qubits,
                limit: MAX_PURE_QUBITS,
            });
        }
        Ok(())
    }

    pub fn new(qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        Self::check_size(qubits)?;
        if amplitudes.len() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("state norm {norm} != 1")));
        }
        Ok(PureState { qubits, amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        PureState::new(qubits, amplitudes / c(norm, 0.0))
    }

    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!("{dim} amplitudes is not 2^N")));
        }
        PureState::new(dim.trailing_zeros() as usize, DVector::from_column_slice(amps))
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        Self::check_size(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(PureState { qubits, amplitudes: v })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let qubits = self.qubits + other.qubits;
        Self::check_size(qubits)?;
        Ok(PureState {
            qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

impl QuantumState for PureState {
    fn qubit_count(&self) -> usize {
        self.qubits
    }

    fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        check_ordered_selection(qubits, self.qubits)?;
        let (kept, traced) = split_offsets(qubits, self.qubits);
        let k = kept.len();
        let a = &self.amplitudes;
        let mut out = CMatrix::zeros(k, k);
        for (r, &ro) in kept.iter().enumerate() {
            for cc in r..k {
                let co = kept[cc];
                let mut acc = ZERO;
                for &t in &traced {
                    acc += a[ro | t] * a[co | t].conj();
                }
                out[(r, cc)] = acc;
                out[(cc, r)] = acc.conj();
            }
        }
        Ok(DensityMatrix {
            qubits: qubits.len(),
            matrix: out,
        })
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.qubit_count() != self.qubits {
            return Err(Error::LengthMismatch {
                left: p.qubit_count(),
                right: self.qubits,
            });
        }
        let (x, z) = p.xz_masks();
        let a = &self.amplitudes;
        let mut acc = ZERO;
        for b in 0..a.len() {
            let v = a[b ^ x].conj() * a[b];
            if (b & z).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        Ok((acc * pauli_phase(p)).re)
    }
}

/// Either representation, for callers that handle both.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl AnyState {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            AnyState::Pure(p) => p.to_density(),
            AnyState::Mixed(m) => Ok(m.clone()),
        }
    }
}

impl QuantumState for AnyState {
    fn qubit_count(&self) -> usize {
        match self {
            AnyState::Pure(p) => p.qubit_count(),
            AnyState::Mixed(m) => m.qubit_count(),
        }
    }

    fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        match self {
            AnyState::Pure(p) => p.reduced(qubits),
            AnyState::Mixed(m) => m.reduced(qubits),
        }
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        match self {
            AnyState::Pure(s) => s.pauli_expectation(p),
            AnyState::Mixed(m) => m.pauli_expectation(p),
        }
    }
}

/// Tensor product of independent blocks, each a state on the listed global
/// qubits. Pauli expectations factorize over blocks, so registers far beyond
/// dense size stay cheap as long as each block is small.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProductState {
    qubits: usize,
    blocks: Vec<(Vec<usize>, AnyState)>,
}

impl BlockProductState {
    pub fn new(blocks: Vec<(Vec<usize>, AnyState)>) -> Result<Self> {
        let qubits: usize = blocks.iter().map(|(q, _)| q.len()).sum();
        let mut seen = vec![false; qubits];
        for (qs, state) in &blocks {
            if qs.len() != state.qubit_count() {
                return Err(Error::LengthMismatch {
                    left: qs.len(),
                    right: state.qubit_count(),
                });
            }
            for &q in qs {
                if q >= qubits || core::mem::replace(&mut seen[q], true) {
                    return Err(Error::InvalidQubits(format!(
                        "block qubit {q} repeated or out of range"
                    )));
                }
            }
        }
        Ok(BlockProductState { qubits, blocks })
    }

    pub fn blocks(&self) -> &[(Vec<usize>, AnyState)] {
        &self.blocks
    }
}

impl QuantumState for BlockProductState {
    fn qubit_count(&self) -> usize {
        self.qubits
    }

    fn reduced(&self, qubits: &[usize]) -> Result<DensityMatrix> {
        check_ordered_selection(qubits, self.qubits)?;
        let mut order = Vec::with_capacity(qubits.len());
        let mut acc: Option<DensityMatrix> = None;
        for (qs, state) in &self.blocks {
            let local: Vec<usize> = qs
                .iter()
                .enumerate()
                .filter(|(_, q)| qubits.contains(q))
                .map(|(i, _)| i)
                .collect();
            if local.is_empty() {
                continue;
            }
            order.extend(local.iter().map(|&i| qs[i]));
            let part = state.reduced(&local)?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.tensor(&part)?,
            });
        }
        let joint = acc.expect("selection is non-empty");
        let map: Vec<usize> = order
            .iter()
            .map(|q| qubits.iter().position(|x| x == q).expect("selected"))
            .collect();
        joint.relabeled(&map)
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.qubit_count() != self.qubits {
            return Err(Error::LengthMismatch {
                left: p.qubit_count(),
                right: self.qubits,
            });
        }
        let mut value = 1.0;
        for (qs, state) in &self.blocks {
            let labels: Vec<_> = qs.iter().map(|&q| p.labels()[q]).collect();
            if labels.iter().all(|l| l.is_identity()) {
                continue;
            }
            value *= state.pauli_expectation(&PauliString::new(labels)?)?;
            if value == 0.0 {
                break;
            }
        }
        Ok(value)
    }
}

/// Partial trace keeping `keep`, output in ascending qubit order.
pub fn partial_trace<S: QuantumState + ?Sized>(state: &S, keep: &[usize]) -> Result<DensityMatrix> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    state.reduced(&sorted)
}

/// Disjoint, nonempty, labeled regions of a register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    regions: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(regions: Vec<Vec<usize>>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidPartition("no regions".into()));
        }
        let mut seen: Vec<usize> = Vec::new();
        for (r, region) in regions.iter().enumerate() {
            if region.is_empty() {
                return Err(Error::InvalidPartition(format!("region {r} is empty")));
            }
            for &q in region {
                if seen.contains(&q) {
                    return Err(Error::InvalidPartition(format!("qubit {q} appears twice")));
                }
                seen.push(q);
            }
        }
        Ok(Partition { regions })
    }

    /// Consecutive regions of the given sizes starting at qubit 0.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let regions = sizes
            .iter()
            .map(|&s| {
                let r: Vec<usize> = (next..next + s).collect();
                next += s;
                r
            })
            .collect();
        Partition::new(regions)
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        self.regions.iter().map(Vec::len).collect()
    }

    pub fn max_qubit(&self) -> usize {
        self.regions.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn check_fits(&self, qubits: usize) -> Result<()> {
        if self.max_qubit() >= qubits {
            return Err(Error::InvalidPartition(format!(
                "partition uses qubit {} but the state has {qubits} qubits",
                self.max_qubit()
            )));
        }
        Ok(())
    }

    /// Same regions in the opposite order (two-region partitions).
    pub fn swapped(&self) -> Self {
        let mut regions = self.regions.clone();
        regions.reverse();
        Partition { regions }
    }

    /// Every unordered split of `0..n` into two regions covering all qubits,
    /// each of size at least `min_size`. Qubit 0 always lands in region A.
    pub fn bipartitions(n: usize, min_size: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        if n < 2 {
            return out;
        }
        for m in 0..1usize << (n - 1) {
            // Bits of m assign qubits 1..n to region B.
            let b: Vec<usize> = (1..n).filter(|q| m >> (q - 1) & 1 == 1).collect();
            let a: Vec<usize> = (0..n).filter(|q| !b.contains(q)).collect();
            if a.len() >= min_size.max(1) && b.len() >= min_size.max(1) {
                out.push(Partition { regions: vec![a, b] });
            }
        }
        out
    }

    /// Groups each region into consecutive blocks of `block_size` qubits.
    pub fn blocks(&self, block_size: usize) -> Result<BlockLayout> {
        if block_size == 0 {
            return Err(Error::InvalidPartition("block size 0".into()));
        }
        let regions = self
            .regions
            .iter()
            .enumerate()
            .map(|(r, region)| {
                if region.len() % block_size != 0 {
                    return Err(Error::InvalidPartition(format!(
                        "region {r} has {} qubits, not a multiple of block size {block_size}",
                        region.len()
                    )));
                }
                Ok(region.chunks(block_size).map(<[usize]>::to_vec).collect())
            })
            .collect::<Result<Vec<Vec<Vec<usize>>>>>()?;
        Ok(BlockLayout { regions, block_size })
    }
}

/// Regions subdivided into equally sized blocks of qubits. Each block is one
/// measurement site; block size 1 is the single-spin case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    regions: Vec<Vec<Vec<usize>>>,
    block_size: usize,
}

impl BlockLayout {
    pub fn regions(&self) -> &[Vec<Vec<usize>>] {
        &self.regions
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Number of blocks per region.
    pub fn sites_per_region(&self) -> Vec<usize> {
        self.regions.iter().map(Vec::len).collect()
    }

    fn check_fits(&self, qubits: usize) -> Result<()> {
        match self.regions.iter().flatten().flatten().copied().max() {
            Some(q) if q >= qubits => Err(Error::InvalidPartition(format!(
                "layout uses qubit {q} but the state has {qubits} qubits"
            ))),
            _ => Ok(()),
        }
    }
}

fn cartesian(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut i| {
        let mut out = vec![0; sizes.len()];
        for (slot, &s) in out.iter_mut().zip(sizes).rev() {
            *slot = i % s;
            i /= s;
        }
        out
    })
}

/// Uniform average of the reduced states on one qubit per region, with the
/// region order giving the output qubit order.
pub fn effective_state<S: QuantumState + ?Sized>(state: &S, partition: &Partition) -> Result<DensityMatrix> {
    partition.check_fits(state.qubit_count())?;
    effective_block_state(state, &partition.blocks(1)?)
}

/// Same as [`effective_state`] with one block (of `block_size` qubits) per
/// region; output has `K * block_size` qubits.
pub fn effective_block_state<S: QuantumState + ?Sized>(state: &S, layout: &BlockLayout) -> Result<DensityMatrix> {
    layout.check_fits(state.qubit_count())?;
    let out_qubits = layout.region_count() * layout.block_size;
    DensityMatrix::check_size(out_qubits)?;
    let sizes = layout.sites_per_region();
    let dim = 1usize << out_qubits;
    let mut acc = CMatrix::zeros(dim, dim);
    let mut count = 0usize;
    for choice in cartesian(&sizes) {
        let qubits: Vec<usize> = choice
            .iter()
            .enumerate()
            .flat_map(|(r, &b)| layout.regions[r][b].iter().copied())
            .collect();
        acc += state.reduced(&qubits)?.matrix;
        count += 1;
    }
    acc /= c(count as f64, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(out_qubits, acc))
}

/// All two-qubit reductions of one state, computed once. Bipartite effective
/// states for many partitions of the same state are then cheap averages.
#[derive(Debug, Clone)]
pub struct PairReductions {
    qubits: usize,
    // pairs[i][j] for i < j, ordered (i, j).
    pairs: Vec<Vec<Option<DensityMatrix>>>,
}

impl PairReductions {
    pub fn new<S: QuantumState + ?Sized>(state: &S) -> Result<Self> {
        let n = state.qubit_count();
        let mut pairs = vec![vec![None; n]; n];
        for (i, row) in pairs.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
                *slot = Some(state.reduced(&[i, j])?);
            }
        }
        Ok(PairReductions { qubits: n, pairs })
    }

    /// Reduced state on `(i, j)` in that order.
    pub fn pair(&self, i: usize, j: usize) -> Result<DensityMatrix> {
        if i == j || i >= self.qubits || j >= self.qubits {
            return Err(Error::InvalidQubits(format!("pair ({i}, {j})")));
        }
        if i < j {
            Ok(self.pairs[i][j].clone().expect("filled"))
        } else {
            self.pairs[j][i].as_ref().expect("filled").relabeled(&[1, 0])
        }
    }

    /// Bipartite effective state of a two-region partition.
    pub fn effective(&self, partition: &Partition) -> Result<DensityMatrix> {
        if partition.region_count() != 2 {
            return Err(Error::InvalidPartition("pair cache needs exactly two regions".into()));
        }
        partition.check_fits(self.qubits)?;
        let (a, b) = (&partition.regions[0], &partition.regions[1]);
        let mut acc = CMatrix::zeros(4, 4);
        for &i in a {
            for &j in b {
                acc += self.pair(i, j)?.matrix;
            }
        }
        acc /= c((a.len() * b.len()) as f64, 0.0);
        Ok(DensityMatrix::from_matrix_unchecked(2, acc))
    }
}

/// Lexicographic successor; false once the last permutation was reached.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// Qubit map for one choice of block permutation per region.
fn block_qubit_map(layout: &BlockLayout, perms: &[&[usize]], n: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..n).collect();
    for (region, perm) in layout.regions.iter().zip(perms) {
        for (src, &dst) in perm.iter().enumerate() {
            for (&qs, &qd) in region[src].iter().zip(&region[dst]) {
                map[qs] = qd;
            }
        }
    }
    map
}

fn conjugate_by_qubit_maps(rho: &DensityMatrix, maps: &[Vec<usize>]) -> DensityMatrix {
    let n = rho.qubits;
    let dim = rho.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for map in maps {
        let basis = qubit_map_on_basis(map, n);
        for i in 0..dim {
            for j in 0..dim {
                acc[(basis[i], basis[j])] += rho.matrix[(i, j)];
            }
        }
    }
    acc /= c(maps.len() as f64, 0.0);
    DensityMatrix::from_matrix_unchecked(n, acc)
}

/// Average of `rho` conjugated by every product of within-region qubit
/// permutations. Exact enumeration; regions larger than
/// [`MAX_EXACT_PERMUTATION_REGION`] are rejected (see
/// [`symmetrize_blocks_sampled`]).
pub fn permutation_symmetrize(rho: &DensityMatrix, partition: &Partition) -> Result<DensityMatrix> {
    partition.check_fits(rho.qubits)?;
    symmetrize_blocks(rho, &partition.blocks(1)?)
}

/// Exact block-permutation average: blocks of a region are permuted as units.
pub fn symmetrize_blocks(rho: &DensityMatrix, layout: &BlockLayout) -> Result<DensityMatrix> {
    layout.check_fits(rho.qubits)?;
    let sizes = layout.sites_per_region();
    if let Some(&big) = sizes.iter().find(|&&s| s > MAX_EXACT_PERMUTATION_REGION) {
        return Err(Error::InvalidArgument(format!(
            "region with {big} sites exceeds exact enumeration limit {MAX_EXACT_PERMUTATION_REGION}"
        )));
    }
    let per_region: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&s| all_permutations(s)).collect();
    let counts: Vec<usize> = per_region.iter().map(Vec::len).collect();
    let maps: Vec<Vec<usize>> = cartesian(&counts)
        .map(|choice| {
            let perms: Vec<&[usize]> = choice
                .iter()
                .enumerate()
                .map(|(r, &i)| per_region[r][i].as_slice())
                .collect();
            block_qubit_map(layout, &perms, rho.qubits)
        })
        .collect();
    Ok(conjugate_by_qubit_maps(rho, &maps))
}

/// Monte Carlo version of [`symmetrize_blocks`] with `samples` uniformly drawn
/// permutation products. Only the cross-region reductions converge to the
/// effective state, and only in expectation.
pub fn symmetrize_blocks_sampled<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    layout: &BlockLayout,
    samples: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    layout.check_fits(rho.qubits)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("zero permutation samples".into()));
    }
    let sizes = layout.sites_per_region();
    let maps: Vec<Vec<usize>> = (0..samples)
        .map(|_| {
            let perms: Vec<Vec<usize>> = sizes
                .iter()
                .map(|&s| crate::random::random_permutation(s, rng))
                .collect();
            let refs: Vec<&[usize]> = perms.iter().map(Vec::as_slice).collect();
            block_qubit_map(layout, &refs, rho.qubits)
        })
        .collect();
    Ok(conjugate_by_qubit_maps(rho, &maps))
}

/// Thermal state `exp(-beta H) / Z` of `H = sum_e J_e sigma_a . sigma_b`.
pub fn heisenberg_thermal(qubits: usize, beta: f64, couplings: &[(usize, usize, f64)]) -> Result<DensityMatrix> {
    DensityMatrix::check_size(qubits)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("inverse temperature {beta}")));
    }
    let n = qubits;
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for &(a, b, j) in couplings {
        if a >= n || b >= n || a == b || !j.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling ({a}, {b}, {j})")));
        }
        // sigma.sigma = 2 SWAP - 1
        let ma = 1usize << (n - 1 - a);
        let mb = 1usize << (n - 1 - b);
        for s in 0..dim {
            h[(s, s)] -= j;
            let swapped = if ((s & ma) != 0) != ((s & mb) != 0) {
                s ^ ma ^ mb
            } else {
                s
            };
            h[(swapped, s)] += 2.0 * j;
        }
    }
    let eig = h.symmetric_eigen();
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| libm::exp(-beta * (e - lowest)))
        .collect();
    let z: f64 = weights.iter().sum();
    let mut rho = DMatrix::<f64>::zeros(dim, dim);
    for (k, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        rho += (v * v.transpose()) * (*w / z);
    }
    Ok(DensityMatrix::from_matrix_unchecked(n, rho.map(|x| c(x, 0.0))))
}

/// Two-qubit rotationally invariant state `V |psi-><psi-| + (1 - V) 1/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerState {
    visibility: f64,
}

impl WernerState {
    pub const MIN_VISIBILITY: f64 = -1.0 / 3.0;

    pub fn new(visibility: f64) -> Result<Self> {
        if !(Self::MIN_VISIBILITY - 1e-12..=1.0 + 1e-12).contains(&visibility) {
            return Err(Error::VisibilityOutOfRange(visibility));
        }
        Ok(WernerState { visibility })
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn singlet_fidelity(&self) -> f64 {
        (3.0 * self.visibility + 1.0) / 4.0
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = self.visibility;
        let singlet = singlet().to_density().expect("two qubits").matrix;
        let m = singlet * c(v, 0.0) + CMatrix::identity(4, 4) * c((1.0 - v) / 4.0, 0.0);
        DensityMatrix::from_matrix_unchecked(2, m)
    }
}

/// Werner visibility of the twirled state, from the singlet fidelity:
/// `V = (4F - 1) / 3`.
pub fn twirl_werner(rho2: &DensityMatrix) -> Result<WernerState> {
    let f = rho2.singlet_fidelity()?;
    let v = (4.0 * f - 1.0) / 3.0;
    // Absorb rounding just outside the range.
    let v = if v < WernerState::MIN_VISIBILITY && v > WernerState::MIN_VISIBILITY - 1e-9 {
        WernerState::MIN_VISIBILITY
    } else if v > 1.0 && v < 1.0 + 1e-9 {
        1.0
    } else {
        v
    };
    WernerState::new(v)
}

fn singlet() -> PureState {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    PureState {
        qubits: 2,
        amplitudes: DVector::from_vec(vec![ZERO, c(h, 0.0), c(-h, 0.0), ZERO]),
    }
}

/// Deterministic fixture states by name:
///
/// * `singlet` (N = 2), `ghz`, `w`, `zero` (all qubits in |0>),
/// * `singlet_cover` (even N, singlets on pairs (0,1), (2,3), ...),
/// * `max_mixed`.
pub fn named_state(name: &str, qubits: usize) -> Result<AnyState> {
    let dim_check = |n: usize| PureState::check_size(n);
    match name {
        "singlet" => {
            if qubits != 2 {
                return Err(Error::InvalidArgument("the singlet has exactly 2 qubits".into()));
            }
            Ok(AnyState::Pure(singlet()))
        }
        "ghz" => {
            dim_check(qubits)?;
            let dim = 1usize << qubits;
            let h = core::f64::consts::FRAC_1_SQRT_2;
            let mut v = DVector::from_element(dim, ZERO);
            v[0] = c(h, 0.0);
            v[dim - 1] = c(h, 0.0);
            Ok(AnyState::Pure(PureState { qubits, amplitudes: v }))
        }
        "w" => {
            dim_check(qubits)?;
            let dim = 1usize << qubits;
            let amp = c(1.0 / libm::sqrt(qubits as f64), 0.0);
            let mut v = DVector::from_element(dim, ZERO);
            for q in 0..qubits {
                v[1 << q] = amp;
            }
            Ok(AnyState::Pure(PureState { qubits, amplitudes: v }))
        }
        "zero" | "product" => Ok(AnyState::Pure(PureState::basis(qubits, 0)?)),
        "singlet_cover" => {
            if !qubits.is_multiple_of(2) {
                return Err(Error::InvalidArgument("singlet cover needs an even qubit count".into()));
            }
            dim_check(qubits)?;
            let mut s = singlet();
            for _ in 1..qubits / 2 {
                s = s.tensor(&singlet())?;
            }
            Ok(AnyState::Pure(s))
        }
        "max_mixed" => Ok(AnyState::Mixed(DensityMatrix::maximally_mixed(qubits)?)),
        other => Err(Error::UnknownState(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::random::{random_mixed, random_pure, random_su2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn dm(name: &str, n: usize) -> DensityMatrix {
        named_state(name, n).unwrap().to_density().unwrap()
    }

    #[test]
    fn singlet_marginal_is_maximally_mixed() {
        let r = partial_trace(&dm("singlet", 2), &[0]).unwrap();
        assert!(max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(1).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn product_marginal() {
        // |0> (x) |1>
        let rho = DensityMatrix::basis_state(2, 0b01).unwrap();
        let r = rho.partial_trace(&[1]).unwrap();
        assert!(max_abs_diff(r.matrix(), DensityMatrix::basis_state(1, 1).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn ghz_two_qubit_marginal() {
        let r = partial_trace(&dm("ghz", 3), &[0, 1]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        assert!(max_abs_diff(r.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn pure_and_dense_reductions_agree() {
        let mut g = rng(7);
        let psi = random_pure(4, &mut g).unwrap();
        let rho = psi.to_density().unwrap();
        for sel in [&[2usize, 0][..], &[3, 1, 0], &[1]] {
            let a = psi.reduced(sel).unwrap();
            let b = rho.reduced(sel).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-13);
        }
    }

    #[test]
    fn bad_selection_rejected() {
        let rho = dm("ghz", 3);
        assert!(matches!(rho.partial_trace(&[]), Err(Error::InvalidQubits(_))));
        assert!(matches!(rho.partial_trace(&[3]), Err(Error::InvalidQubits(_))));
        assert!(matches!(rho.reduced(&[1, 1]), Err(Error::InvalidQubits(_))));
    }

    #[test]
    fn pauli_expectation_matches_dense_trace() {
        let mut g = rng(8);
        let rho = random_mixed(3, 8, &mut g).unwrap();
        let psi = random_pure(3, &mut g).unwrap();
        let psi_rho = psi.to_density().unwrap();
        for s in ["XYZ", "YYI", "IZX", "YXY"] {
            let p: PauliString = s.parse().unwrap();
            let dense = rho.expectation(&p.to_matrix()).unwrap();
            assert!((rho.pauli_expectation(&p).unwrap() - dense.re).abs() < 1e-13);
            let dense = psi_rho.expectation(&p.to_matrix()).unwrap();
            assert!((psi.pauli_expectation(&p).unwrap() - dense.re).abs() < 1e-13);
        }
    }

    #[test]
    fn effective_state_of_identical_products() {
        // sigma^(x)4 with a generic single-qubit sigma.
        let mut g = rng(9);
        let sigma = random_mixed(1, 2, &mut g).unwrap();
        let mut rho = sigma.clone();
        for _ in 0..3 {
            rho = rho.tensor(&sigma).unwrap();
        }
        let part = Partition::new(vec![vec![0, 3], vec![1, 2]]).unwrap();
        let eff = effective_state(&rho, &part).unwrap();
        let expected = sigma.tensor(&sigma).unwrap();
        assert!(max_abs_diff(eff.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn effective_state_single_pair_is_identity_map() {
        let s = dm("singlet", 2);
        let eff = effective_state(&s, &Partition::contiguous(&[1, 1]).unwrap()).unwrap();
        assert!(max_abs_diff(eff.matrix(), s.matrix()) < 1e-15);
    }

    #[test]
    fn effective_state_two_term_average() {
        // |psi-><psi-|_{01} (x) |0><0|_2 with A = {0}, B = {1, 2}.
        let rho = dm("singlet", 2)
            .tensor(&DensityMatrix::basis_state(1, 0).unwrap())
            .unwrap();
        let part = Partition::new(vec![vec![0], vec![1, 2]]).unwrap();
        let eff = effective_state(&rho, &part).unwrap();
        // Oracle: average of the two pair marginals written down by hand.
        let singlet = dm("singlet", 2);
        let half_id_zero = DensityMatrix::maximally_mixed(1)
            .unwrap()
            .tensor(&DensityMatrix::basis_state(1, 0).unwrap())
            .unwrap();
        let expected = singlet.mix(&half_id_zero, 0.5).unwrap();
        assert!(max_abs_diff(eff.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn pair_cache_matches_effective_state() {
        let mut g = rng(10);
        let psi = random_pure(6, &mut g).unwrap();
        let cache = PairReductions::new(&psi).unwrap();
        for part in Partition::bipartitions(6, 2).iter().take(10) {
            let a = cache.effective(part).unwrap();
            let b = effective_state(&psi, part).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-13);
        }
    }

    #[test]
    fn bipartition_enumeration_counts() {
        // Unordered covering splits of 6 qubits with both sides >= 2:
        // (2^6 - 2) / 2 - 6 = 25.
        assert_eq!(Partition::bipartitions(6, 2).len(), 25);
        assert_eq!(Partition::bipartitions(4, 1).len(), 7);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0], vec![0, 1]]).is_err());
        assert!(Partition::new(vec![vec![0], vec![]]).is_err());
        let p = Partition::new(vec![vec![0], vec![5]]).unwrap();
        let rho = dm("ghz", 3);
        assert!(matches!(effective_state(&rho, &p), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn symmetrize_trivial_regions_is_identity() {
        let mut g = rng(11);
        let rho = random_mixed(2, 4, &mut g).unwrap();
        let s = permutation_symmetrize(&rho, &Partition::contiguous(&[1, 1]).unwrap()).unwrap();
        assert!(max_abs_diff(s.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn symmetric_state_is_fixed_point() {
        let rho = dm("ghz", 4);
        let s = permutation_symmetrize(&rho, &Partition::contiguous(&[2, 2]).unwrap()).unwrap();
        assert!(max_abs_diff(s.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn symmetrized_cross_pairs_equal_effective_state() {
        let mut g = rng(12);
        let rho = random_mixed(4, 16, &mut g).unwrap();
        let part = Partition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let sym = permutation_symmetrize(&rho, &part).unwrap();
        let eff = effective_state(&rho, &part).unwrap();
        for i in [0, 1] {
            for j in [2, 3] {
                let r = sym.reduced(&[i, j]).unwrap();
                assert!(max_abs_diff(r.matrix(), eff.matrix()) < 1e-13);
            }
        }
        // Idempotent, trace and positivity preserving.
        let twice = permutation_symmetrize(&sym, &part).unwrap();
        assert!(max_abs_diff(twice.matrix(), sym.matrix()) < 1e-14);
        sym.validate().unwrap();
    }

    #[test]
    fn oversized_region_needs_sampling() {
        let rho = DensityMatrix::maximally_mixed(7).unwrap();
        let part = Partition::contiguous(&[6, 1]).unwrap();
        assert!(permutation_symmetrize(&rho, &part).is_err());
        let layout = part.blocks(1).unwrap();
        let s = symmetrize_blocks_sampled(&rho, &layout, 3, &mut rng(1)).unwrap();
        assert!(max_abs_diff(s.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn thermal_infinite_temperature() {
        let rho = heisenberg_thermal(3, 0.0, &[(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(3).unwrap().matrix()) < 1e-13);
    }

    #[test]
    fn thermal_antiferromagnet_ground_state_is_singlet() {
        let rho = heisenberg_thermal(2, 40.0, &[(0, 1, 1.0)]).unwrap();
        // Singlet energy -3, triplet +1: the excited weight is 3 e^{-160}.
        assert!(max_abs_diff(rho.matrix(), dm("singlet", 2).matrix()) < 1e-12);
    }

    #[test]
    fn thermal_state_is_rotation_invariant() {
        let mut g = rng(13);
        let rho = heisenberg_thermal(4, 0.7, &[(0, 1, 1.0), (1, 2, -0.4), (2, 3, 0.9), (0, 3, 0.3)]).unwrap();
        rho.validate().unwrap();
        for _ in 0..20 {
            let u = random_su2(&mut g);
            let r = rho.collective_rotation(&u).unwrap();
            assert!(max_abs_diff(r.matrix(), rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn werner_visibility_examples() {
        assert!((twirl_werner(&dm("singlet", 2)).unwrap().visibility() - 1.0).abs() < 1e-15);
        assert!(twirl_werner(&dm("max_mixed", 2)).unwrap().visibility().abs() < 1e-15);
        let v = twirl_werner(&DensityMatrix::basis_state(2, 0).unwrap())
            .unwrap()
            .visibility();
        assert!((v + 1.0 / 3.0).abs() < 1e-15);
        assert!(twirl_werner(&dm("ghz", 3)).is_err());
        assert!(WernerState::new(1.1).is_err());
        assert!(WernerState::new(-0.34).is_err());
    }

    #[test]
    fn named_states() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let AnyState::Pure(s) = named_state("singlet", 2).unwrap() else {
            panic!()
        };
        let expect = [0.0, h, -h, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
        let AnyState::Pure(g) = named_state("ghz", 3).unwrap() else {
            panic!()
        };
        assert!((g.amplitudes()[0].re - h).abs() < 1e-15 && (g.amplitudes()[7].re - h).abs() < 1e-15);
        let m = dm("max_mixed", 2);
        assert!(max_abs_diff(m.matrix(), &(CMatrix::identity(4, 4) * c(0.25, 0.0))) < 1e-15);
        assert!(matches!(named_state("cat", 2), Err(Error::UnknownState(_))));
        assert!(matches!(named_state("ghz", 21), Err(Error::TooManyQubits { .. })));
        assert!(matches!(
            DensityMatrix::maximally_mixed(13),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn validating_constructor_rejects_bad_matrices() {
        let mut m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(m.clone()).is_err()); // trace 2
        m[(1, 1)] = c(-0.2, 0.0);
        m[(0, 0)] = c(1.2, 0.0);
        assert!(DensityMatrix::new(m).is_err()); // negative eigenvalue
        assert!(DensityMatrix::new(CMatrix::identity(3, 3) / c(3.0, 0.0)).is_err());
    }

    #[test]
    fn block_product_matches_dense_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = random_mixed(2, 2, &mut rng).unwrap();
        let b = random_pure(2, &mut rng).unwrap();
        // Blocks on interleaved qubits {0, 2} and {1, 3}.
        let prod = BlockProductState::new(vec![
            (vec![0, 2], AnyState::Mixed(a.clone())),
            (vec![1, 3], AnyState::Pure(b.clone())),
        ])
        .unwrap();
        let dense = a
            .tensor(&b.to_density().unwrap())
            .unwrap()
            .relabeled(&[0, 2, 1, 3])
            .unwrap();
        for s in ["XYZI", "IXYZ", "YYYY", "ZIIX"] {
            let p: PauliString = s.parse().unwrap();
            assert!((prod.pauli_expectation(&p).unwrap() - dense.pauli_expectation(&p).unwrap()).abs() < 1e-12);
        }
        for sel in [vec![3, 0], vec![1, 2, 0], vec![2]] {
            let r1 = prod.reduced(&sel).unwrap();
            let r2 = dense.reduced(&sel).unwrap();
            assert!(max_abs_diff(r1.matrix(), r2.matrix()) < 1e-12);
        }
        assert!(BlockProductState::new(vec![(vec![0, 0], AnyState::Mixed(a))]).is_err());
    }
}
