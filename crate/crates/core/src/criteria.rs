//! Correlation tensors of effective states, the two-setting sum-of-squares
//! LHV criterion, magnetization correlations and Bell parameters built from
//! them.
//!
//! The criterion is sufficient only: `L <= 1` guarantees an explicit LHV
//! model for the `2^K` correlations of a two-setting experiment whose local
//! settings span the frame; `L > 1` is inconclusive on its own (pair it with
//! [`crate::bell::chsh_optimize`] for a violation witness).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{kron_all, trace_product, CMatrix, Radix};
use crate::pauli::{Direction, MeasurementFrame, PauliLabel, PauliString};
use crate::state::{effective_state, DensityMatrix, Partition, QuantumState};
use crate::{Error, Result};

/// Slack on the `L <= 1` test.
pub const ZB_TOLERANCE: f64 = 1e-9;
/// Allowed disagreement between the two magnetization-correlation routes.
pub const ROUTE_TOLERANCE: f64 = 1e-9;

/// All `3^K` Pauli correlations `Tr(sigma_a1 (x) ... (x) sigma_aK rho)` of a
/// `K`-qubit state, indexed with axis digits x=0, y=1, z=2 (first qubit most
/// significant). Projecting onto any set of frames is then a cheap
/// contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCorrelations {
    qubits: usize,
    values: Vec<f64>,
}

impl PauliCorrelations {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let k = rho.qubit_count();
        let radix = Radix::new(vec![3; k]);
        let values = radix
            .iter()
            .map(|digits| {
                let labels = digits
                    .iter()
                    .map(|&d| PauliLabel::from_axis(d).expect("axis digit"))
                    .collect();
                rho.pauli_expectation(&PauliString::new(labels)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(PauliCorrelations { qubits: k, values })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn get(&self, axes: &[usize]) -> f64 {
        self.values[Radix::new(vec![3; self.qubits]).index(axes)]
    }

    /// Two-qubit correlation matrix `C[a][b]`.
    pub fn matrix2(&self) -> Option<[[f64; 3]; 3]> {
        (self.qubits == 2).then(|| {
            let mut m = [[0.0; 3]; 3];
            for (a, row) in m.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = self.values[3 * a + b];
                }
            }
            m
        })
    }

    /// Contracts with one observable direction per qubit:
    /// `Tr((n_1 . sigma) (x) ... (x) (n_K . sigma) rho)`.
    pub fn contract(&self, dirs: &[Direction]) -> Result<f64> {
        if dirs.len() != self.qubits {
            return Err(Error::LengthMismatch {
                left: dirs.len(),
                right: self.qubits,
            });
        }
        let radix = Radix::new(vec![3; self.qubits]);
        Ok(radix
            .iter()
            .zip(&self.values)
            .map(|(digits, &v)| digits.iter().zip(dirs).fold(v, |acc, (&d, n)| acc * n.components()[d]))
            .sum())
    }

    /// Correlation tensor in the given frames.
    pub fn project(&self, frames: &[MeasurementFrame]) -> Result<CorrelationTensor> {
        if frames.len() != self.qubits {
            return Err(Error::LengthMismatch {
                left: frames.len(),
                right: self.qubits,
            });
        }
        let radix = Radix::new(vec![2; self.qubits]);
        let values = radix
            .iter()
            .map(|xy| {
                let dirs: Vec<Direction> = xy.iter().zip(frames).map(|(&w, f)| *f.axis(w)).collect();
                self.contract(&dirs)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(CorrelationTensor {
            values,
            frames: frames.to_vec(),
        })
    }
}

/// Correlations `T[i_1..i_K]`, `i ∈ {x, y}`, in lexicographic order with the
/// first region most significant (`xx, xy, yx, yy` for two regions).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    values: Vec<f64>,
    frames: Vec<MeasurementFrame>,
}

impl CorrelationTensor {
    /// Builds a tensor from raw values; every entry must lie in `[-1, 1]`.
    pub fn new(values: Vec<f64>, frames: Vec<MeasurementFrame>) -> Result<Self> {
        if values.len() != 1usize << frames.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << frames.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(alloc::format!(
                "tensor entry {v} outside [-1, 1]"
            )));
        }
        Ok(CorrelationTensor { values, frames })
    }

    pub fn region_count(&self) -> usize {
        self.frames.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frames(&self) -> &[MeasurementFrame] {
        &self.frames
    }

    /// Entry for `xy` digits (0 = x, 1 = y).
    pub fn get(&self, xy: &[usize]) -> f64 {
        self.values[Radix::new(vec![2; self.frames.len()]).index(xy)]
    }

    pub fn labels(&self) -> Vec<alloc::string::String> {
        Radix::new(vec![2; self.frames.len()])
            .iter()
            .map(|d| crate::pauli::frame_index_label(&d))
            .collect()
    }
}

/// Correlation tensor of a `K`-qubit (effective) state in per-region frames.
pub fn correlation_tensor(rho_eff: &DensityMatrix, frames: &[MeasurementFrame]) -> Result<CorrelationTensor> {
    if frames.len() != rho_eff.qubit_count() {
        return Err(Error::LengthMismatch {
            left: frames.len(),
            right: rho_eff.qubit_count(),
        });
    }
    PauliCorrelations::new(rho_eff)?.project(frames)
}

/// `L = sum T^2` over all `{x, y}^K` entries.
pub fn zb_value(t: &CorrelationTensor) -> f64 {
    t.values.iter().map(|v| v * v).sum()
}

/// True iff `L <= 1 + 1e-9`. Sufficient for an LHV model; `false` proves
/// nothing by itself.
pub fn zb_admits_lhv(t: &CorrelationTensor) -> bool {
    zb_value(t) <= 1.0 + ZB_TOLERANCE
}

/// Largest `L` over all frame choices for a two-qubit state: the sum of the
/// two largest squared singular values of the correlation matrix.
pub fn zb_value_max_over_frames(rho2: &DensityMatrix) -> Result<f64> {
    let m = PauliCorrelations::new(rho2)?
        .matrix2()
        .ok_or(Error::DimensionMismatch {
            expected: 2,
            found: rho2.qubit_count(),
        })?;
    let s = crate::bell::singular_values3(&m);
    Ok(s[0] * s[0] + s[1] * s[1])
}

/// Correlation between collective magnetizations `sum_{i in region} n_r . sigma_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationCorrelation {
    value: f64,
    region_sizes: Vec<usize>,
}

impl MagnetizationCorrelation {
    pub fn new(value: f64, region_sizes: Vec<usize>) -> Result<Self> {
        let bound: f64 = region_sizes.iter().map(|&s| s as f64).product();
        if !(value.abs() <= bound * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(alloc::format!(
                "magnetization correlation {value} exceeds {bound}"
            )));
        }
        Ok(MagnetizationCorrelation { value, region_sizes })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn region_sizes(&self) -> &[usize] {
        &self.region_sizes
    }

    /// Value divided by the number of cross-region tuples.
    pub fn normalized(&self) -> f64 {
        self.value / self.region_sizes.iter().map(|&s| s as f64).product::<f64>()
    }
}

/// Two-region magnetization correlation; see
/// [`multi_magnetization_correlation`].
pub fn magnetization_correlation<S: QuantumState + ?Sized>(
    state: &S,
    partition: &Partition,
    a: &Direction,
    b: &Direction,
) -> Result<MagnetizationCorrelation> {
    if partition.region_count() != 2 {
        return Err(Error::InvalidPartition(
            "magnetization correlation needs two regions".into(),
        ));
    }
    multi_magnetization_correlation(state, partition, &[*a, *b])
}

/// `<M_1 (x) ... (x) M_K>` computed twice: as the sum over all cross-region
/// qubit tuples of microscopic correlations on the full state, and as
/// `prod N_k * Tr((n_1.sigma (x) ...) rho_eff)`. The routes must agree within
/// [`ROUTE_TOLERANCE`]; the effective-state value is returned.
pub fn multi_magnetization_correlation<S: QuantumState + ?Sized>(
    state: &S,
    partition: &Partition,
    dirs: &[Direction],
) -> Result<MagnetizationCorrelation> {
    if dirs.len() != partition.region_count() {
        return Err(Error::LengthMismatch {
            left: dirs.len(),
            right: partition.region_count(),
        });
    }
    let n = state.qubit_count();
    partition.check_fits(n)?;
    let sizes = partition.region_sizes();
    let k = sizes.len();

    let axes = Radix::new(vec![3; k]);
    let mut pairwise = 0.0;
    for tuple in Radix::new(sizes.clone()).iter() {
        let qubits: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(r, &i)| partition.regions()[r][i])
            .collect();
        for digits in axes.iter() {
            let weight: f64 = digits.iter().zip(dirs).map(|(&d, dir)| dir.components()[d]).product();
            if weight == 0.0 {
                continue;
            }
            let support: Vec<(usize, PauliLabel)> = qubits
                .iter()
                .zip(&digits)
                .map(|(&q, &d)| (q, PauliLabel::from_axis(d).expect("axis")))
                .collect();
            pairwise += weight * state.pauli_expectation(&PauliString::with_support(n, &support)?)?;
        }
    }

    let eff = effective_state(state, partition)?;
    let obs: Vec<CMatrix> = dirs.iter().map(Direction::observable).collect();
    let tuples: f64 = sizes.iter().map(|&s| s as f64).product();
    let effective = tuples * trace_product(eff.matrix(), &kron_all(&obs)).re;

    if (pairwise - effective).abs() > ROUTE_TOLERANCE {
        return Err(Error::InconsistentRoutes { pairwise, effective });
    }
    MagnetizationCorrelation::new(effective, sizes)
}

/// Real weights `alpha` on setting tuples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BellCoefficients {
    weights: BTreeMap<Vec<usize>, f64>,
}

impl BellCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, settings: Vec<usize>, alpha: f64) -> Self {
        self.weights.insert(settings, alpha);
        self
    }

    /// `E00 + E01 + E10 - E11`.
    pub fn chsh() -> Self {
        BellCoefficients::new()
            .with(vec![0, 0], 1.0)
            .with(vec![0, 1], 1.0)
            .with(vec![1, 0], 1.0)
            .with(vec![1, 1], -1.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &f64)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `<B> = sum alpha(s) E_s` over the coefficients' support.
pub fn macroscopic_bell_parameter(
    coeffs: &BellCoefficients,
    correlations: &BTreeMap<Vec<usize>, MagnetizationCorrelation>,
) -> Result<f64> {
    coeffs.iter().try_fold(0.0, |acc, (settings, &alpha)| {
        if alpha == 0.0 {
            return Ok(acc);
        }
        let e = correlations
            .get(settings)
            .ok_or_else(|| Error::MissingCorrelation(settings.clone()))?;
        Ok(acc + alpha * e.value())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_direction, random_frame, random_mixed, random_pure};
    use crate::state::named_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dm(name: &str, n: usize) -> DensityMatrix {
        named_state(name, n).unwrap().to_density().unwrap()
    }

    /// Oracle: Tr((a.sigma (x) b.sigma) rho) with dense matrices.
    fn dense_corr(rho: &DensityMatrix, a: &Direction, b: &Direction) -> f64 {
        trace_product(rho.matrix(), &a.observable().kronecker(&b.observable())).re
    }

    #[test]
    fn maximally_mixed_tensor_vanishes() {
        let mut g = ChaCha8Rng::seed_from_u64(1);
        let t = correlation_tensor(&dm("max_mixed", 2), &[random_frame(&mut g), random_frame(&mut g)]).unwrap();
        assert!(t.values().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(zb_value(&t), 0.0);
        assert!(zb_admits_lhv(&t));
    }

    #[test]
    fn singlet_in_lab_frames() {
        let s = dm("singlet", 2);
        let f = MeasurementFrame::standard();
        let t = correlation_tensor(&s, &[f, f]).unwrap();
        // Oracle values from direct dense expectations.
        let expect = [
            dense_corr(&s, &Direction::X, &Direction::X),
            dense_corr(&s, &Direction::X, &Direction::Y),
            dense_corr(&s, &Direction::Y, &Direction::X),
            dense_corr(&s, &Direction::Y, &Direction::Y),
        ];
        for (e, known) in expect.iter().zip([-1.0, 0.0, 0.0, -1.0]) {
            assert!((e - known).abs() < 1e-15);
        }
        for (v, e) in t.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!((zb_value(&t) - 2.0).abs() < 1e-12);
        assert!(!zb_admits_lhv(&t));
        assert_eq!(t.labels(), ["xx", "xy", "yx", "yy"]);
    }

    #[test]
    fn product_zero_state_in_plane_frames() {
        let mut g = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::basis_state(2, 0).unwrap();
        // Frames inside the x-y plane.
        for _ in 0..10 {
            let phi1: f64 = rand::Rng::gen::<f64>(&mut g) * core::f64::consts::TAU;
            let phi2: f64 = rand::Rng::gen::<f64>(&mut g) * core::f64::consts::TAU;
            let mk = |phi: f64| {
                MeasurementFrame::new(
                    Direction::from_angles(core::f64::consts::FRAC_PI_2, phi),
                    Direction::from_angles(core::f64::consts::FRAC_PI_2, phi + core::f64::consts::FRAC_PI_2),
                )
                .unwrap()
            };
            let t = correlation_tensor(&rho, &[mk(phi1), mk(phi2)]).unwrap();
            assert!(t.values().iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn diluted_singlet_has_half_value() {
        let rho = dm("singlet", 2)
            .tensor(&DensityMatrix::basis_state(1, 0).unwrap())
            .unwrap();
        let part = Partition::new(vec![vec![0], vec![1, 2]]).unwrap();
        let eff = effective_state(&rho, &part).unwrap();
        let f = MeasurementFrame::standard();
        let t = correlation_tensor(&eff, &[f, f]).unwrap();
        assert!((t.get(&[0, 0]) + 0.5).abs() < 1e-15);
        assert!((t.get(&[1, 1]) + 0.5).abs() < 1e-15);
        assert!((zb_value(&t) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frame_count_mismatch() {
        let f = MeasurementFrame::standard();
        assert!(correlation_tensor(&dm("singlet", 2), &[f]).is_err());
    }

    #[test]
    fn contraction_matches_dense_trace() {
        let mut g = ChaCha8Rng::seed_from_u64(3);
        let rho = random_mixed(2, 4, &mut g).unwrap();
        let pc = PauliCorrelations::new(&rho).unwrap();
        for _ in 0..10 {
            let a = random_direction(&mut g);
            let b = random_direction(&mut g);
            assert!((pc.contract(&[a, b]).unwrap() - dense_corr(&rho, &a, &b)).abs() < 1e-13);
        }
    }

    #[test]
    fn magnetization_examples() {
        let zero = DensityMatrix::basis_state(5, 0).unwrap();
        let part = Partition::contiguous(&[2, 3]).unwrap();
        let m = magnetization_correlation(&zero, &part, &Direction::Z, &Direction::Z).unwrap();
        assert!((m.value() - 6.0).abs() < 1e-12);
        let s = dm("singlet", 2);
        let a = Direction::normalized([0.2, -0.5, 0.7]).unwrap();
        let m = magnetization_correlation(&s, &Partition::contiguous(&[1, 1]).unwrap(), &a, &a).unwrap();
        assert!((m.value() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn magnetization_routes_agree_on_random_states() {
        let mut g = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..10 {
            let part = Partition::new(vec![vec![4, 0, 2], vec![1, 5, 3]]).unwrap();
            let a = random_direction(&mut g);
            let b = random_direction(&mut g);
            let m = if trial % 2 == 0 {
                magnetization_correlation(&random_mixed(6, 3, &mut g).unwrap(), &part, &a, &b)
            } else {
                magnetization_correlation(&random_pure(6, &mut g).unwrap(), &part, &a, &b)
            };
            assert!(m.unwrap().value().abs() <= 9.0);
        }
    }

    #[test]
    fn bell_parameter_examples() {
        let zero_coeffs = BellCoefficients::new().with(vec![0, 0], 0.0);
        assert_eq!(macroscopic_bell_parameter(&zero_coeffs, &BTreeMap::new()).unwrap(), 0.0);
        assert!(matches!(
            macroscopic_bell_parameter(&BellCoefficients::chsh(), &BTreeMap::new()),
            Err(Error::MissingCorrelation(_))
        ));

        // Singlet pair at the CHSH-optimal settings.
        let s = dm("singlet", 2);
        let part = Partition::contiguous(&[1, 1]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let alice = [Direction::Z, Direction::X];
        let bob = [
            Direction::new([-h, 0.0, -h]).unwrap(),
            Direction::new([h, 0.0, -h]).unwrap(),
        ];
        let mut corr = BTreeMap::new();
        for (i, a) in alice.iter().enumerate() {
            for (j, b) in bob.iter().enumerate() {
                corr.insert(vec![i, j], magnetization_correlation(&s, &part, a, b).unwrap());
            }
        }
        let value = macroscopic_bell_parameter(&BellCoefficients::chsh(), &corr).unwrap();
        assert!((value - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn chsh_on_product_states_is_classical() {
        let mut g = ChaCha8Rng::seed_from_u64(5);
        let part = Partition::contiguous(&[1, 1]).unwrap();
        for _ in 0..50 {
            let a = random_pure(1, &mut g).unwrap();
            let b = random_pure(1, &mut g).unwrap();
            let rho = a.tensor(&b).unwrap();
            let dirs: Vec<Direction> = (0..4).map(|_| random_direction(&mut g)).collect();
            let mut corr = BTreeMap::new();
            for i in 0..2 {
                for j in 0..2 {
                    corr.insert(
                        vec![i, j],
                        magnetization_correlation(&rho, &part, &dirs[i], &dirs[2 + j]).unwrap(),
                    );
                }
            }
            let v = macroscopic_bell_parameter(&BellCoefficients::chsh(), &corr).unwrap();
            assert!(v.abs() <= 2.0 + 1e-12);
        }
    }
}
