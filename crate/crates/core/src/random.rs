//! Seeded sampling of states, directions and local unitaries. All functions
//! take the generator explicitly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;

use crate::linalg::{c, CMatrix, C64};
use crate::pauli::{Direction, MeasurementFrame};
use crate::state::{DensityMatrix, PureState};
use crate::Result;

/// Standard normal sample (Box-Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(gaussian(rng), gaussian(rng))
}

/// Uniform point on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        if let Ok(d) = Direction::normalized(v) {
            return d;
        }
    }
}

/// Frame derived from two independent uniform setting directions.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> MeasurementFrame {
    loop {
        let a1 = random_direction(rng);
        let a2 = random_direction(rng);
        if let Ok(f) = MeasurementFrame::from_settings(&a1, &a2) {
            return f;
        }
    }
}

/// Haar-random element of SU(2) from a uniform unit quaternion.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let q: [f64; 4] = loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = libm::sqrt(v.iter().map(|x| x * x).sum());
        if n > 1e-12 {
            break [v[0] / n, v[1] / n, v[2] / n, v[3] / n];
        }
    };
    let a = c(q[0], q[1]);
    let b = c(q[2], q[3]);
    CMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()])
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Result<PureState> {
    PureState::check_size(qubits)?;
    let dim = 1usize << qubits;
    let amps: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(qubits, DVector::from_vec(amps))
}

/// Random mixed state `G G^dagger / Tr` with `G` a `2^n x rank` Ginibre matrix.
/// `rank = 2^n` gives the Hilbert-Schmidt ensemble.
pub fn random_mixed<R: Rng + ?Sized>(qubits: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    DensityMatrix::check_size(qubits)?;
    let dim = 1usize << qubits;
    let rank = rank.clamp(1, dim);
    let g = CMatrix::from_fn(dim, rank, |_, _| complex_gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho /= c(tr, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(qubits, rho))
}

/// Haar-random `dim x dim` unitary: QR of a Ginibre matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Projectors onto the columns of a Haar-random unitary: a random
/// `dim`-outcome projective measurement.
pub fn random_projective_measurement<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<CMatrix> {
    let u = random_unitary(dim, rng);
    (0..dim)
        .map(|j| {
            let col = u.column(j);
            col * col.adjoint()
        })
        .collect()
}

/// Uniformly random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_deviation, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn su2_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u = random_su2(&mut rng);
            let prod = &u * u.adjoint();
            assert!(max_abs_diff(&prod, &CMatrix::identity(2, 2)) < 1e-12);
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_pure(5, &mut rng).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let rho = random_mixed(3, 8, &mut rng).unwrap();
        assert!(hermitian_deviation(rho.matrix()) < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn random_measurements_are_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unitary(4, &mut rng);
        assert!(max_abs_diff(&(&u * u.adjoint()), &CMatrix::identity(4, 4)) < 1e-12);
        let povm = random_projective_measurement(4, &mut rng);
        let sum = povm.iter().fold(CMatrix::zeros(4, 4), |acc, e| acc + e);
        assert!(max_abs_diff(&sum, &CMatrix::identity(4, 4)) < 1e-12);
        for e in &povm {
            assert!(max_abs_diff(&(e * e), e) < 1e-12);
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f = random_frame(&mut rng);
            assert!(f.x_axis().dot(f.y_axis()).abs() < 1e-10);
            assert!((f.x_axis().dot(f.x_axis()) - 1.0).abs() < 1e-12);
        }
    }
}
