//! Small dense linear-algebra helpers shared by the state and measurement
//! code. Matrices are `nalgebra` complex matrices; qubit 0 is the most
//! significant bit of a computational-basis index.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bit of `qubit` in basis `index` of an `n`-qubit register.
#[inline]
pub fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// Gathers the bits of `qubits` (in the listed order, first = most
/// significant) out of a basis index.
#[inline]
pub fn gather(index: usize, qubits: &[usize], n: usize) -> usize {
    qubits.iter().fold(0, |acc, &q| (acc << 1) | bit(index, q, n))
}

/// Bit mask covering `qubits` in an `n`-qubit basis index.
pub fn mask(qubits: &[usize], n: usize) -> usize {
    qubits.iter().fold(0, |acc, &q| acc | (1 << (n - 1 - q)))
}

/// Largest absolute entry of `m - m^dagger`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |w, (x, y)| w.max((x - y).norm()))
}

pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// `Tr(rho O)` where `O` is a tensor product of local operators, each acting
/// on the listed qubits (in listed order), and identity elsewhere.
pub fn expect_local_product(rho: &CMatrix, n: usize, factors: &[(&[usize], &CMatrix)]) -> C64 {
    let dim = rho.nrows();
    let covered = factors.iter().fold(0usize, |acc, (qs, _)| acc | mask(qs, n));
    let subs: Vec<Vec<usize>> = factors
        .iter()
        .map(|(qs, _)| (0..dim).map(|b| gather(b, qs, n)).collect())
        .collect();
    let mut acc = ZERO;
    for i in 0..dim {
        let rest = i & !covered;
        // Enumerate every j that agrees with i outside the covered qubits.
        let mut sub = covered;
        loop {
            let j = rest | sub;
            let rij = rho[(i, j)];
            if rij != ZERO {
                let mut w = rij;
                for (s, (_, op)) in factors.iter().enumerate() {
                    w *= op[(subs[s][j], subs[s][i])];
                    if w == ZERO {
                        break;
                    }
                }
                acc += w;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & covered;
        }
    }
    acc
}

/// Mixed-radix enumeration helper: the number of tuples, flat index and
/// tuple decoding. The first position is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    radices: Vec<usize>,
}

impl Radix {
    pub fn new(radices: Vec<usize>) -> Self {
        Radix { radices }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.radices).fold(0, |acc, (&d, &r)| acc * r + d)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = index % r;
            index /= r;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(move |i| self.digits(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gather_respects_listed_order() {
        // |q0 q1 q2> = |1 0 1>
        let idx = 0b101;
        assert_eq!(gather(idx, &[0, 1], 3), 0b10);
        assert_eq!(gather(idx, &[1, 0], 3), 0b01);
        assert_eq!(gather(idx, &[2, 0], 3), 0b11);
    }

    #[test]
    fn local_product_matches_kronecker() {
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        // rho = |+><+| (x) |0><0| (x) |1><1|
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
        let p0 = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        let rho = kron_all(&[plus, p0, p1]);
        let v = expect_local_product(&rho, 3, &[(&[0], &x), (&[2], &z)]);
        assert!((v - c(-1.0, 0.0)).norm() < 1e-14);
        let full = kron_all(&[x, CMatrix::identity(2, 2), z]);
        assert!((trace_product(&rho, &full) - v).norm() < 1e-14);
    }

    #[test]
    fn radix_roundtrip() {
        let r = Radix::new(vec![2, 3, 4]);
        assert_eq!(r.len(), 24);
        for i in 0..r.len() {
            assert_eq!(r.index(&r.digits(i)), i);
        }
        assert_eq!(r.digits(5), vec![0, 1, 1]);
    }
}
