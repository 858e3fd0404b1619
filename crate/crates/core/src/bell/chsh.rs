//! Two-setting CHSH optimization over projective qubit measurements.

use alloc::vec::Vec;

use rand::Rng;

use super::scenario::BellScenario;
use super::singular_values3;
use crate::criteria::PauliCorrelations;
use crate::pauli::Direction;
use crate::random::random_direction;
use crate::state::{DensityMatrix, QuantumState};
use crate::{Error, Result};

/// Lattice points for the first Bob direction.
pub const COARSE_POINTS: usize = 20;
/// Lattice points for the second Bob direction (per first direction).
pub const FINE_POINTS: usize = 400;
pub const REFINED_SEEDS: usize = 5;
pub const REFINEMENT_ITERATIONS: usize = 200;

type V3 = [f64; 3];
type M3 = [[f64; 3]; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ChshOptimum {
    pub value: f64,
    /// `2 sqrt(s1^2 + s2^2)` from the two largest correlation singular values.
    pub analytic_bound: f64,
    pub alice: [Direction; 2],
    pub bob: [Direction; 2],
}

impl ChshOptimum {
    /// Scenario measuring the optimal directions (Alice first).
    pub fn scenario(&self) -> Result<BellScenario> {
        BellScenario::projective(&[self.alice.to_vec(), self.bob.to_vec()])
    }
}

fn mat_vec(t: &M3, v: &V3) -> V3 {
    core::array::from_fn(|i| (0..3).map(|j| t[i][j] * v[j]).sum())
}

fn mat_t_vec(t: &M3, v: &V3) -> V3 {
    core::array::from_fn(|j| (0..3).map(|i| t[i][j] * v[i]).sum())
}

fn add(a: &V3, b: &V3, s: f64) -> V3 {
    core::array::from_fn(|i| a[i] + s * b[i])
}

fn norm(v: &V3) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn unit_or(v: &V3, fallback: &V3) -> V3 {
    let n = norm(v);
    if n > 1e-300 {
        core::array::from_fn(|i| v[i] / n)
    } else {
        *fallback
    }
}

/// `max_{a0, a1} CHSH = |T(b0 + b1)| + |T(b0 - b1)|`.
fn value_for_bob(t: &M3, b0: &V3, b1: &V3) -> f64 {
    norm(&mat_vec(t, &add(b0, b1, 1.0))) + norm(&mat_vec(t, &add(b0, b1, -1.0)))
}

/// `E(a0,b0) + E(a0,b1) + E(a1,b0) - E(a1,b1)` with `E(a, b) = a^T T b`.
pub fn chsh_value(t: &M3, a: [&Direction; 2], b: [&Direction; 2]) -> f64 {
    let e = |x: &Direction, y: &Direction| {
        let tv = mat_vec(t, &y.components());
        x.components().iter().zip(&tv).map(|(p, q)| p * q).sum::<f64>()
    };
    e(a[0], b[0]) + e(a[0], b[1]) + e(a[1], b[0]) - e(a[1], b[1])
}

fn fibonacci_sphere(n: usize) -> Vec<V3> {
    let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let phi = golden * i as f64;
            [r * libm::cos(phi), r * libm::sin(phi), z]
        })
        .collect()
}

fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> M3 {
    let e1 = random_direction(rng).components();
    let e2 = loop {
        let v = random_direction(rng).components();
        let d: f64 = v.iter().zip(&e1).map(|(p, q)| p * q).sum();
        let w = add(&v, &e1, -d);
        if norm(&w) > 1e-3 {
            break unit_or(&w, &w);
        }
    };
    let e3 = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    [e1, e2, e3]
}

/// Maximum CHSH value of a two-qubit state over projective settings: a
/// seeded random rotation of a `COARSE_POINTS x FINE_POINTS` lattice of Bob
/// direction pairs, then alternating refinement of the best seeds (Alice's
/// optimal directions are explicit given Bob's, and vice versa).
pub fn chsh_optimize<R: Rng + ?Sized>(rho2: &DensityMatrix, rng: &mut R) -> Result<ChshOptimum> {
    if rho2.qubit_count() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho2.qubit_count(),
        });
    }
    let t = PauliCorrelations::new(rho2)?.matrix2().expect("two qubits");
    let rot = random_rotation(rng);
    let rotate = |p: &V3| mat_vec(&rot, p);
    let coarse: Vec<V3> = fibonacci_sphere(COARSE_POINTS).iter().map(rotate).collect();
    let fine: Vec<V3> = fibonacci_sphere(FINE_POINTS).iter().map(rotate).collect();

    let mut seeds: Vec<(f64, usize, usize)> = Vec::with_capacity(COARSE_POINTS * FINE_POINTS);
    for (i, b0) in coarse.iter().enumerate() {
        for (j, b1) in fine.iter().enumerate() {
            seeds.push((value_for_bob(&t, b0, b1), i, j));
        }
    }
    // Stable order: value descending, then lattice indices.
    seeds.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let fallback = [1.0, 0.0, 0.0];
    let mut best: Option<(f64, [V3; 4])> = None;
    for &(_, i, j) in seeds.iter().take(REFINED_SEEDS) {
        let (mut b0, mut b1) = (coarse[i], fine[j]);
        let (mut a0, mut a1) = (fallback, fallback);
        let mut value = f64::NEG_INFINITY;
        for _ in 0..REFINEMENT_ITERATIONS {
            a0 = unit_or(&mat_vec(&t, &add(&b0, &b1, 1.0)), &a0);
            a1 = unit_or(&mat_vec(&t, &add(&b0, &b1, -1.0)), &a1);
            b0 = unit_or(&mat_t_vec(&t, &add(&a0, &a1, 1.0)), &b0);
            b1 = unit_or(&mat_t_vec(&t, &add(&a0, &a1, -1.0)), &b1);
            let v = value_for_bob(&t, &b0, &b1);
            let done = v - value <= 1e-15;
            value = value.max(v);
            if done {
                break;
            }
        }
        a0 = unit_or(&mat_vec(&t, &add(&b0, &b1, 1.0)), &a0);
        a1 = unit_or(&mat_vec(&t, &add(&b0, &b1, -1.0)), &a1);
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, [a0, a1, b0, b1]));
        }
    }
    let (_, [a0, a1, b0, b1]) = best.expect("at least one seed");
    let dir = |v: &V3| Direction::normalized(*v);
    let alice = [dir(&a0)?, dir(&a1)?];
    let bob = [dir(&b0)?, dir(&b1)?];
    let value = chsh_value(&t, [&alice[0], &alice[1]], [&bob[0], &bob[1]]);
    Ok(ChshOptimum {
        value,
        analytic_bound: horodecki_bound(&t),
        alice,
        bob,
    })
}

/// `2 sqrt(s1^2 + s2^2)` for correlation matrix `t`.
pub fn horodecki_bound(t: &M3) -> f64 {
    let s = singular_values3(t);
    2.0 * libm::sqrt(s[0] * s[0] + s[1] * s[1])
}

/// Analytic maximum CHSH value of a two-qubit state.
pub fn horodecki_chsh_max(rho2: &DensityMatrix) -> Result<f64> {
    let t = PauliCorrelations::new(rho2)?
        .matrix2()
        .ok_or(Error::DimensionMismatch {
            expected: 2,
            found: rho2.qubit_count(),
        })?;
    Ok(horodecki_bound(&t))
}
