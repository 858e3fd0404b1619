use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::pauli::Direction;
use crate::random::{random_direction, random_mixed};
use crate::state::{
    effective_block_state, effective_state, permutation_symmetrize, symmetrize_blocks, DensityMatrix, Partition,
    WernerState,
};

const SQRT2: f64 = core::f64::consts::SQRT_2;

fn singlet() -> DensityMatrix {
    WernerState::new(1.0).unwrap().to_density()
}

fn random_projective(rng: &mut ChaCha8Rng, settings: &[usize]) -> BellScenario {
    let dirs: Vec<Vec<Direction>> = settings
        .iter()
        .map(|&s| (0..s).map(|_| random_direction(rng)).collect())
        .collect();
    BellScenario::projective(&dirs).unwrap()
}

#[test]
fn singular_values_of_diagonal() {
    let s = singular_values3(&[[0.0, 0.0, 2.0], [0.0, -3.0, 0.0], [1.0, 0.0, 0.0]]);
    for (a, b) in s.iter().zip([3.0, 2.0, 1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn maximally_mixed_gives_uniform() {
    let sc = BellScenario::projective(&[vec![Direction::X, Direction::Z], vec![Direction::Y]]).unwrap();
    let p = quantum_distribution(&DensityMatrix::maximally_mixed(2).unwrap(), &sc).unwrap();
    assert!(p.rows().iter().flatten().all(|v| (v - 0.25).abs() < 1e-12));
}

#[test]
fn singlet_same_direction_anticorrelated() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = random_direction(&mut rng);
    let sc = BellScenario::projective(&[vec![n], vec![n]]).unwrap();
    let p = quantum_distribution(&singlet(), &sc).unwrap();
    assert!(p.probability(&[0, 0], &[0, 0]).abs() < 1e-12);
    assert!(p.probability(&[0, 0], &[1, 1]).abs() < 1e-12);
    assert!((p.probability(&[0, 0], &[0, 1]) - 0.5).abs() < 1e-12);
    assert!((p.probability(&[0, 0], &[1, 0]) - 0.5).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_is_reported() {
    let sc = BellScenario::projective(&[vec![Direction::X], vec![Direction::X]]).unwrap();
    assert!(quantum_distribution(&DensityMatrix::maximally_mixed(3).unwrap(), &sc).is_err());
}

#[test]
fn product_state_aligned_projectors_single_strategy() {
    let rho = DensityMatrix::basis_state(4, 0).unwrap();
    let sc = BellScenario::projective(&[vec![Direction::Z, Direction::Z], vec![Direction::Z, Direction::Z]]).unwrap();
    let layout = Partition::contiguous(&[2, 2]).unwrap().blocks(1).unwrap();
    let model = strategy_distribution(&rho, &layout, &sc).unwrap();
    assert_eq!(model.support(1e-12), 1);
    let (tuple, w) = model.entries().iter().find(|(_, w)| *w > 0.5).unwrap();
    assert!((w - 1.0).abs() < 1e-12);
    assert!(tuple.iter().all(|s| s.outcomes() == [0, 0]));
}

#[test]
fn single_site_model_is_the_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rho = random_mixed(2, 4, &mut rng).unwrap();
    let sc = random_projective(&mut rng, &[1, 1]);
    let layout = Partition::contiguous(&[1, 1]).unwrap().blocks(1).unwrap();
    let model = strategy_distribution(&rho, &layout, &sc).unwrap();
    let p = quantum_distribution(&rho, &sc).unwrap();
    for (tuple, w) in model.entries() {
        let j: Vec<usize> = tuple.iter().map(|s| s.respond(0)).collect();
        assert!((p.probability(&[0, 0], &j) - w).abs() < 1e-12);
    }
}

#[test]
fn budget_exceeded_is_an_error() {
    let rho = DensityMatrix::maximally_mixed(3).unwrap();
    let sc = BellScenario::projective(&[vec![Direction::X], vec![Direction::X, Direction::Y, Direction::Z]]).unwrap();
    let layout = Partition::contiguous(&[1, 2]).unwrap().blocks(1).unwrap();
    assert!(matches!(
        strategy_distribution(&rho, &layout, &sc),
        Err(crate::Error::BudgetExceeded {
            region: 1,
            settings: 3,
            sites: 2
        })
    ));
}

fn check_local_construction(rng: &mut ChaCha8Rng, sizes: &[usize], settings: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let rho = random_mixed(n, 1usize << n, rng).unwrap();
    let partition = Partition::contiguous(sizes).unwrap();
    let sc = random_projective(rng, settings);
    let symmetric = permutation_symmetrize(&rho, &partition).unwrap();
    let model = strategy_distribution(&symmetric, &partition.blocks(1).unwrap(), &sc).unwrap();
    assert!(model.min_weight() >= -WEIGHT_TOLERANCE);
    let local = reconstruct_distribution(&model, &sc).unwrap();
    let quantum = quantum_distribution(&effective_state(&rho, &partition).unwrap(), &sc).unwrap();
    local.max_abs_diff(&quantum).unwrap()
}

#[test]
fn deterministic_model_reproduces_effective_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        assert!(check_local_construction(&mut rng, &[2, 2], &[2, 2]) <= 1e-10);
    }
    assert!(check_local_construction(&mut rng, &[3, 3], &[3, 3]) <= 1e-10);
    // Fewer settings than sites: padding.
    assert!(check_local_construction(&mut rng, &[3, 2], &[2, 1]) <= 1e-10);
}

#[test]
fn two_body_blocks_reproduce_block_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rho = random_mixed(8, 3, &mut rng).unwrap();
    let layout = Partition::contiguous(&[4, 4]).unwrap().blocks(2).unwrap();
    // Two-qubit local measurements: projectors onto a random product basis
    // rotated by a CNOT-like mix are overkill; use products of qubit
    // projectors plus one Bell-basis measurement.
    let bell_basis = {
        let b = crate::state::named_state("singlet", 2).unwrap().to_density().unwrap();
        let id = crate::linalg::CMatrix::identity(4, 4);
        vec![b.matrix().clone(), &id - b.matrix()]
    };
    let product = |a: &Direction, b: &Direction| -> Vec<crate::linalg::CMatrix> {
        let pa = projectors(a);
        let pb = projectors(b);
        pa.iter().flat_map(|x| pb.iter().map(move |y| x.kronecker(y))).collect()
    };
    let d1 = random_direction(&mut rng);
    let d2 = random_direction(&mut rng);
    let region_a = RegionSettings::new(vec![bell_basis.clone(), product(&d1, &d2)]).unwrap();
    let region_b = RegionSettings::new(vec![product(&d2, &d1), bell_basis]).unwrap();
    let sc = BellScenario::new(vec![region_a, region_b]).unwrap();
    let symmetric = symmetrize_blocks(&rho, &layout).unwrap();
    let model = strategy_distribution(&symmetric, &layout, &sc).unwrap();
    let local = reconstruct_distribution(&model, &sc).unwrap();
    let quantum = quantum_distribution(&effective_block_state(&rho, &layout).unwrap(), &sc).unwrap();
    assert!(local.max_abs_diff(&quantum).unwrap() <= 1e-10);
}

#[test]
fn membership_accepts_constructed_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rho = random_mixed(4, 16, &mut rng).unwrap();
    let partition = Partition::contiguous(&[2, 2]).unwrap();
    let sc = random_projective(&mut rng, &[2, 2]);
    let model = strategy_distribution(
        &permutation_symmetrize(&rho, &partition).unwrap(),
        &partition.blocks(1).unwrap(),
        &sc,
    )
    .unwrap();
    let p = reconstruct_distribution(&model, &sc).unwrap();
    let verdict = lhv_membership(&p, &sc).unwrap();
    assert!(verdict.feasible);
    assert!(verdict.residual < 1e-9);
}

#[test]
fn singlet_chsh() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opt = chsh_optimize(&singlet(), &mut rng).unwrap();
    assert!((opt.value - 2.0 * SQRT2).abs() < 1e-6, "{}", opt.value);
    assert!((opt.analytic_bound - 2.0 * SQRT2).abs() < 1e-12);
    let p = quantum_distribution(&singlet(), &opt.scenario().unwrap()).unwrap();
    assert!((p.chsh_value().unwrap() - opt.value).abs() < 1e-9);
    let verdict = lhv_membership(&p, &opt.scenario().unwrap()).unwrap();
    assert!(!verdict.feasible);
    assert!(verdict.witness.unwrap().violation() > 1e-3);
}

#[test]
fn chsh_is_linear_in_visibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for v in [0.0, 0.3, 0.75, 0.9] {
        let w = WernerState::new(v).unwrap().to_density();
        let opt = chsh_optimize(&w, &mut rng).unwrap();
        assert!((opt.value - 2.0 * SQRT2 * v).abs() < 1e-6, "{v}: {}", opt.value);
    }
}

#[test]
fn chsh_matches_analytic_bound_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let rho = random_mixed(2, 2, &mut rng).unwrap();
        let opt = chsh_optimize(&rho, &mut rng).unwrap();
        assert!(
            (opt.value - opt.analytic_bound).abs() < 1e-6,
            "{} vs {}",
            opt.value,
            opt.analytic_bound
        );
    }
}

#[test]
fn budget_values() {
    assert_eq!(settings_budget(7, 1).unwrap(), 7);
    assert_eq!(settings_budget(100, 10).unwrap(), 10);
    assert_eq!(settings_budget(10u64.pow(16), 10u64.pow(7)).unwrap(), 10u64.pow(9));
    assert!(settings_budget(3, 4).is_err());
    assert!(settings_budget(3, 0).is_err());
}

#[test]
fn strategy_cap_enforced() {
    // 2^(20 + 1) joint strategies.
    let sc = BellScenario::projective(&[vec![Direction::Z; 20], vec![Direction::Z]]).unwrap();
    let p = JointDistribution::uniform(sc.outcome_counts()).unwrap();
    assert!(matches!(
        lhv_membership(&p, &sc),
        Err(crate::Error::ScenarioTooLarge { .. })
    ));
}
