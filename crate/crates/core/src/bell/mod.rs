//! Generic Bell scenarios: POVM settings per region, joint outcome
//! distributions, the deterministic local model built from a permutation
//! symmetrized state, LHV membership by linear feasibility, and CHSH
//! optimization for two qubits.

mod chsh;
mod distribution;
mod scenario;
mod simplex;
mod strategy;

pub use chsh::{
    chsh_optimize, chsh_value, horodecki_bound, horodecki_chsh_max, ChshOptimum, COARSE_POINTS, FINE_POINTS,
    REFINED_SEEDS, REFINEMENT_ITERATIONS,
};
pub use distribution::{
    quantum_distribution, JointDistribution, NORMALIZATION_TOLERANCE, PROBABILITY_TOLERANCE, SIGNALLING_TOLERANCE,
};
pub use scenario::{projectors, BellScenario, RegionSettings, COMPLETENESS_TOLERANCE, POSITIVITY_TOLERANCE};
pub use simplex::{lhv_membership, BellWitness, MembershipVerdict, FEASIBILITY_TOLERANCE};
pub use strategy::{
    reconstruct_distribution, settings_budget, strategy_distribution, DeterministicStrategy, LHVModel, StrategySpace,
    MAX_STRATEGIES, WEIGHT_SUM_TOLERANCE, WEIGHT_TOLERANCE,
};

/// Singular values of a real 3x3 matrix, descending.
pub fn singular_values3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let s = mat.svd(false, false).singular_values;
    let mut out = [s[0], s[1], s[2]];
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests;
