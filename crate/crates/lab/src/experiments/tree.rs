use macroreal_core::anticommute::{
    folded_region_bound, folded_tree, generate_vector_family, min_region_size, simple_tree, OperatorFamily,
};
use macroreal_core::linalg::c;
use macroreal_core::monogamy::expectation_vector;
use macroreal_core::pauli::PauliLabel;
use macroreal_core::random::{random_permutation, random_pure};
use macroreal_core::state::{AnyState, BlockProductState, PureState};
use rand::Rng;
use serde::Serialize;

use super::random_state;
use crate::config::{TreeBuildParams, TreeVariant};
use crate::error::LabResult;
use crate::formats::{family_to_document, FamilyDocument};
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, nan_min, Check, Outcome};

/// Largest register handled as one dense pure / mixed state.
const DENSE_PURE_QUBITS: usize = 14;
const DENSE_MIXED_QUBITS: usize = 8;
/// Blocks of a product state hold at most this many qubits.
const MAX_BLOCK: usize = 8;

#[derive(Debug, Clone, Serialize)]
struct FamilyRecord {
    record: &'static str,
    k: usize,
    variant: &'static str,
    sequences: usize,
    region_sizes: Vec<usize>,
    total_qubits: usize,
    verified: bool,
    max_region_size: usize,
    /// Region-size bound for the folded variant.
    bound: Option<u64>,
    operation_trials: usize,
    operation_failures: usize,
    norm_states: usize,
    max_squared_norm: Option<f64>,
    /// States prepared in an eigenstate of one family member reach norm 1.
    min_aligned_squared_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyDocument>,
}

#[derive(Debug, Clone, Serialize)]
struct MinSizeRecord {
    record: &'static str,
    k: usize,
    value: u64,
    expected: u64,
}

fn build(k: usize, variant: TreeVariant) -> LabResult<OperatorFamily> {
    Ok(match variant {
        TreeVariant::Simple => simple_tree(k)?,
        TreeVariant::Folded => folded_tree(k)?,
    })
}

/// Random padding, cyclic shifts and flips of `base`.
fn random_variant<R: Rng + ?Sized>(base: &OperatorFamily, pad: usize, rng: &mut R) -> LabResult<OperatorFamily> {
    let sizes: Vec<usize> = base
        .region_sizes()
        .iter()
        .map(|&s| s + rng.gen_range(0..=pad))
        .collect();
    let padded = base.with_region_sizes(&sizes)?;
    let shifts: Vec<usize> = sizes.iter().map(|&s| rng.gen_range(0..s)).collect();
    let flips: Vec<bool> = sizes.iter().map(|_| rng.gen()).collect();
    Ok(generate_vector_family(&padded, &shifts, &flips)?)
}

fn random_blocks<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> LabResult<BlockProductState> {
    let order = random_permutation(qubits, rng);
    let mut blocks = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = rng.gen_range(1..=MAX_BLOCK.min(rest.len()));
        let (head, tail) = rest.split_at(size);
        let rank = if size <= DENSE_MIXED_QUBITS && rng.gen_bool(0.5) {
            2
        } else {
            1
        };
        blocks.push((head.to_vec(), random_state(size, rank, rng)?));
        rest = tail;
    }
    Ok(BlockProductState::new(blocks)?)
}

/// Product state in the `+1` eigenstate of one random family member on its
/// support and random elsewhere.
fn aligned_state<R: Rng + ?Sized>(family: &OperatorFamily, rng: &mut R) -> LabResult<BlockProductState> {
    let strings = family.expand();
    let target = &strings[rng.gen_range(0..strings.len())];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let blocks = target
        .labels()
        .iter()
        .enumerate()
        .map(|(q, label)| {
            let state = match label {
                PauliLabel::X => PureState::from_amplitudes(&[c(h, 0.0), c(h, 0.0)])?,
                PauliLabel::Y => PureState::from_amplitudes(&[c(h, 0.0), c(0.0, h)])?,
                _ => random_pure(1, rng)?,
            };
            Ok((vec![q], AnyState::Pure(state)))
        })
        .collect::<LabResult<Vec<_>>>()?;
    Ok(BlockProductState::new(blocks)?)
}

/// Squared norm of the family's expectation vector on state `j`, plus
/// whether that state was aligned with a family member.
fn norm_trial<R: Rng + ?Sized>(base: &OperatorFamily, j: usize, rng: &mut R) -> LabResult<(f64, bool)> {
    let family = random_variant(base, 0, rng)?;
    let n = family.total_qubits();
    if j % 4 == 3 {
        let state = aligned_state(&family, rng)?;
        return Ok((expectation_vector(&state, &family)?.squared_norm(), true));
    }
    let v = if n <= DENSE_MIXED_QUBITS && j % 2 == 1 {
        let rank = 1usize << rng.gen_range(1..=n);
        expectation_vector(&random_state(n, rank, rng)?, &family)?
    } else if n <= DENSE_PURE_QUBITS && j.is_multiple_of(4) {
        expectation_vector(&random_state(n, 1, rng)?, &family)?
    } else {
        expectation_vector(&random_blocks(n, rng)?, &family)?
    };
    Ok((v.squared_norm(), false))
}

pub fn run(p: &TreeBuildParams, seed: u64) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let mut family_records = Vec::new();
    let mut stream = 0u64;
    for k in p.min_k..=p.max_k {
        for &variant in &p.variants {
            let base = build(k, variant)?;
            let fam_stream = stream;
            stream += 1;
            let trials = if k <= p.operation_max_k { p.operation_trials } else { 0 };
            let mut rng = trial_rng(seed, fam_stream << 32);
            let mut failures = 0;
            for _ in 0..trials {
                if !random_variant(&base, 2, &mut rng)?.verify() {
                    failures += 1;
                }
            }
            let norms = map_trials(p.norm_states, |j| {
                let mut rng = trial_rng(seed, (fam_stream << 32) | (j as u64 + 1));
                norm_trial(&base, j, &mut rng)
            })?;
            let aligned: Vec<f64> = norms.iter().filter(|n| n.1).map(|n| n.0).collect();
            family_records.push(FamilyRecord {
                record: "family",
                k,
                variant: variant.name(),
                sequences: base.len(),
                region_sizes: base.region_sizes().to_vec(),
                total_qubits: base.total_qubits(),
                verified: base.verify(),
                max_region_size: base.max_region_size(),
                bound: match variant {
                    TreeVariant::Folded => Some(folded_region_bound(k)?),
                    TreeVariant::Simple => None,
                },
                operation_trials: trials,
                operation_failures: failures,
                norm_states: norms.len(),
                max_squared_norm: (!norms.is_empty()).then(|| nan_max(norms.iter().map(|n| n.0))),
                min_aligned_squared_norm: (!aligned.is_empty()).then(|| nan_min(aligned.iter().copied())),
                family: (k <= p.list_max_k).then(|| family_to_document(&base)),
            });
        }
    }
    let size_records: Vec<MinSizeRecord> = p
        .min_region_size
        .iter()
        .map(|e| {
            Ok(MinSizeRecord {
                record: "min_region_size",
                k: e.k,
                value: min_region_size(e.k)?,
                expected: e.expected,
            })
        })
        .collect::<LabResult<_>>()?;

    let count = family_records.len();
    let unverified = family_records
        .iter()
        .filter(|r| !r.verified || r.sequences != 1 << r.k)
        .count();
    let over_bound = family_records
        .iter()
        .filter(|r| r.bound.is_some_and(|b| r.max_region_size as u64 > b))
        .count();
    let op_trials: usize = family_records.iter().map(|r| r.operation_trials).sum();
    let op_failures: usize = family_records.iter().map(|r| r.operation_failures).sum();
    let max_norm = nan_max(family_records.iter().filter_map(|r| r.max_squared_norm));
    let min_aligned = nan_min(family_records.iter().filter_map(|r| r.min_aligned_squared_norm));
    let size_mismatches = size_records.iter().filter(|r| r.value != r.expected).count();

    out.summarize("families", count);
    out.summarize("operation_trials", op_trials);
    out.summarize("norm_states_per_family", p.norm_states);
    if p.norm_states > 0 {
        out.summarize("max_squared_norm", max_norm);
        out.summarize("min_aligned_squared_norm", min_aligned);
    }
    out.check(Check::count_zero("families_anticommute", unverified, count));
    if p.variants.contains(&TreeVariant::Folded) {
        out.check(Check::count_zero("folded_within_bound", over_bound, count));
    }
    if op_trials > 0 {
        out.check(Check::count_zero(
            "operations_preserve_anticommutation",
            op_failures,
            op_trials,
        ));
    }
    if p.norm_states > 0 {
        out.check(Check::at_most("squared_norm_at_most_one", max_norm, 1.0 + p.tolerance));
        if p.norm_states >= 4 {
            out.check(Check::at_least(
                "aligned_states_saturate",
                min_aligned,
                1.0 - p.tolerance,
            ));
        }
    }
    if !size_records.is_empty() {
        out.check(Check::count_zero(
            "min_region_size_formula",
            size_mismatches,
            size_records.len(),
        ));
    }
    for r in family_records {
        out.record(r);
    }
    for r in size_records {
        out.record(r);
    }
    Ok(out)
}
