use macroreal_core::bell::{
    quantum_distribution, reconstruct_distribution, strategy_distribution, BellScenario, JointDistribution, LHVModel,
    RegionSettings,
};
use macroreal_core::random::{random_mixed, random_permutation, random_projective_measurement};
use macroreal_core::state::{effective_block_state, symmetrize_blocks, BlockLayout, Partition};
use serde::Serialize;

use crate::config::{PipelineParams, PipelineRun};
use crate::error::LabResult;
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, nan_min, Check, Outcome};

/// Everything one trial draws and derives.
#[derive(Debug, Clone)]
pub struct PipelineTrial {
    pub partition: Partition,
    pub layout: BlockLayout,
    pub scenario: BellScenario,
    /// Quantum statistics of the effective state.
    pub quantum: JointDistribution,
    /// Deterministic-strategy model built from the symmetrized state.
    pub model: LHVModel,
    pub reconstructed: JointDistribution,
}

/// Trial `trial` of run `run_index`; the same arguments always give the same
/// trial, which lets other experiments revisit these distributions.
pub fn pipeline_trial(seed: u64, run_index: usize, trial: usize, run: &PipelineRun) -> LabResult<PipelineTrial> {
    let mut rng = trial_rng(seed, ((run_index as u64) << 32) | trial as u64);
    let dim = 1usize << run.qubits;
    let rho = random_mixed(run.qubits, run.rank.unwrap_or(dim), &mut rng)?;
    let perm = random_permutation(run.qubits, &mut rng);
    let (mut a, mut b) = (
        perm[..run.region_sizes[0]].to_vec(),
        perm[run.region_sizes[0]..].to_vec(),
    );
    a.sort_unstable();
    b.sort_unstable();
    let partition = Partition::new(vec![a, b])?;
    let layout = partition.blocks(run.block_size)?;
    let local_dim = 1usize << run.block_size;
    let regions = (0..2)
        .map(|_| {
            let settings = (0..run.settings)
                .map(|_| random_projective_measurement(local_dim, &mut rng))
                .collect();
            RegionSettings::new(settings)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scenario = BellScenario::new(regions)?;
    let symmetrized = symmetrize_blocks(&rho, &layout)?;
    let model = strategy_distribution(&symmetrized, &layout, &scenario)?;
    let reconstructed = reconstruct_distribution(&model, &scenario)?;
    let quantum = quantum_distribution(&effective_block_state(&rho, &layout)?, &scenario)?;
    Ok(PipelineTrial {
        partition,
        layout,
        scenario,
        quantum,
        model,
        reconstructed,
    })
}

#[derive(Debug, Clone, Serialize)]
struct Record {
    run: usize,
    trial: usize,
    qubits: usize,
    block_size: usize,
    settings: usize,
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    strategies: usize,
    support: usize,
    min_weight: f64,
    weight_sum_deviation: f64,
    max_deviation: f64,
    quantum_signalling: f64,
    model_signalling: f64,
    normalization_deviation: f64,
}

pub fn run(p: &PipelineParams, seed: u64) -> LabResult<Outcome> {
    let mut records = Vec::new();
    for (r, run) in p.runs.iter().enumerate() {
        records.extend(map_trials(run.trials, |t| {
            let tr = pipeline_trial(seed, r, t, run)?;
            Ok(Record {
                run: r,
                trial: t,
                qubits: run.qubits,
                block_size: run.block_size,
                settings: run.settings,
                region_a: tr.partition.regions()[0].clone(),
                region_b: tr.partition.regions()[1].clone(),
                strategies: tr.model.entries().len(),
                support: tr.model.support(1e-12),
                min_weight: tr.model.min_weight(),
                weight_sum_deviation: (tr.model.total_weight() - 1.0).abs(),
                max_deviation: tr.reconstructed.max_abs_diff(&tr.quantum)?,
                quantum_signalling: tr.quantum.signalling_deviation(),
                model_signalling: tr.reconstructed.signalling_deviation(),
                normalization_deviation: tr
                    .quantum
                    .normalization_deviation()
                    .max(tr.reconstructed.normalization_deviation()),
            })
        })?);
    }
    let expected: usize = p.runs.iter().map(|r| r.trials).sum();
    let mut out = Outcome::default();
    let dev = nan_max(records.iter().map(|r| r.max_deviation));
    let min_w = nan_min(records.iter().map(|r| r.min_weight));
    let wsum = nan_max(records.iter().map(|r| r.weight_sum_deviation));
    let signalling = nan_max(records.iter().map(|r| r.quantum_signalling.max(r.model_signalling)));
    let norm = nan_max(records.iter().map(|r| r.normalization_deviation));
    out.summarize("trials", records.len());
    out.summarize("max_deviation", dev);
    out.summarize("min_weight", min_w);
    out.summarize("max_weight_sum_deviation", wsum);
    out.summarize("max_signalling", signalling);
    out.check(Check::at_most("model_reproduces_quantum_statistics", dev, p.tolerance));
    out.check(Check::at_least("weights_nonnegative", min_w, -1e-10));
    out.check(Check::at_most("weights_sum_to_one", wsum, 1e-9));
    out.check(Check::at_most("no_signalling", signalling, 1e-9));
    out.check(Check::at_most("normalized", norm, 1e-9));
    out.check(Check::new(
        "trial_count",
        records.len() == expected,
        format!("{} of {expected}", records.len()),
    ));
    for r in records {
        out.record(r);
    }
    Ok(out)
}
