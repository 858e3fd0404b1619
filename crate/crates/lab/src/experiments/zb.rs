use macroreal_core::criteria::{zb_value, PauliCorrelations};
use macroreal_core::random::random_frame;
use macroreal_core::state::{PairReductions, Partition, QuantumState};
use serde::Serialize;

use super::random_state;
use crate::config::ZbSweepParams;
use crate::error::LabResult;
use crate::export::write_csv;
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct StateRecord {
    index: usize,
    qubits: usize,
    rank: usize,
    partitions: usize,
    tensors: usize,
    max_l: f64,
    violations: usize,
    /// Region A of the partition attaining `max_l`.
    argmax_region_a: Vec<usize>,
    /// `T_xx, T_xy, T_yx, T_yy` at the maximum.
    argmax_tensor: Vec<f64>,
}

/// One CSV row per state.
#[derive(Debug, Clone, Serialize)]
pub struct ZbCsvRow {
    pub index: usize,
    pub qubits: usize,
    pub rank: usize,
    pub partitions: usize,
    pub max_l: f64,
    pub region_a: String,
    pub t_xx: f64,
    pub t_xy: f64,
    pub t_yx: f64,
    pub t_yy: f64,
}

pub fn run(p: &ZbSweepParams, seed: u64) -> LabResult<Outcome> {
    let span = p.max_qubits - p.min_qubits + 1;
    let partitions: Vec<Vec<Partition>> = (p.min_qubits..=p.max_qubits)
        .map(|n| Partition::bipartitions(n, p.min_region_size))
        .collect();
    let records = map_trials(p.states, |i| {
        let n = p.min_qubits + i % span;
        let rank = p.ranks[(i / span) % p.ranks.len()];
        let mut rng = trial_rng(seed, i as u64);
        let state = random_state(n, rank, &mut rng)?;
        debug_assert_eq!(state.qubit_count(), n);
        let pairs = PairReductions::new(&state)?;
        let mut rec = StateRecord {
            index: i,
            qubits: n,
            rank,
            partitions: 0,
            tensors: 0,
            max_l: f64::NEG_INFINITY,
            violations: 0,
            argmax_region_a: Vec::new(),
            argmax_tensor: Vec::new(),
        };
        for part in &partitions[n - p.min_qubits] {
            let corr = PauliCorrelations::new(&pairs.effective(part)?)?;
            rec.partitions += 1;
            for _ in 0..p.frames_per_partition {
                let frames = [random_frame(&mut rng), random_frame(&mut rng)];
                let t = corr.project(&frames)?;
                let l = zb_value(&t);
                rec.tensors += 1;
                if !(l <= 1.0 + p.tolerance) {
                    rec.violations += 1;
                }
                if !(l <= rec.max_l) {
                    rec.max_l = l;
                    rec.argmax_region_a = part.regions()[0].clone();
                    rec.argmax_tensor = t.values().to_vec();
                }
            }
        }
        Ok(rec)
    })?;

    if let Some(path) = &p.csv {
        let rows: Vec<ZbCsvRow> = records
            .iter()
            .map(|r| ZbCsvRow {
                index: r.index,
                qubits: r.qubits,
                rank: r.rank,
                partitions: r.partitions,
                max_l: r.max_l,
                region_a: r
                    .argmax_region_a
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
                t_xx: r.argmax_tensor.first().copied().unwrap_or(f64::NAN),
                t_xy: r.argmax_tensor.get(1).copied().unwrap_or(f64::NAN),
                t_yx: r.argmax_tensor.get(2).copied().unwrap_or(f64::NAN),
                t_yy: r.argmax_tensor.get(3).copied().unwrap_or(f64::NAN),
            })
            .collect();
        write_csv(std::path::Path::new(path), &rows)?;
    }

    let mut out = Outcome::default();
    let max_l = nan_max(records.iter().map(|r| r.max_l));
    let violations: usize = records.iter().map(|r| r.violations).sum();
    let tensors: usize = records.iter().map(|r| r.tensors).sum();
    let skipped = records.iter().filter(|r| r.partitions == 0).count();
    out.summarize("states", records.len());
    out.summarize("tensors", tensors);
    out.summarize("max_l", max_l);
    out.summarize("violations", violations);
    out.check(Check::count_zero("no_tensor_exceeds_bound", violations, tensors));
    out.check(Check::at_most("max_l", max_l, 1.0 + p.tolerance));
    out.check(Check::count_zero("every_state_has_partitions", skipped, records.len()));
    out.check(Check::new(
        "state_count",
        records.len() == p.states,
        format!("{} of {}", records.len(), p.states),
    ));
    for r in records {
        out.record(r);
    }
    Ok(out)
}
