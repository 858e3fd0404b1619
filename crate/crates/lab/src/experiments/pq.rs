use macroreal_core::criteria::{correlation_tensor, zb_value};
use macroreal_core::monogamy::pq_bound;
use macroreal_core::random::{random_frame, random_permutation};
use macroreal_core::state::{effective_state, Partition};
use rand::Rng;
use serde::Serialize;

use super::random_state;
use crate::config::PqCheckParams;
use crate::error::LabResult;
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct Record {
    index: usize,
    qubits: usize,
    rank: usize,
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    zb: f64,
    pq: f64,
    deviation: f64,
    max_vector_squared_norm: f64,
    swapped: bool,
}

pub fn run(p: &PqCheckParams, seed: u64) -> LabResult<Outcome> {
    let records = map_trials(p.instances, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let n = rng.gen_range(p.min_qubits..=p.max_qubits);
        let rank = p.ranks[i % p.ranks.len()];
        let state = random_state(n, rank, &mut rng)?;
        let perm = random_permutation(n, &mut rng);
        let cut = rng.gen_range(1..n);
        let (mut a, mut b) = (perm[..cut].to_vec(), perm[cut..].to_vec());
        a.sort_unstable();
        b.sort_unstable();
        let partition = Partition::new(vec![a.clone(), b.clone()])?;
        let frames = [random_frame(&mut rng), random_frame(&mut rng)];
        let zb = zb_value(&correlation_tensor(&effective_state(&state, &partition)?, &frames)?);
        let pq = pq_bound(&state, &partition, &frames)?;
        Ok(Record {
            index: i,
            qubits: n,
            rank,
            region_a: a,
            region_b: b,
            zb,
            pq: pq.value,
            deviation: (pq.value - zb).abs(),
            max_vector_squared_norm: pq.max_squared_norm(),
            swapped: pq.swapped,
        })
    })?;
    let mut out = Outcome::default();
    let dev = nan_max(records.iter().map(|r| r.deviation));
    let max_pq = nan_max(records.iter().map(|r| r.pq));
    let max_norm = nan_max(records.iter().map(|r| r.max_vector_squared_norm));
    out.summarize("instances", records.len());
    out.summarize("max_deviation", dev);
    out.summarize("max_pq", max_pq);
    out.summarize("max_vector_squared_norm", max_norm);
    out.check(Check::at_most("pq_equals_zb", dev, p.tolerance));
    out.check(Check::at_most("pq_at_most_one", max_pq, 1.0 + p.tolerance));
    out.check(Check::at_most("vector_norms_at_most_one", max_norm, 1.0 + p.tolerance));
    out.check(Check::new(
        "instance_count",
        records.len() == p.instances,
        format!("{} of {}", records.len(), p.instances),
    ));
    for r in records {
        out.record(r);
    }
    Ok(out)
}
