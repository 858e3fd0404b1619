use macroreal_core::monogamy::{
    max_effective_visibility, optimize_mean_singlet_fidelity, singlet_monogamy_cap, werner_classify,
};
use macroreal_core::random::{random_permutation, random_su2};
use macroreal_core::state::{heisenberg_thermal, Partition};
use rand::Rng;
use serde::Serialize;

use crate::config::{parse_fraction, WernerParams};
use crate::error::{LabError, LabResult};
use crate::parallel::{map_trials, trial_rng};
use crate::report::{nan_max, Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct CapRecord {
    record: &'static str,
    n_a: u64,
    n_b: u64,
    cap: String,
    cap_value: f64,
    expected: String,
    matches: bool,
}

#[derive(Debug, Clone, Serialize)]
struct ClassRecord {
    record: &'static str,
    visibility: f64,
    regime: &'static str,
    expected: String,
    exceeds_cap: bool,
}

#[derive(Debug, Clone, Serialize)]
struct OptimizationRecord {
    record: &'static str,
    qubits: usize,
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    rotated: bool,
    fidelity: f64,
    iterations: usize,
    visibility: f64,
    expected: f64,
    tolerance: f64,
    cap: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ThermalRecord {
    record: &'static str,
    index: usize,
    qubits: usize,
    beta: f64,
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    visibility: f64,
    cap: f64,
}

/// Streams: optimizations use `0..`, thermal states start here.
const THERMAL_STREAM: u64 = 1 << 32;

pub fn run(p: &WernerParams, seed: u64) -> LabResult<Outcome> {
    let caps = p
        .caps
        .iter()
        .map(|c| {
            let cap = singlet_monogamy_cap(c.n_a, c.n_b)?;
            let (num, den) = parse_fraction(&c.expected)
                .filter(|(n, _)| *n >= 0)
                .ok_or_else(|| LabError::Invalid(format!("expected cap {:?} is not a fraction", c.expected)))?;
            Ok(CapRecord {
                record: "cap",
                n_a: c.n_a,
                n_b: c.n_b,
                cap: format!("{}/{}", cap.numerator(), cap.denominator()),
                cap_value: cap.value(),
                expected: c.expected.clone(),
                matches: cap.equals_fraction(num as u64, den),
            })
        })
        .collect::<LabResult<Vec<_>>>()?;

    let [n_a, n_b] = p.region_sizes;
    let classes = p
        .classifications
        .iter()
        .map(|c| {
            let v = c.visibility.value();
            let cls = werner_classify(v, n_a, n_b)?;
            Ok(ClassRecord {
                record: "classification",
                visibility: v,
                regime: cls.regime.name(),
                expected: c.expected.clone(),
                exceeds_cap: cls.exceeds_cap,
            })
        })
        .collect::<LabResult<Vec<_>>>()?;

    let mut optimizations = Vec::new();
    for (i, o) in p.optimizations.iter().enumerate() {
        let mut rng = trial_rng(seed, i as u64);
        let partition = Partition::new(vec![o.region_a.clone(), o.region_b.clone()])?;
        let opt = optimize_mean_singlet_fidelity(o.qubits, &partition, o.iterations, &mut rng)?;
        let cap = singlet_monogamy_cap(o.region_a.len() as u64, o.region_b.len() as u64)?.value();
        let mut push = |rotated: bool, visibility: f64| {
            optimizations.push(OptimizationRecord {
                record: "optimization",
                qubits: o.qubits,
                region_a: o.region_a.clone(),
                region_b: o.region_b.clone(),
                rotated,
                fidelity: opt.fidelity,
                iterations: opt.iterations,
                visibility,
                expected: o.expected.value(),
                tolerance: o.tolerance,
                cap,
            })
        };
        push(false, max_effective_visibility(&opt.state, &partition)?);
        if o.rotated {
            let rotated = opt.state.to_density()?.collective_rotation(&random_su2(&mut rng))?;
            push(true, max_effective_visibility(&rotated, &partition)?);
        }
    }

    let thermal = match &p.thermal {
        None => Vec::new(),
        Some(t) => map_trials(t.states, |i| {
            let mut rng = trial_rng(seed, THERMAL_STREAM + i as u64);
            let n = rng.gen_range(t.min_qubits..=t.max_qubits);
            let mut couplings = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    couplings.push((a, b, rng.gen_range(-1.0..1.0)));
                }
            }
            let beta = rng.gen_range(0.0..8.0);
            let rho = heisenberg_thermal(n, beta, &couplings)?;
            let perm = random_permutation(n, &mut rng);
            let cut = rng.gen_range(1..n);
            let (mut a, mut b) = (perm[..cut].to_vec(), perm[cut..].to_vec());
            a.sort_unstable();
            b.sort_unstable();
            let partition = Partition::new(vec![a.clone(), b.clone()])?;
            Ok(ThermalRecord {
                record: "thermal",
                index: i,
                qubits: n,
                beta,
                visibility: max_effective_visibility(&rho, &partition)?,
                cap: singlet_monogamy_cap(a.len() as u64, b.len() as u64)?.value(),
                region_a: a,
                region_b: b,
            })
        })?,
    };

    let mut out = Outcome::default();
    let cap_mismatch = caps.iter().filter(|c| !c.matches).count();
    out.summarize(
        "caps",
        caps.iter()
            .map(|c| format!("({}, {}) -> {}", c.n_a, c.n_b, c.cap))
            .collect::<Vec<_>>(),
    );
    out.check(Check::count_zero("caps_exact", cap_mismatch, caps.len()));
    let class_mismatch = classes.iter().filter(|c| c.regime != c.expected).count();
    out.summarize(
        "classification",
        classes
            .iter()
            .map(|c| format!("V = {} -> {}", c.visibility, c.regime))
            .collect::<Vec<_>>(),
    );
    out.check(Check::count_zero(
        "classification_thresholds",
        class_mismatch,
        classes.len(),
    ));
    if !optimizations.is_empty() {
        let off = optimizations
            .iter()
            .filter(|o| !((o.visibility - o.expected).abs() <= o.tolerance))
            .count();
        let above_cap = optimizations.iter().filter(|o| !(o.visibility <= o.cap + 1e-9)).count();
        out.summarize(
            "optimized_visibility",
            optimizations.iter().map(|o| o.visibility).collect::<Vec<_>>(),
        );
        out.check(Check::count_zero(
            "optimized_visibility_reaches_cap",
            off,
            optimizations.len(),
        ));
        out.check(Check::count_zero(
            "optimized_visibility_within_cap",
            above_cap,
            optimizations.len(),
        ));
    }
    if !thermal.is_empty() {
        let excess = nan_max(thermal.iter().map(|t| t.visibility - t.cap));
        out.summarize("thermal_states", thermal.len());
        out.summarize("max_thermal_excess_over_cap", excess);
        out.check(Check::at_most("thermal_states_within_cap", excess, 1e-9));
    }
    caps.into_iter().for_each(|r| out.record(r));
    classes.into_iter().for_each(|r| out.record(r));
    optimizations.into_iter().for_each(|r| out.record(r));
    thermal.into_iter().for_each(|r| out.record(r));
    Ok(out)
}
