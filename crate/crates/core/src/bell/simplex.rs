//! LHV membership as a linear feasibility problem over strategy weights,
//! solved by a phase-one revised simplex. Infeasible inputs come back with a
//! Bell inequality they violate, read off the phase-one duals.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::distribution::JointDistribution;
use super::scenario::BellScenario;
use super::strategy::{reconstruct_distribution, LHVModel, StrategySpace};
use crate::linalg::Radix;
use crate::{Error, Result};

/// Phase-one objective below which the distribution is declared local.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
const PRICING_TOLERANCE: f64 = 1e-11;
const PIVOT_TOLERANCE: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK_FOR_BLAND: usize = 32;
const MAX_ITERATIONS: usize = 200_000;

/// Linear functional `sum beta(j|i) p(j|i)` with its maximum over local
/// deterministic points.
#[derive(Debug, Clone, PartialEq)]
pub struct BellWitness {
    /// Same layout as [`JointDistribution::rows`].
    pub coefficients: Vec<Vec<f64>>,
    pub local_bound: f64,
    pub value: f64,
}

impl BellWitness {
    pub fn violation(&self) -> f64 {
        self.value - self.local_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub feasible: bool,
    pub certificate: Option<LHVModel>,
    pub witness: Option<BellWitness>,
    /// Largest deviation between the certificate's distribution and the input.
    pub residual: f64,
    pub phase_one_objective: f64,
    pub iterations: usize,
}

/// Constraint rows: normalization, then for every setting tuple all outcome
/// tuples but the last (implied by normalization).
struct Rows {
    settings: Radix,
    outcome_radices: Vec<Radix>,
    offsets: Vec<usize>,
    count: usize,
}

impl Rows {
    fn new(p: &JointDistribution) -> Self {
        let settings = p.setting_radix();
        let outcome_radices: Vec<Radix> = settings.iter().map(|i| p.outcome_radix(&i)).collect();
        let mut offsets = Vec::with_capacity(outcome_radices.len());
        let mut count = 1;
        for r in &outcome_radices {
            offsets.push(count);
            count += r.len() - 1;
        }
        Rows {
            settings,
            outcome_radices,
            offsets,
            count,
        }
    }

    fn rhs(&self, p: &JointDistribution) -> Vec<f64> {
        let mut b = vec![0.0; self.count];
        b[0] = 1.0;
        for (t, row) in p.rows().iter().enumerate() {
            for (j, v) in row.iter().take(row.len() - 1).enumerate() {
                b[self.offsets[t] + j] = *v;
            }
        }
        b
    }

    /// Rows holding a 1 in the column of `strategy` (flat strategy digits).
    fn column(&self, space: &StrategySpace, flat: usize, out: &mut Vec<usize>) {
        out.clear();
        out.push(0);
        let tuple = space.decode(flat);
        for (t, i) in self.settings.iter().enumerate() {
            let j: Vec<usize> = tuple.iter().zip(&i).map(|(m, &s)| m.respond(s)).collect();
            let radix = &self.outcome_radices[t];
            let idx = radix.index(&j);
            if idx + 1 < radix.len() {
                out.push(self.offsets[t] + idx);
            }
        }
    }
}

/// Decides whether `p` is a convex combination of local deterministic
/// distributions. Feasible verdicts carry the weights; infeasible ones a
/// violated Bell inequality.
pub fn lhv_membership(p: &JointDistribution, scenario: &BellScenario) -> Result<MembershipVerdict> {
    let outcomes = scenario.outcome_counts();
    if p.outcome_counts() != outcomes.as_slice() {
        return Err(Error::InvalidScenario(
            "distribution and scenario have different shapes".into(),
        ));
    }
    p.validate()?;
    let space = StrategySpace::new(outcomes)?;
    let rows = Rows::new(p);
    let m = rows.count;
    let n = space.len();

    // Column sparsity pattern, cached: each column has one entry per
    // setting tuple at most.
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut scratch = Vec::new();
    for s in 0..n {
        rows.column(&space, s, &mut scratch);
        columns.push(scratch.clone());
    }

    let mut b = rows.rhs(p);
    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    for (v, s) in b.iter_mut().zip(&sign) {
        *v *= s;
    }

    // Basis variables: structural s < n, artificial n + r.
    let mut basis: Vec<usize> = (0..m).map(|r| n + r).collect();
    let mut binv = DMatrix::<f64>::identity(m, m);
    let mut x = b.clone();
    let mut in_basis = vec![false; n];

    let mut iterations = 0;
    let mut streak = 0;
    let mut last_objective = f64::INFINITY;
    let mut y = vec![0.0; m];
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::VerificationFailed("simplex iteration limit reached".into()));
        }
        // Duals y = c_B^T B^-1 with unit cost on artificials.
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = basis
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= n)
                .map(|(k, _)| binv[(k, r)])
                .sum();
        }
        let reduced = |s: usize| -> f64 { -columns[s].iter().map(|&r| sign[r] * y[r]).sum::<f64>() };
        let bland = streak >= DEGENERATE_STREAK_FOR_BLAND;
        let mut entering = None;
        let mut best = -PRICING_TOLERANCE;
        for s in (0..n).filter(|&s| !in_basis[s]) {
            let d = reduced(s);
            if d < best {
                entering = Some(s);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(s) = entering else { break };

        let mut u = vec![0.0; m];
        for &r in &columns[s] {
            for (k, uk) in u.iter_mut().enumerate() {
                *uk += binv[(k, r)] * sign[r];
            }
        }
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..m {
            if u[k] > PIVOT_TOLERANCE {
                let ratio = x[k].max(0.0) / u[k];
                let better = match leave {
                    None => true,
                    Some((l, best_ratio)) => {
                        ratio < best_ratio - 1e-15 || (ratio <= best_ratio + 1e-15 && basis[k] < basis[l])
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // Cannot happen for a bounded phase-one problem; treat as breakdown.
            return Err(Error::VerificationFailed("unbounded phase-one direction".into()));
        };

        let pivot = u[r];
        for c in 0..m {
            binv[(r, c)] /= pivot;
        }
        x[r] /= pivot;
        for k in 0..m {
            if k != r && u[k] != 0.0 {
                let f = u[k];
                for c in 0..m {
                    let v = binv[(r, c)];
                    binv[(k, c)] -= f * v;
                }
                x[k] -= f * x[r];
            }
        }
        if basis[r] < n {
            in_basis[basis[r]] = false;
        }
        basis[r] = s;
        in_basis[s] = true;
        iterations += 1;

        if iterations % REFACTOR_EVERY == 0 {
            refactor(&basis, &columns, &sign, n, &b, &mut binv, &mut x)?;
        }
        let objective: f64 = basis.iter().zip(&x).filter(|(&v, _)| v >= n).map(|(_, xv)| xv).sum();
        if objective < last_objective - 1e-14 {
            streak = 0;
            last_objective = objective;
        } else {
            streak += 1;
        }
    }
    refactor(&basis, &columns, &sign, n, &b, &mut binv, &mut x)?;
    let objective: f64 = basis
        .iter()
        .zip(&x)
        .filter(|(&v, _)| v >= n)
        .map(|(_, xv)| xv.max(0.0))
        .sum();

    if objective <= FEASIBILITY_TOLERANCE {
        let mut weights = vec![0.0; n];
        for (&v, &xv) in basis.iter().zip(&x) {
            if v < n {
                weights[v] = xv.max(0.0);
            }
        }
        let entries = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, &w)| (space.decode(s), w))
            .collect();
        let model = LHVModel::new(space.outcome_counts().to_vec(), entries)?;
        let residual = reconstruct_distribution(&model, scenario)?.max_abs_diff(p)?;
        Ok(MembershipVerdict {
            feasible: true,
            certificate: Some(model),
            witness: None,
            residual,
            phase_one_objective: objective,
            iterations,
        })
    } else {
        // Final duals; y' = sign * y separates p from every local point.
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = basis
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= n)
                .map(|(k, _)| binv[(k, r)])
                .sum::<f64>()
                * sign[r];
        }
        let witness = witness_from_duals(&y, &rows, p, &columns);
        Ok(MembershipVerdict {
            feasible: false,
            certificate: None,
            witness: Some(witness),
            residual: objective,
            phase_one_objective: objective,
            iterations,
        })
    }
}

fn refactor(
    basis: &[usize],
    columns: &[Vec<usize>],
    sign: &[f64],
    n: usize,
    b: &[f64],
    binv: &mut DMatrix<f64>,
    x: &mut [f64],
) -> Result<()> {
    let m = basis.len();
    let mut bm = DMatrix::<f64>::zeros(m, m);
    for (k, &v) in basis.iter().enumerate() {
        if v >= n {
            bm[(v - n, k)] = 1.0;
        } else {
            for &r in &columns[v] {
                bm[(r, k)] = sign[r];
            }
        }
    }
    *binv = bm
        .try_inverse()
        .ok_or_else(|| Error::VerificationFailed("singular simplex basis".into()))?;
    for (k, xk) in x.iter_mut().enumerate() {
        *xk = (0..m).map(|r| binv[(k, r)] * b[r]).sum();
    }
    Ok(())
}

/// Turns dual row weights into per-probability coefficients and evaluates the
/// exact local bound by scanning every deterministic point.
fn witness_from_duals(y: &[f64], rows: &Rows, p: &JointDistribution, columns: &[Vec<usize>]) -> BellWitness {
    let scale = y.iter().skip(1).map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let coefficients: Vec<Vec<f64>> = rows
        .outcome_radices
        .iter()
        .enumerate()
        .map(|(t, radix)| {
            (0..radix.len())
                .map(|j| {
                    if j + 1 < radix.len() {
                        y[rows.offsets[t] + j] / scale
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let local_bound = columns
        .iter()
        .map(|col| col.iter().skip(1).map(|&r| y[r] / scale).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let value = coefficients
        .iter()
        .flatten()
        .zip(p.rows().iter().flatten())
        .map(|(c, v)| c * v)
        .sum();
    BellWitness {
        coefficients,
        local_bound,
        value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Direction;

    fn chsh_scenario() -> BellScenario {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        BellScenario::projective(&[
            vec![Direction::Z, Direction::X],
            vec![
                Direction::new([s, 0.0, s]).unwrap(),
                Direction::new([-s, 0.0, s]).unwrap(),
            ],
        ])
        .unwrap()
    }

    #[test]
    fn uniform_is_local() {
        let sc = chsh_scenario();
        let p = JointDistribution::uniform(sc.outcome_counts()).unwrap();
        let v = lhv_membership(&p, &sc).unwrap();
        assert!(v.feasible);
        assert!(v.residual < 1e-9);
    }

    #[test]
    fn pr_box_is_rejected_with_witness() {
        // p(a, b | x, y) = 1/2 if a xor b = x and y.
        let sc = chsh_scenario();
        let probs = (0..4)
            .map(|t| {
                let and = usize::from(t == 3);
                (0..4)
                    .map(|j| if ((j >> 1) ^ (j & 1)) == and { 0.5 } else { 0.0 })
                    .collect()
            })
            .collect();
        let p = JointDistribution::new(sc.outcome_counts(), probs).unwrap();
        let v = lhv_membership(&p, &sc).unwrap();
        assert!(!v.feasible);
        let w = v.witness.unwrap();
        assert!(w.violation() > 1e-6, "{w:?}");
    }
}
