//! Families of mutually anti-commuting multi-region operators built from
//! binary trees.
//!
//! A family over `k` regions is a list of operator sequences; each sequence
//! places one `X` or `Y` on one qubit of every region. Every node of the tree
//! is a fresh qubit in some region, and its two children carry `X` and `Y`.
//! Two leaves therefore clash (same qubit, different label) exactly once, at
//! their lowest common ancestor, and otherwise act on disjoint qubits, so
//! every pair anti-commutes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::pauli::{PauliLabel, PauliString};
use crate::{Error, Result};

/// Largest `k` accepted by the tree constructions.
pub const MAX_CONSTRUCTION_K: usize = 16;
/// Largest `k` for which constructions are checked pair by pair.
pub const MAX_VERIFIED_K: usize = 8;

/// `X` (index 1) or `Y` (index 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XyLabel {
    X,
    Y,
}

impl XyLabel {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(XyLabel::X),
            2 => Ok(XyLabel::Y),
            other => Err(Error::InvalidArgument(format!("Pauli index {other} is not 1 or 2"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            XyLabel::X => 1,
            XyLabel::Y => 2,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            XyLabel::X => XyLabel::Y,
            XyLabel::Y => XyLabel::X,
        }
    }

    pub fn pauli(self) -> PauliLabel {
        match self {
            XyLabel::X => PauliLabel::X,
            XyLabel::Y => PauliLabel::Y,
        }
    }
}

/// One region's factor: 1-based qubit within the region and its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalOp {
    pub qubit: usize,
    pub pauli: XyLabel,
}

/// One factor per region, in region order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorSequence {
    ops: Vec<LocalOp>,
}

impl OperatorSequence {
    pub fn new(ops: Vec<LocalOp>) -> Self {
        OperatorSequence { ops }
    }

    pub fn ops(&self) -> &[LocalOp] {
        &self.ops
    }

    /// Label pattern as bits, region 1 most significant (X = 0, Y = 1).
    pub fn pattern(&self) -> usize {
        self.ops
            .iter()
            .fold(0, |acc, op| (acc << 1) | usize::from(op.pauli == XyLabel::Y))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorFamily {
    region_sizes: Vec<usize>,
    sequences: Vec<OperatorSequence>,
}

impl OperatorFamily {
    /// Checks shape only (one factor per region, qubits in range); use
    /// [`OperatorFamily::verify`] for anti-commutation.
    pub fn new(region_sizes: Vec<usize>, sequences: Vec<OperatorSequence>) -> Result<Self> {
        if region_sizes.is_empty() || region_sizes.contains(&0) {
            return Err(Error::InvalidArgument("every region needs at least one qubit".into()));
        }
        for (s, seq) in sequences.iter().enumerate() {
            if seq.ops.len() != region_sizes.len() {
                return Err(Error::LengthMismatch {
                    left: seq.ops.len(),
                    right: region_sizes.len(),
                });
            }
            for (j, op) in seq.ops.iter().enumerate() {
                if op.qubit == 0 || op.qubit > region_sizes[j] {
                    return Err(Error::InvalidArgument(format!(
                        "sequence {s}: qubit {} outside region {} of size {}",
                        op.qubit,
                        j + 1,
                        region_sizes[j]
                    )));
                }
            }
        }
        Ok(OperatorFamily {
            region_sizes,
            sequences,
        })
    }

    pub fn k(&self) -> usize {
        self.region_sizes.len()
    }

    pub fn region_sizes(&self) -> &[usize] {
        &self.region_sizes
    }

    pub fn max_region_size(&self) -> usize {
        self.region_sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn sequences(&self) -> &[OperatorSequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn total_qubits(&self) -> usize {
        self.region_sizes.iter().sum()
    }

    /// Global index of the first qubit of each region (regions laid out
    /// consecutively).
    pub fn region_offsets(&self) -> Vec<usize> {
        self.region_sizes
            .iter()
            .scan(0, |acc, &n| {
                let start = *acc;
                *acc += n;
                Some(start)
            })
            .collect()
    }

    /// Pauli strings over all `sum n_j` qubits.
    pub fn expand(&self) -> Vec<PauliString> {
        let offsets = self.region_offsets();
        let total = self.total_qubits();
        self.sequences
            .iter()
            .map(|seq| {
                let support: Vec<(usize, PauliLabel)> = seq
                    .ops
                    .iter()
                    .zip(&offsets)
                    .map(|(op, off)| (off + op.qubit - 1, op.pauli.pauli()))
                    .collect();
                PauliString::with_support(total, &support).expect("qubits in range")
            })
            .collect()
    }

    pub fn verify(&self) -> bool {
        verify_anticommuting(&self.expand())
    }

    /// Same sequences with every region enlarged to `sizes` (each at least the
    /// current size).
    pub fn with_region_sizes(&self, sizes: &[usize]) -> Result<Self> {
        if sizes.len() != self.k() {
            return Err(Error::LengthMismatch {
                left: sizes.len(),
                right: self.k(),
            });
        }
        if let Some(j) = (0..self.k()).find(|&j| sizes[j] < self.region_sizes[j]) {
            return Err(Error::InvalidArgument(format!(
                "region {} needs at least {} qubits",
                j + 1,
                self.region_sizes[j]
            )));
        }
        OperatorFamily::new(sizes.to_vec(), self.sequences.clone())
    }

    pub fn with_uniform_size(&self, n: usize) -> Result<Self> {
        self.with_region_sizes(&vec![n; self.k()])
    }
}

/// True iff every pair of strings anti-commutes (parity rule). Strings of
/// unequal length never pass.
pub fn verify_anticommuting(strings: &[PauliString]) -> bool {
    strings
        .iter()
        .enumerate()
        .all(|(i, p)| strings[i + 1..].iter().all(|q| p.anticommutes(q).unwrap_or(false)))
}

/// Smallest power of two `2^m >= x`, `m >= 0`.
pub fn g(x: f64) -> Result<u64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("g needs a positive argument, got {x}")));
    }
    let mut p = 1u64;
    while (p as f64) < x {
        p = p
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidArgument(format!("g({x}) overflows")))?;
    }
    Ok(p)
}

/// `g(num / den)` in exact integer arithmetic.
pub fn g_ratio(num: u64, den: u64) -> Result<u64> {
    if num == 0 || den == 0 {
        return Err(Error::InvalidArgument(format!(
            "g needs a positive argument, got {num}/{den}"
        )));
    }
    let mut p = 1u64;
    while (p as u128) * (den as u128) < num as u128 {
        p = p
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidArgument(format!("g({num}/{den}) overflows")))?;
    }
    Ok(p)
}

/// `sum_{l=1..k} g(2^(l-1) / (k-1))`: the per-region size reached by the
/// folded tree.
pub fn folded_region_bound(k: usize) -> Result<u64> {
    if !(2..=63).contains(&k) {
        return Err(Error::InvalidArgument(format!("bound needs 2 <= k <= 63, got {k}")));
    }
    (1..=k).try_fold(0u64, |acc, l| Ok(acc + g_ratio(1u64 << (l - 1), (k - 1) as u64)?))
}

/// `ceil(2^(k-2) / (k-1))`.
pub fn min_region_size(k: usize) -> Result<u64> {
    if !(2..=64).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "min_region_size needs 2 <= k <= 64, got {k}"
        )));
    }
    let num = 1u128 << (k - 2);
    let den = (k - 1) as u128;
    Ok(num.div_ceil(den) as u64)
}

/// `floor(log2 N)`.
pub fn max_lhv_regions(n: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 qubits, got {n}")));
    }
    Ok(63 - n.leading_zeros())
}

fn check_k(k: usize, min: usize) -> Result<()> {
    if k < min || k > MAX_CONSTRUCTION_K {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside {min}..={MAX_CONSTRUCTION_K}"
        )));
    }
    Ok(())
}

/// Builds the family from a region label for every tree node, given as
/// `labels[d][prefix]` for depth `d` and the `d` leading leaf bits. Qubits of a
/// region are numbered in breadth-first order. Bit `d` of a leaf index (most
/// significant first) picks `X`/`Y` at depth `d`.
fn family_from_labels(k: usize, labels: &[Vec<usize>]) -> Result<OperatorFamily> {
    let mut counters = vec![0usize; k];
    let qubits: Vec<Vec<usize>> = labels
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|&r| {
                    counters[r] += 1;
                    counters[r]
                })
                .collect()
        })
        .collect();
    let leaves = 1usize << k;
    let mut sequences = Vec::with_capacity(leaves);
    for s in 0..leaves {
        let mut ops: Vec<Option<LocalOp>> = vec![None; k];
        for d in 0..k {
            let prefix = s >> (k - d);
            let region = labels[d][prefix];
            let pauli = if (s >> (k - 1 - d)) & 1 == 0 {
                XyLabel::X
            } else {
                XyLabel::Y
            };
            if ops[region]
                .replace(LocalOp {
                    qubit: qubits[d][prefix],
                    pauli,
                })
                .is_some()
            {
                return Err(Error::VerificationFailed(format!(
                    "region {} appears twice on the path of leaf {s}",
                    region + 1
                )));
            }
        }
        sequences.push(OperatorSequence {
            ops: ops
                .into_iter()
                .map(|op| op.expect("path visits every region"))
                .collect(),
        });
    }
    OperatorFamily::new(counters, sequences)
}

/// Plain binary tree: depth `j` is region `j`, so region `j` (1-based) holds
/// `2^(j-1)` qubits.
pub fn simple_tree(k: usize) -> Result<OperatorFamily> {
    check_k(k, 1)?;
    let labels: Vec<Vec<usize>> = (0..k).map(|d| vec![d; 1 << d]).collect();
    let family = family_from_labels(k, &labels)?;
    if k <= MAX_VERIFIED_K && !family.verify() {
        return Err(Error::VerificationFailed(format!("simple_tree({k})")));
    }
    Ok(family)
}

/// Node labels of the folded tree. Nodes are labelled breadth first; each
/// node takes, among the regions not yet used on its path, the one with the
/// largest projected final size. A region still open at a node of height `h`
/// is projected to cost the average `(2^h - 1)/h` of a balanced subtree there;
/// labelling it at the node itself costs 1, deferring it costs two subtrees of
/// height `h - 1`. Projections are kept as integers scaled by `lcm(1..=k)`.
fn folded_labels(k: usize) -> Vec<Vec<usize>> {
    let scale = (1..=k as u64).fold(1u64, |acc, h| acc / gcd(acc, h) * h);
    let avg = |h: usize| -> i64 { (((1u64 << h) - 1) * (scale / h as u64)) as i64 };
    let unit = scale as i64;
    let mut projected = vec![avg(k); k];
    let mut frontier: Vec<u32> = vec![(1u32 << k) - 1];
    let mut labels = Vec::with_capacity(k);
    for d in 0..k {
        let h = k - d;
        let deferred = if h > 1 { 2 * avg(h - 1) } else { 0 };
        let mut level = Vec::with_capacity(frontier.len());
        let mut next = Vec::with_capacity(2 * frontier.len());
        for &open in &frontier {
            let region = (0..k)
                .filter(|r| open >> r & 1 == 1)
                .max_by(|&a, &b| projected[a].cmp(&projected[b]).then(b.cmp(&a)))
                .expect("open regions remain above the leaves");
            for r in (0..k).filter(|r| open >> r & 1 == 1) {
                projected[r] += if r == region { unit } else { deferred } - avg(h);
            }
            level.push(region);
            let rest = open & !(1u32 << region);
            next.push(rest);
            next.push(rest);
        }
        labels.push(level);
        frontier = next;
    }
    labels
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Folded binary tree: the same `2^k` leaves as [`simple_tree`], with the
/// deep levels of the tree spread over all regions instead of piling up in
/// the last one. The largest region holds `ceil((2^k - 2)/(k - 1))` qubits,
/// the least possible once one region sits at the root, and never more than
/// [`folded_region_bound`].
pub fn folded_tree(k: usize) -> Result<OperatorFamily> {
    check_k(k, 2)?;
    let family = family_from_labels(k, &folded_labels(k))?;
    let bound = folded_region_bound(k)? as usize;
    if family.max_region_size() > bound {
        return Err(Error::VerificationFailed(format!(
            "folded_tree({k}) uses {} qubits in a region, bound {bound}",
            family.max_region_size()
        )));
    }
    if k <= MAX_VERIFIED_K && !family.verify() {
        return Err(Error::VerificationFailed(format!("folded_tree({k})")));
    }
    Ok(family)
}

/// Applies the two family-preserving operations region by region: cyclic
/// qubit shift `l -> l + shift (mod n_j)` and, where flagged, `X <-> Y`.
pub fn generate_vector_family(base: &OperatorFamily, shifts: &[usize], flips: &[bool]) -> Result<OperatorFamily> {
    let k = base.k();
    if shifts.len() != k || flips.len() != k {
        return Err(Error::LengthMismatch {
            left: shifts.len().max(flips.len()),
            right: k,
        });
    }
    if let Some(j) = (0..k).find(|&j| shifts[j] >= base.region_sizes[j]) {
        return Err(Error::InvalidArgument(format!(
            "shift {} out of range for region {} of size {}",
            shifts[j],
            j + 1,
            base.region_sizes[j]
        )));
    }
    let sequences = base
        .sequences
        .iter()
        .map(|seq| OperatorSequence {
            ops: seq
                .ops
                .iter()
                .enumerate()
                .map(|(j, op)| LocalOp {
                    qubit: (op.qubit - 1 + shifts[j]) % base.region_sizes[j] + 1,
                    pauli: if flips[j] { op.pauli.flipped() } else { op.pauli },
                })
                .collect(),
        })
        .collect();
    OperatorFamily::new(base.region_sizes.clone(), sequences)
}

/// Every shifted copy of `base` (no flips): `prod n_j` families. For each
/// label pattern the shifted copies visit every qubit tuple exactly once.
pub fn all_shifted_families(base: &OperatorFamily) -> Result<Vec<OperatorFamily>> {
    let radix = crate::linalg::Radix::new(base.region_sizes.clone());
    let flips = vec![false; base.k()];
    radix
        .iter()
        .map(|shifts| generate_vector_family(base, &shifts, &flips))
        .collect()
}
