//! ASCII rendering of an anti-commuting family as the binary tree it was
//! built from. The tree is recovered from the sequences alone: a subtree's
//! root is the operator its leaves share, with one Pauli label on the first
//! half of the leaves and the other on the second half.

use std::fmt::Write as _;

use macroreal_core::anticommute::{OperatorFamily, OperatorSequence, XyLabel};

fn label(p: XyLabel) -> char {
    match p {
        XyLabel::X => 'X',
        XyLabel::Y => 'Y',
    }
}

/// Region (0-based) of the node shared by `leaves`, skipping `used` regions.
fn shared_node(leaves: &[(usize, &OperatorSequence)], used: &[bool]) -> Option<usize> {
    let half = leaves.len() / 2;
    (0..used.len()).filter(|&r| !used[r]).find(|&r| {
        let first = leaves[0].1.ops()[r];
        let second = leaves[half].1.ops()[r];
        second.pauli == first.pauli.flipped()
            && leaves.iter().enumerate().all(|(i, (_, s))| {
                let op = s.ops()[r];
                op.qubit == first.qubit && op.pauli == if i < half { first.pauli } else { second.pauli }
            })
    })
}

fn leaf_line(index: usize, seq: &OperatorSequence) -> String {
    let ops: Vec<String> = seq
        .ops()
        .iter()
        .map(|op| format!("{}{}", label(op.pauli), op.qubit))
        .collect();
    format!("#{index} {}", ops.join(" "))
}

fn walk(out: &mut String, leaves: &[(usize, &OperatorSequence)], used: &mut [bool], prefix: &str) -> bool {
    if leaves.len() == 1 {
        let _ = writeln!(out, "{}", leaf_line(leaves[0].0, leaves[0].1));
        return true;
    }
    if !leaves.len().is_power_of_two() {
        return false;
    }
    let Some(r) = shared_node(leaves, used) else {
        return false;
    };
    let op = leaves[0].1.ops()[r];
    let _ = writeln!(out, "R{}q{}", r + 1, op.qubit);
    used[r] = true;
    let half = leaves.len() / 2;
    let halves = [(&leaves[..half], op.pauli), (&leaves[half..], op.pauli.flipped())];
    for (i, (part, p)) in halves.into_iter().enumerate() {
        let last = i == 1;
        let _ = write!(out, "{prefix}{}-{}- ", if last { '`' } else { '+' }, label(p));
        let child = format!("{prefix}{}    ", if last { ' ' } else { '|' });
        if !walk(out, part, used, &child) {
            return false;
        }
    }
    used[r] = false;
    true
}

/// Tree drawing of `family`; falls back to one line per sequence when the
/// family is not tree shaped.
pub fn render_tree(family: &OperatorFamily) -> String {
    let leaves: Vec<(usize, &OperatorSequence)> = family.sequences().iter().enumerate().collect();
    let mut out = String::new();
    let mut used = vec![false; family.k()];
    if !leaves.is_empty() && walk(&mut out, &leaves, &mut used, "") {
        return out;
    }
    out.clear();
    for (i, s) in leaves {
        let _ = writeln!(out, "{}", leaf_line(i, s));
    }
    out
}
