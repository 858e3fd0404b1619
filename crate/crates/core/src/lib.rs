//! Core algorithms for checking whether correlations between collective
//! (magnetization-style) measurements on many-qubit states admit local hidden
//! variable models.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function over
//! immutable inputs; randomness is always supplied by the caller as an
//! [`rand::Rng`], so every sweep is reproducible from its seed.
//!
//! Modules:
//!
//! * [`pauli`]: Pauli labels and strings, unit directions, measurement frames.
//! * [`state`]: dense density matrices and pure states, partitions,
//!   effective-state averaging, permutation symmetrization, Heisenberg thermal
//!   states and Werner twirling.
//! * [`criteria`]: correlation tensors, the two-setting sum-of-squares LHV
//!   criterion, magnetization correlations and Bell parameters.
//! * [`anticommute`]: binary-tree constructions of mutually anti-commuting
//!   operator families and the associated region-size bounds.
//! * [`monogamy`]: anti-commuting expectation-vector bounds, the paired-vector
//!   decomposition of the criterion value, singlet-monogamy visibility caps.
//! * [`bell`]: generic Bell scenarios with POVM settings, the
//!   deterministic-strategy LHV construction, LHV membership by linear
//!   feasibility, and CHSH optimization.
#![no_std]
#![deny(missing_debug_implementations)]
// `!(x <= bound)` is used deliberately so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod anticommute;
pub mod bell;
pub mod criteria;
mod error;
pub mod linalg;
pub mod monogamy;
pub mod pauli;
pub mod random;
pub mod state;

pub use error::{Error, Result};
