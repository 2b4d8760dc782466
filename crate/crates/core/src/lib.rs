//! Optimistic quantum circuits at desk scale.
//!
//! An optimistic circuit approximates a target unitary well on most of the
//! Hilbert space while allowing a small subspace of inputs to carry large
//! error. The crate builds the ancilla-free logarithmic-depth optimistic QFT
//! together with the linear-depth references it is derived from, simulates
//! them on dense statevectors, and measures the error functionals used to
//! check their error bounds:
//!
//! - [`statevec`]: dense statevector engine (qubit 0 is the least significant
//!   bit of the basis index).
//! - [`circuit`]: gate-level IR with dyadic angles, depth/locality metrics and
//!   a line-oriented text format.
//! - [`qftlib`]: exact, truncated, blocked and optimistic QFT builders.
//! - [`errmetrics`]: average Frobenius error, subspace error, QPE wraparound
//!   profiles and the commutation gap.
//! - [`reduction`]: Weyl–Heisenberg randomization, its purification, and the
//!   approximate controlled phase gradient.
//! - [`arith`]: windowed (carry cut-off) adder, a QFT-sandwich modular
//!   multiplier and the period-finding experiment.

pub mod arith;
pub mod circuit;
pub mod errmetrics;
mod error;
pub mod qftlib;
pub mod reduction;
pub mod statevec;

pub use circuit::{Circuit, DyadicAngle, Gate};
pub use error::{Error, Result};
pub use qftlib::{BlockLayout, QftVariant};
pub use statevec::{Permutation, Statevector};

/// Largest register the dense engine is asked to hold.
pub const MAX_QUBITS: usize = 22;
