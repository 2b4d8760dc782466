//! Arithmetic on quantum registers: a carry-window adder, a Fourier-space
//! modular multiplier and the period-finding experiment built on it.

pub mod adder;
pub mod modmul;
pub mod shor;

pub use adder::{adder_avg_error, exact_add, windowed_add, AdderConfig};
pub use modmul::{modmul_circuit, ModularMultiplier};
pub use shor::{period_finding_experiment, FactoringConfig, FactoringResult};
