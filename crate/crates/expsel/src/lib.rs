//! Probability engines for experiences selected from finite-dimensional
//! quantum models.
//!
//! Two formulations of the same rule are implemented and cross-checked:
//!
//! * [`pathsum`] — a brute-force engine over discrete configuration
//!   lattices: exhaustive path enumeration, selected propagators, and the
//!   doubled configuration-pair sum weighted by a factorized boundary
//!   operator.
//! * [`experience`] — an operator engine over piecewise-unitary schedules:
//!   time-stamped projector events, state- and operator-picture probability
//!   tables, memory-encoded conditioning and chained experiences.
//!
//! On top of those, [`prescriptions`] renders the alternative selection
//! rules (joint, coherent sum, incoherent sum) next to the minimal one and
//! reports divergences, [`wignerfriend`] builds the observer-and-friend
//! scenario with its closed-form tables, [`compile`] lowers operator
//! scenarios onto lattices so the two engines can be compared term by term,
//! and [`scenario`] reads versioned JSON scenario documents for the CLI.
//!
//! The `examples/` directory contains one runnable example per capability;
//! `cargo run -- selftest` runs the full acceptance suite.

pub mod compile;
pub mod error;
pub mod experience;
pub mod hilbert;
pub mod pathsum;
pub mod prescriptions;
pub mod random;
pub mod report;
pub mod scenario;
pub mod selftest;
pub mod table;
pub mod wignerfriend;

pub use error::{Error, Result};
pub use hilbert::{CompositeSpace, DensityOperator, OperatorMatrix, StateVector, C64};
pub use table::ProbabilityTable;
