//! Reduction, synthesis, routing and exact simulation of Trotterized
//! electronic-structure dynamics, plus the trajectory-to-PLS regression stage.
//!
//! Pauli words are written with the leftmost letter acting on qubit 0, and
//! qubit `q` is bit `q` of a basis-state index throughout the crate.

pub mod circuit;
pub mod error;
pub mod fermion;
pub mod pauli;
pub mod pipeline;
pub mod pls;
pub mod reduction;
pub mod samples;
pub mod sim;
pub mod synthesis;
pub mod synthetic;
pub mod transpile;

#[cfg(test)]
pub(crate) mod testing;

pub use circuit::{Circuit, CircuitMetrics, Gate};
pub use error::{Error, Result};
pub use pauli::{CliffordFrame, Pauli, PauliString, PauliSum, PauliTerm};
pub use pipeline::{Engine, TimeGrid, TrajectoryMatrix};
pub use pls::{EvalMetrics, PlsModel};
pub use sim::{DenseOperator, StateVector};
pub use synthesis::{SynthesisConfig, SynthesisMethod, SynthesizedProgram};
pub use transpile::{CouplingGraph, TranspileReport};
