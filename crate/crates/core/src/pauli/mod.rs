//! Symplectic Pauli algebra, Pauli sums and Clifford frames.

mod frame;
mod string;
mod sum;

pub use frame::CliffordFrame;
pub use string::{Pauli, PauliString};
pub use sum::{PauliSum, PauliTerm};
