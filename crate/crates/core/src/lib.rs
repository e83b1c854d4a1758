//! Simulation of a BB84-style bit commitment whose committed qubits pass
//! through a depolarizing channel, together with the two-qubit algebra
//! needed to check when that channel breaks an EPR attack.

pub mod channels;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod protocol;
pub mod qmat;
pub mod security;
pub mod states;

pub use error::{Error, Result};
