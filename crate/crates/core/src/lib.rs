//! Transfer of symmetric multi-qubit states from a two-mode cavity onto
//! individual three-level atoms.
//!
//! * [`symstate`]: symmetric n-qubit states and their subset decomposition.
//! * [`fockspace`]: exact cavity-plus-atoms dynamics on a truncated Fock basis.
//! * [`protocol`]: ensemble-level deterministic and measurement-driven schemes.
//! * [`cloning`]: optimal-cloning fidelity and clone quality.
//! * [`trapping`]: trapping-state escape under interaction-time jitter.
//! * [`cli`]: experiment configuration, CSV output and checking.

pub mod cli;
pub mod cloning;
pub mod error;
pub mod fockspace;
pub mod protocol;
pub mod rng;
pub mod symstate;
pub mod trapping;

pub use error::{Error, Result};
