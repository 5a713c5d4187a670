//! Entanglement detection and quantification for two coupled spins of
//! integer spin `j`, each with local dimension `N = 2j + 1`.
//!
//! The central object is the witness `W` obtained from the positive map
//! `Φ(B) = tr(B)·I − B − ϑB`, where `ϑ` is time reversal. The crate
//! evaluates `W` together with the PPT and realignment criteria, turns the
//! three functionals into lower bounds on concurrence and entanglement of
//! formation, and provides closed-form references to check all of it.

pub mod bounds;
pub mod criteria;
pub mod error;
pub mod io;
pub mod matkit;
pub mod oracle;
pub mod spinspace;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
