//! Observables on the Poincaré disc: multiplication, finite-range and differential operators,
//! their complete symbols, propagator sandwiches and the quantum-ergodic limit term.

pub mod bounds;
pub mod error;
pub mod limit;
pub mod observable;
pub mod preset;
pub mod sandwich;
pub mod symbol;

pub use error::{Error, Result};
pub use observable::{LocalityConstants, Observable, Variant};
