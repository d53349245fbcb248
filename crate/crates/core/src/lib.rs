//! Numerical core for quantum-ergodicity experiments on hyperbolic surfaces.

pub mod error;
pub mod geometry;
pub mod propagators;
pub mod quad;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
