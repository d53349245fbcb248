//! Quantum-variance harness: the exact 1-D model, eigendata exchange, a finite-element
//! Laplace–Beltrami eigensolver on closed surfaces, the variance functional, the Weyl check,
//! the error budget and the cover-tower experiment.

pub mod eigendata;
pub mod error;
pub mod fem;
pub mod lanczos;
pub mod pipeline;
pub mod qv;
pub mod toy1d;
pub mod tower;
pub mod window;

pub use error::{Error, Result};
