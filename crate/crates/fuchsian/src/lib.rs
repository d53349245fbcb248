//! Finitely generated Fuchsian groups acting on the Poincaré disc: orbit balls, injectivity
//! radius, random finite covers, Benjamini–Schramm statistics and truncated periodization.

pub mod cover;
pub mod domain;
pub mod error;
pub mod group;
pub mod orbit;
pub mod periodize;
pub mod words;

pub use error::{Error, Result};
