//! Exact symbolic engine for Dorfman brackets on `TM ⊕ E*`, the standard
//! Courant–Dorfman bracket on the total space of `E`, and the lift between
//! them.

pub mod brackets;
pub mod bundle;
pub mod cartan;
pub mod error;
pub mod json;
pub mod lift;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod torus;
pub mod total_space;

pub use error::{Error, Result};
