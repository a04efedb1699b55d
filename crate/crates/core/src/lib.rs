//! Kirkwood-Salsburg operator laboratory.

pub mod cli;
pub mod cluster;
pub mod configint;
pub mod error;
pub mod ksop;
pub mod numeric;
pub mod oracle;
pub mod partition;
pub mod potential;
pub mod spectral;

pub use error::{KsError, Result};
