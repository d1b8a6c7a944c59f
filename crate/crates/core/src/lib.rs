//! Numerical machinery for intermittent interval maps and their toral
//! extensions: first-return inducing, Ulam discretizations of twisted
//! transfer operators, renewal sequences, tower assembly, correlation
//! estimators and eigenfunction probes.

pub mod cocycle;
pub mod correlations;
pub mod error;
pub mod fit;
pub mod inducing;
pub mod maps;
pub mod operators;
pub mod probes;
pub mod quad;
pub mod renewal;
pub mod sparse;

pub use error::{Error, Result};
