//! Command-line runner for `skewlab-core`: configuration, result files with a
//! hashed manifest, an operator-set cache, and the acceptance suite.

pub mod acceptance;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
