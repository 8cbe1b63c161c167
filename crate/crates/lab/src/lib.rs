//! Command-line laboratory for superadiabatic geometric quantum gates.
//!
//! Wraps the `sagqg-core` simulations in subcommands that read a layered
//! configuration (flags over a JSON file over defaults) and write CSV and
//! JSON artifacts. Every artifact starts with the resolved configuration,
//! the seed and a content hash of the configuration, and is reproducible
//! byte for byte from them.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use error::LabError;
