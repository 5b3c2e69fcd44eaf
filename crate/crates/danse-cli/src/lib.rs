//! Command-line driver for disordered nonlinear lattice sweeps.
//!
//! The binary (`danse`) orchestrates ensembles defined by TOML manifests:
//! `run` executes a sweep and writes plot-ready data files, `preset` emits
//! manifests for the bundled experiments, `collapse` fits initial-width
//! scaling exponents from run summaries, and `units` converts laser/atom
//! parameters into lattice units. All numerical work lives in the `danse`
//! library crate; this crate owns parsing, file layout, and determinism of
//! the written artifacts.

pub mod cli;
pub mod collapse;
pub mod error;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod runner;
pub mod units;

pub use error::{CliError, Result};
