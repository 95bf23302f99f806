//! Command-line front end for the two-tone optomechanics library:
//! scenario configs in, deterministic CSV spectra out, plus named preset
//! datasets, impedance-match solving, and threshold searches.

pub mod config;
pub mod csvout;
pub mod error;
pub mod figures;
pub mod optimize;
pub mod run;

pub use error::{CliError, Result};
