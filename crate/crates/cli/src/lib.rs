//! Command-line verification suites for contact-interaction limits.
//!
//! Each suite writes CSV tables, optional binary table dumps and a
//! `summary.json` into the output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod io;
pub mod suites;

pub use config::{ConfigError, Overrides, RunConfig};
pub use suites::{execute, Runner, Suite, SuiteReport, Summary};
