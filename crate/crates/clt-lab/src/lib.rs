//! IO and orchestration companion to `clt-lab-core`: instance files,
//! report serialization, parallel sampling, static SVG plots, and the
//! command-line surface. Everything numerical lives in the core crate;
//! this crate only moves bytes and schedules work.

// Frozen oracle constants keep their full published decimal expansions.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod instance;
pub mod parallel;
pub mod plot;
pub mod reports;
pub mod selftest;

pub use error::{LabError, Result};
