//! Tools for working with location event logs derived from ambient binary
//! sensors in a smart home.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`abstraction`] turns a raw sensor log into a log of location-presence
//!    events (one interval per visited area).
//! 2. [`conformance`] checks the event sequence against a floor-plan
//!    transition model and reports impossible direct transitions.
//! 3. [`repair`] and [`rules`] fix the log: `repair` runs a minimum-penalty
//!    edit search over insertions and removals, `rules` flags and resolves
//!    duration outliers; the two compose into a hybrid pipeline.
//! 4. [`report`] summarises what a repair changed, per location and per day.
//!
//! [`simulate`] generates seeded ground-truth trajectories with configurable
//! error injection so corrections can be scored against a known truth.
//!
//! See the `examples/` directory for a runnable program per capability, and
//! the `homelog` binary for the file-based command-line interface.

pub mod abstraction;
pub mod conformance;
pub mod io;
pub mod model;
pub mod repair;
pub mod report;
pub mod rules;
pub mod simulate;

mod error;

pub use error::{Error, Result};
