//! Scenario runner behind the `sim` binary.
//!
//! A scenario is a JSON document `{kind, params, output, seed}`. Command-line
//! flags override the matching config fields.

pub mod run;
pub mod scenario;

pub use run::{run, Artifact, Outcome, RunError};
pub use scenario::{validate, Format, Kind, Params, Scenario, Violation};
