//! Command-line front end for the induced-oscillation artifact.
//!
//! Four subcommands drive the `indosc-core` crate: `construct` prints
//! the forcing's amplitude schedule and admissibility data, `certify`
//! checks every lemma hypothesis over an index range, `solve` samples
//! the explicit solutions with residuals and envelopes, and `sweep`
//! maps the certification verdict over a grid of amplitude ratios and
//! epsilon multipliers. Reports serialize to JSON or CSV with a
//! deterministic data body.

pub mod commands;
pub mod config;
pub mod report;
