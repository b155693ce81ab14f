//! Command-line front end for the heatrad library: job parsing, sweep
//! execution and structured CSV/JSON output.

pub mod cli;
pub mod execute;
pub mod jobspec;
