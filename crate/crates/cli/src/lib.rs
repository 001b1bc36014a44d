//! Command-line front end: TSV tables in, rejection lists and JSON
//! summaries out.

pub mod config;
pub mod error;
pub mod io;
pub mod run;
