//! Multiple testing with competition statistics: single and grouped
//! competition filters, corrected per-group levels, data-driven grouping,
//! e-value conversion and a Monte Carlo lab.

pub mod corrections;
pub mod error;
pub mod evalues;
pub mod filters;
pub mod grouping;
pub mod model;
mod optimize;
pub mod simlab;

pub use error::{Error, Result};
