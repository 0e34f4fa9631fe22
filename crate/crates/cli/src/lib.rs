//! Configuration-driven runner for the fractional porous medium solver.

pub mod checks;
pub mod closed_form;
pub mod compare;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod plots;
pub mod run;

pub use error::{CliError, Result};
