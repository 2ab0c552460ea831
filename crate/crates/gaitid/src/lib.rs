//! File formats, report artifacts and the command-line front end of the
//! gait identification pipeline.

pub mod artifact;
pub mod cli;
pub mod error;
pub mod formats;
pub mod model;
pub mod tables;

pub use cli::{run, Cli};
pub use error::{CliError, Result};
