//! File formats, configuration and the experiment runner around
//! [`pulearn_core`].

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;
pub mod single;

pub use aggregate::ResultTable;
pub use config::ExperimentConfig;
pub use error::{Error, Result};
