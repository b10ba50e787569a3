//! Parallel fixed-b tables, replication studies, file formats and the
//! `lagwin` command line on top of `lagwin-core`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod parallel;

pub use error::{Error, Result};
