//! File formats, reports and the command-line driver around
//! `spatial-fusion-core`.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod manifest;
pub mod mskt;
pub mod params_io;
pub mod report;
pub mod wav;

pub use error::{Error, Result};
