//! File formats, model persistence, report rendering, the command line and the
//! HTTP service around [`renewcast_core`].

pub mod api;
pub mod cli;
pub mod document;
pub mod error;
pub mod io;
pub mod model_file;
pub mod report;

pub use error::{Error, Result};
