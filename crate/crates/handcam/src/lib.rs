//! File formats, the pipeline runner and command-line plumbing around
//! [`handcam_core`].

pub mod config;
pub mod error;
pub mod featfile;
pub mod modelfile;
pub mod pipeline;
pub mod ppm;
pub mod report;
pub mod stages;
pub mod synthcfg;
pub mod textfmt;

pub use error::{Error, Result};
