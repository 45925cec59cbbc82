pub mod classfile;
pub mod dataset;
pub mod error;
pub mod java;
pub mod ml;
pub mod model;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
