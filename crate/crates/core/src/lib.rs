pub mod dataset;
pub mod error;
pub mod fixture;
pub mod grnn;
pub mod harness;
pub mod metrics;
pub mod mlfn;
pub mod model;
pub mod persistence;
pub mod svr;

pub use error::{Error, Result};
