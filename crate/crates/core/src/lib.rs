pub mod cli;
pub mod error;
pub mod features;
pub mod harness;
pub mod kernels;
pub mod pmodel;
pub mod structured;
pub mod transforms;

pub use error::{Error, Result};
