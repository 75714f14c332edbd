//! lncRNA-disease association prediction over a heterogeneous
//! lncRNA / miRNA / disease network.

pub mod cnn;
pub mod completion;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod gbdt;
pub mod persist;
pub mod similarity;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
