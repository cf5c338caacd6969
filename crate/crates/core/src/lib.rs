pub mod cli;
pub mod error;
pub mod estimators;
pub mod gaussian_model;
pub mod linalg;
pub mod rst;
pub mod experiments;
pub mod smoothing;
pub mod statkit;

pub use error::{Error, Result};
