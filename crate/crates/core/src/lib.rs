pub mod adaptivity;
pub mod error;
pub mod estimators;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod mesh;

pub use error::{Error, Result};
