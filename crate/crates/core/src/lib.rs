//! Approximation on compact data spaces built from Jacobi eigen-systems, and lifting of
//! locally known functions between two such spaces through a joint data space.

pub mod dataspace;
pub mod error;
pub mod fit;
pub mod joint;
pub mod kernels;
pub mod orthopoly;
pub mod special;
pub mod tridiag;

pub use error::{Error, Result};
