#![no_std]
extern crate alloc;

pub mod dimension;
pub mod empirical;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
