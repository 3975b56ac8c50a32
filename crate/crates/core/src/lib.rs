pub mod diffusion;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod kernel;
pub mod mmd;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
