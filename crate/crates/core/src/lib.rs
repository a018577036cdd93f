pub mod error;
pub mod experiment;
pub mod extremal;
pub mod fft;
pub mod field;
pub mod gaussian;
pub mod model;
pub mod optimize;
pub mod pairwise;
pub mod simulate;
pub mod stats;
pub mod whittle;

pub use error::{Error, Result};
