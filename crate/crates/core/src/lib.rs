//! Simulation of linear and nonlinear optical response via filtered block
//! encodings and spectral bin search.

pub mod encoding;
pub mod error;
pub mod estimation;
pub mod filter;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod response;
pub mod tolerances;

pub use error::{Error, Result};
pub use model::{make_hubbard_dimer, make_random_model, ModelSpec};
pub use num_complex::Complex64;
