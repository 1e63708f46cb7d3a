pub mod error;
pub mod elliptic;
pub mod lie;
pub mod flows;
pub mod model;
pub mod sample;
pub mod univar;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
