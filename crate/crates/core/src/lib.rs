pub mod bundle;
pub mod classifiers;
pub mod data_io;
pub mod embedding;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod synthetic;
pub mod text;
pub mod vectorize;

pub use error::{Error, Result};
