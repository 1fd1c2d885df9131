//! Exact lattice computations for linear algebraic cycles and Hodge cycles
//! on Fermat varieties.

pub mod cache;
pub mod cycles;
pub mod cyclotomic;
pub mod error;
pub mod gram;
pub mod hodge;
pub mod lattice;
pub mod matrix;
pub mod modular;
pub mod pipeline;
pub mod snf;

pub use error::{Error, Result};
pub use lattice::{DivisorMultiset, LatticeReport, LatticeSource};
pub use matrix::IntMatrix;
pub use pipeline::{Pipeline, RunConfig, Target, VerificationResult};
