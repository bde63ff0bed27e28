//! Variable-coefficient scalar-field equations on the line: coefficient
//! checks, near-constant steady states by a Green's-function fixed point,
//! leapfrog evolution and Virial diagnostics.

pub mod coeffs;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod greensolve;
pub mod grid;
pub mod potentials;
pub mod virial;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::Grid;
