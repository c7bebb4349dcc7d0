//! Fourier-Galerkin spectral engine for `D^{2m} + V` on the periodic,
//! semiperiodic and 2-periodic lattices, with distributional potentials.

pub mod assembly;
pub mod error;
pub mod job;
pub mod potentials;
pub mod seqspace;
pub mod spectral;
mod wire;

pub use error::{Error, Result};
