//! Entanglement dynamics of a two-qubit system AB whose qubit B exchanges
//! excitations with a spin-star bath while qubit A stays isolated.
//!
//! The crate covers the closed-form concurrence trajectory and two
//! independent numerical routes to it, the completely positive reduced map
//! obtained from a classically-correlated initial state, Markov-state tests
//! based on conditional mutual information, and the inaccessible and hidden
//! entanglement accounting that explains how system entanglement can exceed
//! its initial value under a local interaction.

pub mod channels;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod random;
pub mod spin_star;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen};
pub use spin_star::{ClosedFormCoeffs, EnvSize, SpinStarParams};
pub use state::{DensityMatrix, DimsSpec, LogBase, PureState};
