//! Simulation of SDEs driven by Lévy processes with a Gaussian-compensated Euler scheme.
//!
//! The driver is `Z_t = a t + b B_t + (compensated jumps with Lévy measure ν)`. Small
//! jumps below a level `eps` are replaced by a Gaussian of matching variance while
//! the large ones are simulated exactly; [`coupling`] realises the pathwise pairings
//! used to measure strong errors and [`wasserstein`] the distances used to measure
//! Gaussian approximation of jump sums.

pub mod coupling;
pub mod error;
pub mod euler;
pub mod experiments;
pub mod increment;
pub mod levy_measure;
pub mod normal;
pub mod rng;
pub mod stats;
pub mod wasserstein;

pub use error::{LevyError, Result};
