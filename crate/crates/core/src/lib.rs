//! Stable Lévy processes on the p-adic numbers: exact-to-resolution path
//! sampling, stochastic integrals, local times, and weak solutions of
//! `dX = b(X-) dZ` via random time change.

pub mod padic;

pub use padic::{Ball, Norm, PAdic, PAdicError, Window};
pub mod analytic;
pub mod driver;
pub mod rng;
pub mod pathfile;
pub mod stats;
pub mod integral;
pub mod occupation;
pub mod sde;
