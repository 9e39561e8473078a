//! Wiener–Hopf factorization of stopped Lévy processes.
//!
//! The characteristic function of a Lévy process stopped at an independent
//! exponential or geometric time is approximated by a rational function
//! whose poles are those of the true stopped characteristic function. The
//! rational approximant factors in closed form, giving mixed-exponential
//! densities for the supremum and infimum of the stopped process.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
mod fft;
pub mod levy;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod rational;
pub mod ruin;
pub mod transforms;
pub mod whf;

pub use error::{Error, Result};
pub use levy::{LevyModel, StoppingKind, StoppingTime};
pub use pipeline::{factorize, Factorization, Options, Stage, StageError};
pub use whf::{ExtremaDensity, Extremum, HalfPlaneFactor};
