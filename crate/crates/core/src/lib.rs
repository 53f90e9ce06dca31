//! Desk-scale numerical laboratory for bilinear ergodic averages sampled
//! along ⌊h(n)⌋ for regularly varying h.
//!
//! The crate builds the full chain from orbit generation through the
//! main/error decomposition of the averages: inverses and Toeplitz weights
//! ([`regvar`]), the sawtooth Fourier truncation ([`sawtooth`]), exponential
//! sums with extended-precision phase reduction ([`expsum`]), the dyadic
//! kernels ([`kernel`]), Gowers-norm machinery ([`gowers`]), dynamical
//! system simulations ([`dynamics`]), and an experiment harness with
//! calibrated-constant persistence ([`harness`]).

pub mod dd;
pub mod dynamics;
pub mod error;
pub mod expsum;
pub mod gowers;
pub mod harness;
pub mod kernel;
pub mod phase;
pub mod quad;
pub mod regvar;
pub mod sawtooth;

pub use error::{Error, Result};
pub use num_complex::Complex64;
