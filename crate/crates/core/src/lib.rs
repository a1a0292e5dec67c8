//! Three-module score-based VAMP receiver for LDPC-coded transmission over
//! `y = f(H x) + z`: a likelihood module for the element-wise map `f`, an
//! LMMSE coupling module for `w = H x`, and a belief-propagation denoiser.

pub mod channel;
pub mod cli;
pub mod coupling;
pub mod denoiser;
pub mod error;
pub mod experiment;
pub mod likelihood;
pub mod messages;
pub mod quadrature;
pub mod runner;

pub use error::{Error, Result};
