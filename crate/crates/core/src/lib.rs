//! Polarization-adjusted convolutional (PAC) codes.
//!
//! Systematic and non-systematic encoding, Fano sequential decoding over
//! the polar tree (with optional Rate-0/Rate-1 simplification), list
//! decoding and distance-spectrum estimation, frozen-set construction, an
//! AWGN Monte-Carlo harness and the normal-approximation bound.

pub mod bounds;
pub mod channel;
pub mod codec;
pub mod construction;
pub mod conv;
pub mod error;
pub mod fano;
pub mod list;
pub mod model;
pub mod polar;
mod tree;

pub use error::{PacError, Result};
pub use model::{CodeSpec, ConvKind, ConvSpec, FrozenSet};
pub use tree::{branch_penalty, hard_decision};
