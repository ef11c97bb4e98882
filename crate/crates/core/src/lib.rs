//! Degree-D polynomial fermion-to-qubit encoding: code construction,
//! Bravyi–Kitaev layer, Hermite/QSP synthesis of encoded operators, a gate IR
//! with simulation and routing, and resource estimation.

pub mod bits;
pub mod bk;
pub mod circuit;
pub mod codebook;
pub mod error;
pub mod estimate;
pub mod ffpoly;
pub mod hermite;
pub mod qsp;
pub mod synth;

pub use bits::BitString;
pub use error::{Error, Result};
