//! Stabilizer Renyi entropy and long-range magic of dual-unitary XXZ
//! brick-wall circuits.
//!
//! Engines: dense statevectors ([`statevec`], [`pauli`]), Pauli sampling
//! ([`sampler`]), a linear-depth replica contraction ([`lightcone`]), the
//! translation-invariant transfer matrix ([`replica`]), analytic results
//! ([`closedform`]) and a small ZX-diagram toolkit ([`zx`]).

pub mod circuit;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod lightcone;
pub mod pauli;
pub mod replica;
pub mod sampler;
pub mod statevec;
pub mod zx;

pub(crate) mod scaled;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Version tag written into every output file.
pub const ARTIFACT_VERSION: &str = concat!("magic-sre ", env!("CARGO_PKG_VERSION"));
