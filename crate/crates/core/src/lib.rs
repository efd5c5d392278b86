//! Coarse cohomology of finite metric models of unbounded spaces.
//!
//! The coarse cohomology of a space that is uniformly contractible at
//! infinity is computed from the direct limit of the reduced cohomology of
//! the complements `X - N_r(b)`, shifted up one degree. This crate builds
//! those complement towers on finite samples (Vietoris-Rips complexes at a
//! fixed scale), reads off persistent ranks of the restriction maps, and
//! also implements the chain-level machinery behind the comparison between
//! coarse and boundedly supported cochains: controlled fillings, cone
//! homotopies and the operator `T = id + dD + Dd` built from them.

pub mod cochains;
pub mod cohomology;
pub mod control;
pub mod engine;
pub mod error;
pub mod fillings;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod ring;
pub mod simplicial;
pub mod towers;

pub use error::{Error, Result};
pub use ring::{Coeff, Field, Gf2, Ring};

/// Absolute tolerance for comparing distances.
pub const DIST_TOL: f64 = 1e-9;
