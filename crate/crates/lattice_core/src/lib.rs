//! Even lattices given by Gram matrices: exact rational arithmetic, dual
//! lattices, discriminant groups, short vectors, and the ambient lattice
//! `2U + L(-1)` with its reflections and Eichler transvections.

pub mod ambient;
pub mod arith;
pub mod error;
pub mod lattice;

pub use error::{Error, Result};
