//! Effective cones of moduli spaces of sheaves on P1 x P1, computed exactly.
//!
//! The pipeline generates exceptional bundles by mutation, scans the curve where
//! the orthogonal surface of a character meets the delta surface, selects the
//! extremal pairs, resolves a general sheaf along a coil and assembles the cone
//! spanned by the resulting Brill–Noether divisors.

pub mod beilinson;
pub mod cache;
pub mod chern;
pub mod cone;
pub mod config;
pub mod engine;
pub mod error;
pub mod exceptional;
pub mod extremal;
pub mod family;
pub mod golden;
pub mod report;
pub mod stability;

pub use error::{Error, Result};
