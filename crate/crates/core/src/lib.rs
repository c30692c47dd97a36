//! Exact computation of sparse differential resultants.
//!
//! The crate decides whether a system of `n+1` generic Laurent differential
//! polynomials in `n` differential indeterminates is differentially
//! essential, bounds the orders and degree of its sparse differential
//! resultant, computes the resultant together with a certificate of ideal
//! membership, and checks results with independent oracles.

pub mod diffpoly;
pub mod bounds;
pub mod essential;
pub mod linalg;
pub mod modp;
pub mod resultant;
pub mod support;
pub mod system;
pub mod verify;

pub use diffpoly::{DerivVar, DiffIndex, DiffPoly, Monomial, Rational};
pub use system::DiffSystem;
