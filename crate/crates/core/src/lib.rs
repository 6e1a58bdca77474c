//! Hecke eigenvalues of degree-2 Siegel modular eigenforms by evaluation.
//!
//! The eigenvalue of `F` under a Hecke operator `T` is recovered as the
//! quotient `(F|T)(Z) / F(Z)` at a point `Z` of the Siegel upper half-space.
//! `F` is a polynomial in the Igusa generators `E4, E6, chi10, chi12`, whose
//! trace-truncated Fourier expansions are built exactly (as Maass lifts of
//! index-one Jacobi forms) and then evaluated in rigorous ball arithmetic.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, threads and the
//! command-line interface live in the companion `siegel` crate.

#![no_std]

extern crate alloc;

pub mod arith;
pub mod ball;
pub mod bounds;
pub mod cosets;
pub mod eigenform;
pub mod elliptic;
pub mod engine;
pub mod error;
pub mod eval;
pub mod exec;
pub mod generators;
pub mod index;
pub mod point;
pub mod series;

pub use error::Error;
