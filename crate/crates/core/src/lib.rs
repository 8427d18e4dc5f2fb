//! Finite-truncation toolkit for graded metric vector spaces.
//!
//! A graded space is modelled by a finite tower of seminorms on a coordinate
//! space together with the shaped-sum metric `d(u, v) = Σ w_n φ(‖u − v‖_n)`.
//! On top of that the crate provides
//!
//! * dyadic-ball Minkowski gauges, strictness and scalar-bound diagnostics
//!   ([`graded_space`]),
//! * graded operator norms, tameness certificates and their algebra, the
//!   Fréchet metric on `T_{r,b}L`, the `K_j` zero-neighbourhood sets and the
//!   evaluation modulus ([`operators`]),
//! * palette families of convex bodies and their subbasis oracles
//!   ([`palettes`]),
//! * concrete model spaces and the explicit counterexample gadgets
//!   ([`witnesses`]).
//!
//! Every sampled computation is driven by an explicit seed, so results are
//! reproducible bit for bit.

pub mod error;
pub mod graded_space;
pub mod lp;
pub mod operators;
pub mod palettes;
pub mod rng;
pub mod witnesses;

pub use error::{Error, Result};
