//! Exact-arithmetic workbench for two interlocking graph calculi:
//!
//! * the non-oriented graph complex (wedge-ordered edges, insertion bracket,
//!   differential `d = [•–•, ·]`, cocycle search), and
//! * the oriented calculus of Kontsevich graphs (normal forms with signs,
//!   multivector generators, Schouten bracket, Leibniz-graph factorization
//!   of bivector flows, orientation of non-oriented cocycles).
//!
//! All coefficients are exact rationals; every public operation is
//! deterministic, so equal inputs produce byte-identical outputs.

pub mod complex;
pub mod error;
pub mod factor;
pub mod kgraph;
pub mod leibniz;
pub mod linalg;
pub mod multivec;
pub mod orient;
pub mod poisson;
pub mod rat;
pub mod undirected;

pub use error::{Error, Result};
pub use rat::Rat;
