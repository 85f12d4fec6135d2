//! Query-efficient learning of convex polytope partitions of the corner simplex
//! and best-response-only computation of well-supported Nash equilibria.
//!
//! The corner simplex is `Δ^m = {x ∈ R^m : x ≥ 0, Σx ≤ 1}`. Labels are 0-based.

pub mod bimatrix;
pub mod cdgbs;
pub mod crgbs;
pub mod error;
pub mod geometry;
pub mod labelling;
pub mod multiplayer;
pub mod partition;

pub use error::{Error, Result};
pub use geometry::{Point, ETA};
