//! Compact sketches of point sets in the Euclidean unit ball that
//! recover every pairwise squared distance and inner product to a
//! prescribed additive error, in as few bits per point as the geometry
//! allows. Also included: a bipartite dimension-reduction routine that
//! preserves cross inner products between two point families, and
//! constructive lower-bound witnesses (separated nets plus random
//! distinguishing sets) that certify how many bits any such sketch must
//! spend.
//!
//! All randomness flows through explicit `(seed, stream)` pairs, so every
//! result in the crate is reproducible bit-for-bit.

pub mod bipartite;
pub mod bits;
pub mod error;
pub mod grid;
pub mod jl;
pub mod regime;
pub mod rng;
pub mod sketch;
pub mod vector;
pub mod witness;

pub use error::{Error, Result};
pub use regime::{classify_regime, t_threshold, Regime, RegimeParams};
pub use rng::RngStream;
pub use sketch::{encode_set, sketch_bits_budget, QueryResult, SketchFile};
pub use vector::{gram_and_distances, PointSet, Vector};
