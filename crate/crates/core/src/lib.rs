//! Geometry and simulation toolkit for the symmetric two-site Bell scenario
//! with three measurement settings and binary outcomes.
//!
//! For indistinguishable sites, the six off-diagonal correlators collapse
//! to a point `(x, y, z)` in a cube, where the model hierarchy becomes
//! plain solid geometry: strongly-local behaviors fill a regular
//! tetrahedron (1/3 of the cube), quantum behaviors the elliptope
//! `1 + 2xyz - x² - y² - z² ≥ 0` (π²/16 ≈ 0.617), and no-signalling
//! behaviors the whole cube.
//!
//! The crate classifies points, behaviors, and finite measurement runs
//! against that hierarchy; constructs explicit witness models for every
//! layer (discrete hidden-variable mixtures, entangled photon pairs,
//! cube-corner boxes); estimates the region volumes by seeded Monte Carlo;
//! and carries a two-setting CHSH baseline for comparison.
//!
//! Randomized operations are deterministic in their seed: work is split
//! into indexed ChaCha substreams (see [`rng`]), so the default rayon
//! parallelism and the sequential fallback (feature `parallel` disabled)
//! produce bit-identical results.

// Setting labels q1, q2 index several fixed 3x3 tables at once.
#![allow(clippy::needless_range_loop)]

pub mod behavior;
pub mod chsh;
pub mod dimensions;
pub mod error;
pub mod geometry;
pub mod models;
pub mod montecarlo;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use geometry::{
    classify, Containment, HierarchyRegion, MomentPoint, RegionMembership, DEFAULT_TOLERANCE,
};
