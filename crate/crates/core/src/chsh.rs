//! The two-setting comparison baseline.
//!
//! With two settings per site the whole story collapses to the single
//! combination `S = M00 + M01 + M10 - M11` and three nested intervals:
//! `|S| ≤ 2` (strongly local), `|S| ≤ 2√2` (quantum), `|S| ≤ 4`
//! (no-signalling). This module evaluates `S`, buckets values against the
//! bounds, and exposes the one-dimensional occupancy ratios used to compare
//! the two-setting projection with the three-setting pyramid geometry.

use serde::Serialize;

use crate::error::{Error, Result};

pub const SL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
pub const ALGEBRAIC_BOUND: f64 = 4.0;

/// The four correlators of the two-setting scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshCorrelators {
    m00: f64,
    m01: f64,
    m10: f64,
    m11: f64,
}

impl ChshCorrelators {
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Result<Self> {
        for (what, value) in [("M00", m00), ("M01", m01), ("M10", m10), ("M11", m11)] {
            if !value.is_finite() || value.abs() > 1.0 {
                return Err(Error::OutOfRange {
                    what,
                    value,
                    min: -1.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { m00, m01, m10, m11 })
    }
}

/// `S = M00 + M01 + M10 - M11`.
pub fn chsh_value(c: &ChshCorrelators) -> f64 {
    c.m00 + c.m01 + c.m10 - c.m11
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChshRegion {
    StronglyLocal,
    QuantumOnly,
    NoSignallingOnly,
    Invalid,
}

impl std::fmt::Display for ChshRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChshRegion::StronglyLocal => "SL",
            ChshRegion::QuantumOnly => "Q\\SL",
            ChshRegion::NoSignallingOnly => "NS\\Q",
            ChshRegion::Invalid => "invalid",
        })
    }
}

/// Buckets `|S|` against the bounds 2, 2√2, 4. Classification is monotone
/// in `|S|`; values beyond `4 + tol` are not correlators of any behavior.
pub fn chsh_classify(s: f64, tol: f64) -> ChshRegion {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let a = s.abs();
    if a <= SL_BOUND + tol {
        ChshRegion::StronglyLocal
    } else if a <= TSIRELSON_BOUND + tol {
        ChshRegion::QuantumOnly
    } else if a <= ALGEBRAIC_BOUND + tol {
        ChshRegion::NoSignallingOnly
    } else {
        ChshRegion::Invalid
    }
}

/// Occupied fractions of the no-signalling set, two-setting interval vs
/// three-setting pyramid representation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OccupancyRatios {
    /// `2 / 4`: strongly-local share of the CHSH interval.
    pub chsh_sl: f64,
    /// `2√2 / 4`: quantum share of the CHSH interval.
    pub chsh_q: f64,
    /// `1 / 3`: tetrahedron share of the cube.
    pub pyramid_sl: f64,
    /// `π² / 16`: elliptope share of the cube.
    pub pyramid_q: f64,
}

impl OccupancyRatios {
    /// No-signalling share beyond quantum in the CHSH interval (~0.29).
    pub fn beyond_quantum_chsh(&self) -> f64 {
        1.0 - self.chsh_q
    }

    /// No-signalling share beyond quantum in the cube (~0.38).
    pub fn beyond_quantum_pyramid(&self) -> f64 {
        1.0 - self.pyramid_q
    }
}

pub fn occupancy_ratios() -> OccupancyRatios {
    OccupancyRatios {
        chsh_sl: SL_BOUND / ALGEBRAIC_BOUND,
        chsh_q: TSIRELSON_BOUND / ALGEBRAIC_BOUND,
        pyramid_sl: 1.0 / 3.0,
        pyramid_q: std::f64::consts::PI * std::f64::consts::PI / 16.0,
    }
}
