//! Membership tests and coordinate transforms in the reduced mixed-moment
//! space.
//!
//! A symmetric two-site behavior with three settings and binary outcomes
//! reduces to three off-diagonal correlators `(x, y, z)`. Three nested
//! convex regions classify such points:
//!
//! * the strongly-local set: a regular tetrahedron spanned by the four
//!   deterministic vertices, cut out by four facet inequalities `ξᵢ ≥ 0`
//!   (three of which suffice given normalization);
//! * the quantum set: the elliptope `det G ≥ 0` of valid correlation
//!   matrices, where `G` is the 3×3 Gram matrix with unit diagonal;
//! * the no-signalling set: the full cube `[-1, 1]³`.
//!
//! All tests are exact closed forms; tolerances only widen boundaries into
//! three-valued verdicts. Everything here is a pure function of immutable
//! values and safe to call concurrently.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default absolute tolerance for boundary classification. All quantities
/// live in `[-1, 1]³`, so an absolute scale is appropriate.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A point in the reduced moment space: `x = M01`, `y = M02`, `z = M12`.
///
/// Construction rejects NaN and infinities. Coordinates of valid behaviors
/// satisfy `|coord| ≤ 1`; producers enforce that, consumers only assume
/// finiteness so that out-of-cube points can still be classified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentPoint {
    x: f64,
    y: f64,
    z: f64,
}

impl MomentPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for (what, value) in [("x", x), ("y", y), ("z", z)] {
            if !value.is_finite() {
                return Err(Error::NonFinite { what, value });
            }
        }
        Ok(Self { x, y, z })
    }

    /// For producers whose outputs are finite by construction.
    pub(crate) const fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn max_abs_coord(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// True if every coordinate lies in `[-1, 1]`.
    pub fn in_cube(&self) -> bool {
        self.max_abs_coord() <= 1.0
    }
}

impl std::fmt::Display for MomentPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Normalized weights `ξ₁..ξ₄` over the tetrahedron vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BarycentricCoords {
    xi: [f64; 4],
}

impl BarycentricCoords {
    /// Validates finiteness and `Σξᵢ = 1` within [`DEFAULT_TOLERANCE`].
    pub fn new(xi: [f64; 4]) -> Result<Self> {
        for &value in &xi {
            if !value.is_finite() {
                return Err(Error::NonFinite { what: "xi", value });
            }
        }
        let sum: f64 = xi.iter().sum();
        if (sum - 1.0).abs() > DEFAULT_TOLERANCE {
            return Err(Error::BarycentricSum {
                sum,
                tol: DEFAULT_TOLERANCE,
            });
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> [f64; 4] {
        self.xi
    }

    /// Smallest component; negative outside the tetrahedron.
    pub fn min_xi(&self) -> f64 {
        self.xi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The strongly-local tetrahedron. A zero-sized handle to the fixed vertex
/// set; the geometry never changes.
pub struct Tetrahedron;

impl Tetrahedron {
    /// The four deterministic extreme points.
    pub const VERTICES: [MomentPoint; 4] = [
        MomentPoint::new_unchecked(1.0, 1.0, 1.0),
        MomentPoint::new_unchecked(-1.0, -1.0, 1.0),
        MomentPoint::new_unchecked(-1.0, 1.0, -1.0),
        MomentPoint::new_unchecked(1.0, -1.0, -1.0),
    ];

    /// The six pairwise vertex distances (all `2√2` for a regular shape).
    pub fn edge_lengths() -> [f64; 6] {
        let v = Self::VERTICES;
        let mut out = [0.0; 6];
        let mut k = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let dx = v[i].x - v[j].x;
                let dy = v[i].y - v[j].y;
                let dz = v[i].z - v[j].z;
                out[k] = (dx * dx + dy * dy + dz * dz).sqrt();
                k += 1;
            }
        }
        out
    }

    /// Volume computed from the vertex coordinates, `|det| / 6`.
    pub fn volume() -> f64 {
        let v = Self::VERTICES;
        let a = [v[1].x - v[0].x, v[1].y - v[0].y, v[1].z - v[0].z];
        let b = [v[2].x - v[0].x, v[2].y - v[0].y, v[2].z - v[0].z];
        let c = [v[3].x - v[0].x, v[3].y - v[0].y, v[3].z - v[0].z];
        let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
        det.abs() / 6.0
    }
}

/// Symmetric 3×3 correlation matrix with unit diagonal and off-diagonals
/// `(x, y, z)`. Positive semidefiniteness of `G` characterizes the quantum
/// set in the reduced space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramMatrix {
    x: f64,
    y: f64,
    z: f64,
}

impl GramMatrix {
    pub fn from_point(p: MomentPoint) -> Self {
        Self {
            x: p.x,
            y: p.y,
            z: p.z,
        }
    }

    /// `det G = 1 + 2xyz - x² - y² - z²`.
    pub fn det(&self) -> f64 {
        1.0 + 2.0 * self.x * self.y * self.z - self.x * self.x - self.y * self.y - self.z * self.z
    }

    /// The three 2×2 principal minors `(1-x², 1-y², 1-z²)`.
    pub fn principal_minors_2x2(&self) -> [f64; 3] {
        [
            1.0 - self.x * self.x,
            1.0 - self.y * self.y,
            1.0 - self.z * self.z,
        ]
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        [
            [1.0, self.x, self.y],
            [self.x, 1.0, self.z],
            [self.y, self.z, 1.0],
        ]
    }
}

/// Three-valued membership verdict at a given tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl Containment {
    /// Membership in the closed region (boundary counts as in).
    pub fn in_closed(self) -> bool {
        !matches!(self, Containment::Outside)
    }
}

impl std::fmt::Display for Containment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Containment::Inside => "inside",
            Containment::Boundary => "boundary",
            Containment::Outside => "outside",
        })
    }
}

/// Which layer of the hierarchy a point occupies under the closed-set
/// convention (boundary resolves to the inner region).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyRegion {
    StronglyLocal,
    QuantumOnly,
    NoSignallingOnly,
    BeyondNoSignalling,
}

impl std::fmt::Display for HierarchyRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HierarchyRegion::StronglyLocal => "SL",
            HierarchyRegion::QuantumOnly => "Q\\SL",
            HierarchyRegion::NoSignallingOnly => "NS\\Q",
            HierarchyRegion::BeyondNoSignalling => "outside NS",
        })
    }
}

/// Combined classification of a point against all three regions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionMembership {
    pub sl: Containment,
    pub q: Containment,
    pub ns: Containment,
    pub barycentric: BarycentricCoords,
    pub gram_det: f64,
    pub tolerance: f64,
}

impl RegionMembership {
    /// Innermost region containing the point, boundaries included.
    pub fn region(&self) -> HierarchyRegion {
        if self.sl.in_closed() {
            HierarchyRegion::StronglyLocal
        } else if self.q.in_closed() {
            HierarchyRegion::QuantumOnly
        } else if self.ns.in_closed() {
            HierarchyRegion::NoSignallingOnly
        } else {
            HierarchyRegion::BeyondNoSignalling
        }
    }
}

/// Barycentric coordinates of `point` with respect to the four vertices:
/// `ξ₁ = ¼(1+x+y+z)`, `ξ₂ = ¼(1-x-y+z)`, `ξ₃ = ¼(1-x+y-z)`,
/// `ξ₄ = ¼(1+x-y-z)`. The components always sum to 1 up to rounding.
pub fn barycentric_of(point: MomentPoint) -> BarycentricCoords {
    let [x, y, z] = point.coords();
    BarycentricCoords {
        xi: [
            0.25 * (1.0 + x + y + z),
            0.25 * (1.0 - x - y + z),
            0.25 * (1.0 - x + y - z),
            0.25 * (1.0 + x - y - z),
        ],
    }
}

/// Inverse of [`barycentric_of`]: the affine combination `Σ ξᵢ Vᵢ`.
pub fn point_of(coords: &BarycentricCoords) -> MomentPoint {
    let [x1, x2, x3, x4] = coords.xi;
    MomentPoint::new_unchecked(x1 - x2 - x3 + x4, x1 - x2 + x3 - x4, x1 + x2 - x3 - x4)
}

/// Signed facet margins `(ξ₁, ξ₂, ξ₃, ξ₄)`, positive inside the
/// tetrahedron. Given the normalization `Σξᵢ = 1`, any three of the four
/// margins determine membership; a bounded 3-D convex body needs no fewer
/// than three bounding inequalities.
pub fn tetrahedron_facet_margins(point: MomentPoint) -> [f64; 4] {
    barycentric_of(point).xi
}

/// Strongly-local membership via the branch-free `ξᵢ` facet margins.
///
/// `inside` requires every margin to clear `tol/4` (a perturbation `tol` in
/// a coordinate moves each `ξᵢ` by `tol/4`); `boundary` is the band
/// `|min ξᵢ| ≤ tol/4`. The returned coordinates are the witness: they are
/// the weights of an explicit four-λ hidden-variable model.
pub fn sl_membership(point: MomentPoint, tol: f64) -> (Containment, BarycentricCoords) {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let coords = barycentric_of(point);
    let min = coords.min_xi();
    let verdict = if min > tol / 4.0 {
        Containment::Inside
    } else if min >= -tol / 4.0 {
        Containment::Boundary
    } else {
        Containment::Outside
    };
    (verdict, coords)
}

/// Quantum membership: `G` positive semidefinite, i.e. `det G ≥ 0` together
/// with the cube bounds from the 2×2 minors. Returns the verdict and
/// `det G`.
pub fn q_membership(point: MomentPoint, tol: f64) -> (Containment, f64) {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let det = GramMatrix::from_point(point).det();
    let max_abs = point.max_abs_coord();
    let verdict = if det < -tol || max_abs > 1.0 + tol {
        Containment::Outside
    } else if det > tol && max_abs < 1.0 - tol {
        Containment::Inside
    } else {
        Containment::Boundary
    };
    (verdict, det)
}

/// No-signalling membership: the cube `[-1, 1]³`.
pub fn ns_membership(point: MomentPoint, tol: f64) -> Containment {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let max_abs = point.max_abs_coord();
    if max_abs < 1.0 - tol {
        Containment::Inside
    } else if max_abs <= 1.0 + tol {
        Containment::Boundary
    } else {
        Containment::Outside
    }
}

/// Runs all three membership tests and checks the nesting
/// `SL ⊂ Q ⊂ NS` of the closed regions. A violation beyond tolerance is an
/// internal consistency error: it cannot occur for exact arithmetic and
/// signals a bug rather than a property of the input.
pub fn classify(point: MomentPoint, tol: f64) -> Result<RegionMembership> {
    let (sl, barycentric) = sl_membership(point, tol);
    let (q, gram_det) = q_membership(point, tol);
    let ns = ns_membership(point, tol);

    let violation = if sl == Containment::Inside && q == Containment::Outside {
        Some("SL-inside point tested Q-outside")
    } else if sl == Containment::Inside && ns == Containment::Outside {
        Some("SL-inside point tested NS-outside")
    } else if q == Containment::Inside && ns == Containment::Outside {
        Some("Q-inside point tested NS-outside")
    } else {
        None
    };
    if let Some(detail) = violation {
        let [x, y, z] = point.coords();
        return Err(Error::HierarchyViolation {
            x,
            y,
            z,
            detail: detail.to_string(),
        });
    }

    Ok(RegionMembership {
        sl,
        q,
        ns,
        barycentric,
        gram_det,
        tolerance: tol,
    })
}

/// Smallest `z` for which `(x, y, z)` lies in the closed tetrahedron, from
/// the two lower facet bounds `z ≥ x+y-1` and `z ≥ -1-x-y`. `None` when
/// `|x| > 1` or `|y| > 1` (the slice misses the tetrahedron) or on
/// non-finite input. Two strong correlations force the third: for
/// `x = y = 1/√2` the bound is `√2 - 1 ≈ 0.414`.
pub fn min_sl_z(x: f64, y: f64) -> Option<f64> {
    if !x.is_finite() || !y.is_finite() || x.abs() > 1.0 || y.abs() > 1.0 {
        return None;
    }
    Some((x + y - 1.0).max(-1.0 - x - y))
}

/// Zero-tolerance closed-region predicates. These are the hit tests of the
/// Monte Carlo estimators: boundaries have measure zero, so the closed
/// convention cannot bias a volume, but it must be fixed for determinism.
pub fn in_closed_sl(x: f64, y: f64, z: f64) -> bool {
    1.0 + x + y + z >= 0.0
        && 1.0 - x - y + z >= 0.0
        && 1.0 - x + y - z >= 0.0
        && 1.0 + x - y - z >= 0.0
}

pub fn in_closed_q(x: f64, y: f64, z: f64) -> bool {
    x.abs() <= 1.0
        && y.abs() <= 1.0
        && z.abs() <= 1.0
        && 1.0 + 2.0 * x * y * z - x * x - y * y - z * z >= 0.0
}

pub fn in_closed_ns(x: f64, y: f64, z: f64) -> bool {
    x.abs() <= 1.0 && y.abs() <= 1.0 && z.abs() <= 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    fn pt(x: f64, y: f64, z: f64) -> MomentPoint {
        MomentPoint::new(x, y, z).unwrap()
    }

    #[test]
    fn rejects_non_finite_coordinates() {
        assert!(MomentPoint::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(MomentPoint::new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(MomentPoint::new(0.0, 0.0, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn barycentric_of_centroid_and_vertex() {
        assert_eq!(barycentric_of(pt(0.0, 0.0, 0.0)).xi(), [0.25; 4]);
        assert_eq!(barycentric_of(pt(1.0, 1.0, 1.0)).xi(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn barycentric_of_generic_point() {
        // Quarter-sum formulas evaluated independently.
        let xi = barycentric_of(pt(0.5, -0.25, 0.1)).xi();
        let expected = [0.3375, 0.2125, 0.0375, 0.4125];
        for (got, want) in xi.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn point_of_inverts() {
        let v1 = point_of(&BarycentricCoords::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(v1.coords(), [1.0, 1.0, 1.0]);

        let centroid = point_of(&BarycentricCoords::new([0.25; 4]).unwrap());
        assert_eq!(centroid.coords(), [0.0, 0.0, 0.0]);

        // Midpoint of the first two vertices.
        let edge = point_of(&BarycentricCoords::new([0.5, 0.5, 0.0, 0.0]).unwrap());
        assert_eq!(edge.coords(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn barycentric_sum_is_validated() {
        assert!(BarycentricCoords::new([0.3, 0.3, 0.3, 0.3]).is_err());
        assert!(BarycentricCoords::new([0.25, 0.25, 0.25, f64::NAN]).is_err());
    }

    #[test]
    fn facet_margins_examples() {
        assert_eq!(
            tetrahedron_facet_margins(pt(1.0, 1.0, 1.0)),
            [1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(tetrahedron_facet_margins(pt(0.0, 0.0, 0.0)), [0.25; 4]);

        let margins = tetrahedron_facet_margins(pt(0.9, 0.9, 0.9));
        let expected = [0.925, 0.025, 0.025, 0.025];
        for (got, want) in margins.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn sl_membership_examples() {
        let tol = DEFAULT_TOLERANCE;
        let r = 1.0 / SQRT_2;

        assert_eq!(sl_membership(pt(0.0, 0.0, 0.0), tol).0, Containment::Inside);
        // Two strong correlations and a vanishing third: frustrated.
        assert_eq!(sl_membership(pt(r, r, 0.0), tol).0, Containment::Outside);
        // Restoring z to sqrt(2)-1 lands exactly on the facet.
        assert_eq!(
            sl_membership(pt(r, r, SQRT_2 - 1.0), tol).0,
            Containment::Boundary
        );
    }

    #[test]
    fn q_membership_examples() {
        let tol = DEFAULT_TOLERANCE;
        let r = 1.0 / SQRT_2;

        let (verdict, det) = q_membership(pt(0.0, 0.0, 0.0), tol);
        assert_eq!(verdict, Containment::Inside);
        assert_eq!(det, 1.0);

        let (verdict, det) = q_membership(pt(r, r, 0.0), tol);
        assert_eq!(verdict, Containment::Boundary);
        assert!(det.abs() < 1e-15);

        let (verdict, det) = q_membership(pt(1.0, 1.0, -1.0), tol);
        assert_eq!(verdict, Containment::Outside);
        assert_eq!(det, -4.0);
    }

    #[test]
    fn ns_membership_examples() {
        let tol = DEFAULT_TOLERANCE;
        assert_eq!(ns_membership(pt(0.0, 0.0, 0.0), tol), Containment::Inside);
        assert_eq!(
            ns_membership(pt(1.0, 1.0, -1.0), tol),
            Containment::Boundary
        );
        assert_eq!(ns_membership(pt(1.2, 0.0, 0.0), tol), Containment::Outside);
    }

    #[test]
    fn classify_examples() {
        let tol = DEFAULT_TOLERANCE;
        let r = 1.0 / SQRT_2;

        let m = classify(pt(0.0, 0.0, 0.0), tol).unwrap();
        assert_eq!(
            (m.sl, m.q, m.ns),
            (
                Containment::Inside,
                Containment::Inside,
                Containment::Inside
            )
        );
        assert_eq!(m.region(), HierarchyRegion::StronglyLocal);

        let m = classify(pt(r, r, 0.0), tol).unwrap();
        assert_eq!(
            (m.sl, m.q, m.ns),
            (
                Containment::Outside,
                Containment::Boundary,
                Containment::Inside
            )
        );
        assert_eq!(m.region(), HierarchyRegion::QuantumOnly);

        let m = classify(pt(1.0, 1.0, -1.0), tol).unwrap();
        assert_eq!(
            (m.sl, m.q, m.ns),
            (
                Containment::Outside,
                Containment::Outside,
                Containment::Boundary
            )
        );
        assert_eq!(m.region(), HierarchyRegion::NoSignallingOnly);

        let m = classify(pt(1.5, 0.0, 0.0), tol).unwrap();
        assert_eq!(m.region(), HierarchyRegion::BeyondNoSignalling);
    }

    #[test]
    fn tetrahedron_is_regular() {
        for d in Tetrahedron::edge_lengths() {
            assert!((d - 2.0 * SQRT_2).abs() < 1e-12);
        }
        assert!((Tetrahedron::volume() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_sl_z_frustration_bound() {
        let r = 1.0 / SQRT_2;
        let z = min_sl_z(r, r).unwrap();
        assert!((z - (SQRT_2 - 1.0)).abs() < 1e-12);
        assert_eq!(min_sl_z(0.0, 0.0), Some(-1.0));
        assert_eq!(min_sl_z(1.2, 0.0), None);
    }

    #[test]
    fn closed_predicates_match_tristate() {
        let cases = [
            (0.0, 0.0, 0.0),
            (1.0, 1.0, 1.0),
            (1.0, 1.0, -1.0),
            (0.5, -0.25, 0.1),
            (1.2, 0.0, 0.0),
        ];
        for (x, y, z) in cases {
            let p = pt(x, y, z);
            assert_eq!(
                in_closed_sl(x, y, z),
                sl_membership(p, 0.0).0.in_closed(),
                "sl at {p}"
            );
            assert_eq!(
                in_closed_q(x, y, z),
                q_membership(p, 0.0).0.in_closed(),
                "q at {p}"
            );
            assert_eq!(
                in_closed_ns(x, y, z),
                ns_membership(p, 0.0).in_closed(),
                "ns at {p}"
            );
        }
    }
}
