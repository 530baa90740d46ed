//! Model families that populate the three regions: discrete hidden-variable
//! models (strongly local), entangled photon pairs (quantum elliptope
//! surface), and the no-signalling cube realizations from [`crate::behavior`].
//!
//! A hidden-variable value acts through a response triple `(α, β, γ)`: the
//! single-site outcome expectations at settings 0, 1, 2, identical at both
//! sites. A single value factorizes the moments as
//! `(x, y, z) = (αβ, αγ, βγ)`; mixing over values forms convex
//! combinations, so four values — one per tetrahedron vertex — already
//! generate everything strongly local.

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::geometry::{sl_membership, Containment, MomentPoint, Tetrahedron, DEFAULT_TOLERANCE};

/// Weights below this are dropped when realizing a point as a model, so
/// vertex/edge/face points come out with 1, 2, or 3 hidden-variable values.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Version written into serialized model documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Single-site outcome expectations `(α, β, γ)` at settings (0, 1, 2),
/// each in `[-1, 1]`. The outcome distribution at setting `q` is
/// `p(a | q) = (1 + a·r_q) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseTriple {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl ResponseTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (what, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() || value.abs() > 1.0 {
                return Err(Error::OutOfRange {
                    what,
                    value,
                    min: -1.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Expectation at setting `q` (0, 1, or 2).
    pub fn at(&self, q: usize) -> f64 {
        [self.alpha, self.beta, self.gamma][q]
    }

    /// Probability of outcome `+1` at setting `q`.
    pub fn prob_plus(&self, q: usize) -> f64 {
        0.5 * (1.0 + self.at(q))
    }
}

/// A deterministic single-site assignment: fixed outcome `±1` at each
/// setting. These are the extreme points of the strongly-local set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    alpha: i8,
    beta: i8,
    gamma: i8,
}

impl DeterministicStrategy {
    pub fn new(alpha: i8, beta: i8, gamma: i8) -> Result<Self> {
        for (what, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if value != 1 && value != -1 {
                return Err(Error::OutOfRange {
                    what,
                    value: f64::from(value),
                    min: -1.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn response(&self) -> ResponseTriple {
        ResponseTriple {
            alpha: f64::from(self.alpha),
            beta: f64::from(self.beta),
            gamma: f64::from(self.gamma),
        }
    }

    pub fn signs(&self) -> (i8, i8, i8) {
        (self.alpha, self.beta, self.gamma)
    }
}

/// Discrete hidden-variable model: weights `f(λ)` over response triples.
///
/// The constructor rejects empty models, negative weights, out-of-range
/// responses, and weight sums off by more than 1e-9; accepted weights are
/// rescaled to sum to one exactly, so downstream arithmetic sees a true
/// probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHiddenVariableModel {
    weights: Vec<f64>,
    responses: Vec<ResponseTriple>,
}

impl LocalHiddenVariableModel {
    pub fn new(weights: Vec<f64>, responses: Vec<ResponseTriple>) -> Result<Self> {
        if weights.len() != responses.len() {
            return Err(Error::ModelLengthMismatch {
                weights: weights.len(),
                responses: responses.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeWeight { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightsNotNormalized { sum });
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { weights, responses })
    }

    /// Model with a single hidden-variable value.
    pub fn single(response: ResponseTriple) -> Self {
        Self {
            weights: vec![1.0],
            responses: vec![response],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn responses(&self) -> &[ResponseTriple] {
        &self.responses
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ResponseTriple)> {
        self.weights.iter().copied().zip(self.responses.iter())
    }

    /// Serializes to the versioned structured-text document.
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_FORMAT_VERSION,
            kind: "lhv-model".to_string(),
            weights: self.weights.clone(),
            responses: self
                .responses
                .iter()
                .map(|r| [r.alpha, r.beta, r.gamma])
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    /// Parses the versioned document. Weights must re-normalize within
    /// 1e-9 (the constructor's contract) or the document is rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse {
                what: "model document",
                reason: format!(
                    "unsupported version {}, expected {MODEL_FORMAT_VERSION}",
                    doc.version
                ),
            });
        }
        if doc.kind != "lhv-model" {
            return Err(Error::Parse {
                what: "model document",
                reason: format!("kind \"{}\", expected \"lhv-model\"", doc.kind),
            });
        }
        let responses = doc
            .responses
            .into_iter()
            .map(|[a, b, c]| ResponseTriple::new(a, b, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.weights, responses)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: u32,
    kind: String,
    weights: Vec<f64>,
    responses: Vec<[f64; 3]>,
}

/// Moment point of a single response triple: `(αβ, αγ, βγ)`. The image
/// satisfies `x·y·z = (αβγ)² ∈ [0, 1]`.
pub fn moments_of_strategy(r: &ResponseTriple) -> MomentPoint {
    MomentPoint::new_unchecked(r.alpha * r.beta, r.alpha * r.gamma, r.beta * r.gamma)
}

/// Moment point of a model: the `f(λ)`-weighted convex combination of the
/// per-value factorized points. Always lands in the closed tetrahedron.
pub fn moments_of_lhv(m: &LocalHiddenVariableModel) -> MomentPoint {
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for (w, r) in m.iter() {
        let p = moments_of_strategy(r);
        x += w * p.x();
        y += w * p.y();
        z += w * p.z();
    }
    MomentPoint::new_unchecked(x, y, z)
}

/// Full behavior of a model: `P(a1,a2|q1,q2) = Σ_λ f(λ)·p(a1|q1,λ)·p(a2|q2,λ)`
/// with the same response function at both sites. The result is normalized,
/// exchange-symmetric, and no-signalling by construction.
pub fn behavior_of_lhv(m: &LocalHiddenVariableModel) -> Behavior {
    let mut blocks = [[[0.0f64; 4]; 3]; 3];
    for (w, r) in m.iter() {
        let plus = [r.prob_plus(0), r.prob_plus(1), r.prob_plus(2)];
        for q1 in 0..3 {
            let p1 = [plus[q1], 1.0 - plus[q1]];
            for q2 in 0..3 {
                let p2 = [plus[q2], 1.0 - plus[q2]];
                // w * (p1 * p2): the inner product commutes bit-exactly, so
                // transposed blocks come out identical.
                blocks[q1][q2][0] += w * (p1[0] * p2[0]);
                blocks[q1][q2][1] += w * (p1[0] * p2[1]);
                blocks[q1][q2][2] += w * (p1[1] * p2[0]);
                blocks[q1][q2][3] += w * (p1[1] * p2[1]);
            }
        }
    }
    Behavior::from_blocks(blocks)
}

/// Canonical deterministic strategy for tetrahedron vertex `index`
/// (0-based, matching [`Tetrahedron::VERTICES`]). Responses come in
/// `±(α, β, γ)` pairs with identical moments; the gauge `α = +1` picks one.
pub fn vertex_strategy(index: usize) -> DeterministicStrategy {
    assert!(index < 4, "vertex index {index} out of range 0..4");
    let v = Tetrahedron::VERTICES[index];
    // alpha = +1 forces beta = sign(x) and gamma = sign(y); z = beta*gamma
    // holds for all four vertices.
    let beta = if v.x() > 0.0 { 1 } else { -1 };
    let gamma = if v.y() > 0.0 { 1 } else { -1 };
    DeterministicStrategy {
        alpha: 1,
        beta,
        gamma,
    }
}

/// Realizes a closed-tetrahedron point as an explicit hidden-variable
/// model: weights are the barycentric coordinates, responses the canonical
/// vertex strategies. Weights below [`WEIGHT_FLOOR`] are dropped, so
/// vertices, edge points, face points, and interior points use 1, 2, 3,
/// and 4 values of λ respectively.
pub fn realize_sl_point(p: MomentPoint) -> Result<LocalHiddenVariableModel> {
    let (verdict, coords) = sl_membership(p, DEFAULT_TOLERANCE);
    if verdict == Containment::Outside {
        let [m1, m2, m3, m4] = coords.xi();
        return Err(Error::OutsideTetrahedron {
            x: p.x(),
            y: p.y(),
            z: p.z(),
            m1,
            m2,
            m3,
            m4,
        });
    }
    let mut weights = Vec::new();
    let mut responses = Vec::new();
    for (index, &xi) in coords.xi().iter().enumerate() {
        if xi >= WEIGHT_FLOOR {
            weights.push(xi);
            responses.push(vertex_strategy(index).response());
        }
    }
    LocalHiddenVariableModel::new(weights, responses)
}

/// Two photons in the polarization-entangled state measured through
/// polarizers at angles `θ0, θ1, θ2` (radians, one per setting, same at
/// both sites). Equal settings give identical outcomes; different settings
/// give the cosine correlators below, which lie exactly on the elliptope
/// surface for every angle choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonPairModel {
    theta0: f64,
    theta1: f64,
    theta2: f64,
}

impl PhotonPairModel {
    pub fn new(theta0: f64, theta1: f64, theta2: f64) -> Result<Self> {
        for (what, value) in [("theta0", theta0), ("theta1", theta1), ("theta2", theta2)] {
            if !value.is_finite() {
                return Err(Error::NonFinite { what, value });
            }
        }
        Ok(Self {
            theta0,
            theta1,
            theta2,
        })
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.theta0, self.theta1, self.theta2]
    }

    /// All nine correlators: `cos(2(θ_q1 - θ_q2))`, which is `+1` on the
    /// diagonal. Only the off-diagonal entries feed the classifier.
    pub fn moment_matrix(&self) -> [[f64; 3]; 3] {
        let t = self.angles();
        let mut m = [[0.0; 3]; 3];
        for (q1, row) in m.iter_mut().enumerate() {
            for (q2, entry) in row.iter_mut().enumerate() {
                *entry = (2.0 * (t[q1] - t[q2])).cos();
            }
        }
        m
    }

    /// Measurement statistics: zero local expectations and the cosine
    /// moment matrix.
    pub fn behavior(&self) -> Behavior {
        let mut e = crate::behavior::CorrelatorExpansion::zero();
        e.mixed = self.moment_matrix();
        crate::behavior::from_correlator_expansion(&e)
            .expect("cosine correlators are always feasible")
    }
}

/// The off-diagonal correlators of a photon-pair model:
/// `(cos 2(θ0-θ1), cos 2(θ0-θ2), cos 2(θ1-θ2))`.
pub fn photon_moments(m: &PhotonPairModel) -> MomentPoint {
    let [t0, t1, t2] = m.angles();
    MomentPoint::new_unchecked(
        (2.0 * (t0 - t1)).cos(),
        (2.0 * (t0 - t2)).cos(),
        (2.0 * (t1 - t2)).cos(),
    )
}

/// Tests whether `p` lies on the boundary surface of the single-λ region,
/// i.e. is reachable as `(αβ, αγ, βγ)` with at least one of
/// `|α|, |β|, |γ|` equal to 1.
///
/// With all coordinates nonzero the witness is unique up to global sign:
/// `α² = xy/z`, `β² = xz/y`, `γ² = yz/x`, which requires `xyz > 0`.
/// Exactly one zero coordinate is unreachable (a zero response zeroes two
/// products at once). Two or three zeros always admit a boundary witness,
/// e.g. `(0, ±1, z)` for `x = y = 0`: those points sit where the body is
/// pinched onto the coordinate planes.
pub fn is_on_curved_n1_surface(p: MomentPoint, tol: f64) -> bool {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let [x, y, z] = p.coords();
    if p.max_abs_coord() > 1.0 + tol {
        return false;
    }
    let zeros = [x, y, z].iter().filter(|c| c.abs() <= tol).count();
    match zeros {
        0 => {
            if x * y * z <= 0.0 {
                return false;
            }
            let squares = [x * y / z, x * z / y, y * z / x];
            let max = squares.iter().copied().fold(0.0, f64::max);
            max <= 1.0 + tol && max >= 1.0 - tol
        }
        1 => false,
        _ => true,
    }
}

/// Convenience: the moment point of a deterministic strategy.
pub fn moments_of_deterministic(s: &DeterministicStrategy) -> MomentPoint {
    moments_of_strategy(&s.response())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{
        check_exchange_symmetry, check_no_signalling, mixed_moment, reduce_to_moment_point,
        validate,
    };

    fn triple(a: f64, b: f64, c: f64) -> ResponseTriple {
        ResponseTriple::new(a, b, c).unwrap()
    }

    #[test]
    fn strategy_moments_examples() {
        let p = moments_of_strategy(&triple(1.0, 1.0, 1.0));
        assert_eq!(p.coords(), [1.0, 1.0, 1.0]);

        let p = moments_of_strategy(&triple(1.0, -1.0, -1.0));
        assert_eq!(p.coords(), [-1.0, -1.0, 1.0]);

        let p = moments_of_strategy(&triple(0.5, 0.8, -0.2));
        let expected = [0.4, -0.1, -0.16];
        for (got, want) in p.coords().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn response_triple_rejects_out_of_range() {
        assert!(ResponseTriple::new(1.1, 0.0, 0.0).is_err());
        assert!(ResponseTriple::new(0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn vertex_strategies_hit_their_vertices() {
        let expected_signs = [(1, 1, 1), (1, -1, -1), (1, -1, 1), (1, 1, -1)];
        for (index, vertex) in Tetrahedron::VERTICES.iter().enumerate() {
            let s = vertex_strategy(index);
            assert_eq!(s.signs(), expected_signs[index], "vertex {index}");
            assert_eq!(moments_of_deterministic(&s).coords(), vertex.coords());
        }
    }

    #[test]
    fn lhv_constructor_validation() {
        let r = triple(0.0, 0.0, 0.0);
        assert!(LocalHiddenVariableModel::new(vec![], vec![]).is_err());
        assert!(LocalHiddenVariableModel::new(vec![1.0], vec![r, r]).is_err());
        assert!(LocalHiddenVariableModel::new(vec![-0.1, 1.1], vec![r, r]).is_err());
        assert!(LocalHiddenVariableModel::new(vec![0.6, 0.6], vec![r, r]).is_err());
        assert!(LocalHiddenVariableModel::new(vec![0.5, 0.5], vec![r, r]).is_ok());
    }

    #[test]
    fn lhv_moments_examples() {
        let m = LocalHiddenVariableModel::single(triple(1.0, 1.0, 1.0));
        assert_eq!(moments_of_lhv(&m).coords(), [1.0, 1.0, 1.0]);

        let m = LocalHiddenVariableModel::new(
            vec![0.5, 0.5],
            vec![triple(1.0, 1.0, 1.0), triple(1.0, -1.0, -1.0)],
        )
        .unwrap();
        assert_eq!(moments_of_lhv(&m).coords(), [0.0, 0.0, 1.0]);

        let m = LocalHiddenVariableModel::new(
            vec![0.25; 4],
            (0..4).map(|i| vertex_strategy(i).response()).collect(),
        )
        .unwrap();
        assert_eq!(moments_of_lhv(&m).coords(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn lhv_behavior_examples() {
        let tol = 1e-12;

        let m = LocalHiddenVariableModel::single(triple(0.0, 0.0, 0.0));
        assert_eq!(behavior_of_lhv(&m), Behavior::uniform());

        let m = LocalHiddenVariableModel::single(triple(1.0, 1.0, 1.0));
        let b = behavior_of_lhv(&m);
        for q1 in 0..3 {
            for q2 in 0..3 {
                assert_eq!(*b.block(q1, q2), [1.0, 0.0, 0.0, 0.0]);
            }
        }

        let m = LocalHiddenVariableModel::new(
            vec![0.5, 0.5],
            vec![triple(1.0, 1.0, 1.0), triple(1.0, -1.0, -1.0)],
        )
        .unwrap();
        let b = behavior_of_lhv(&m);
        assert!(validate(&b, tol).valid);
        assert!(check_exchange_symmetry(&b, tol).symmetric);
        assert!(check_no_signalling(&b, tol).no_signalling);
        // Settings (1, 2): both values give beta*gamma = 1.
        assert!((mixed_moment(&b, 1, 2) - 1.0).abs() < tol);
        let reduced = reduce_to_moment_point(&b, tol).unwrap();
        let direct = moments_of_lhv(&m);
        for (got, want) in reduced.coords().iter().zip(direct.coords()) {
            assert!((got - want).abs() < tol);
        }
    }

    #[test]
    fn realize_vertex_edge_centroid() {
        let vertex = realize_sl_point(MomentPoint::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(vertex.len(), 1);
        assert_eq!(moments_of_lhv(&vertex).coords(), [1.0, 1.0, 1.0]);

        let edge = realize_sl_point(MomentPoint::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(edge.len(), 2);
        assert_eq!(edge.weights(), [0.5, 0.5]);
        assert_eq!(moments_of_lhv(&edge).coords(), [0.0, 0.0, 1.0]);

        let centroid = realize_sl_point(MomentPoint::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(centroid.len(), 4);
        assert_eq!(centroid.weights(), [0.25; 4]);
    }

    #[test]
    fn realize_rejects_outside_points_with_margins() {
        let r = 1.0 / std::f64::consts::SQRT_2;
        let err = realize_sl_point(MomentPoint::new(r, r, 0.0).unwrap()).unwrap_err();
        match err {
            Error::OutsideTetrahedron { m2, .. } => assert!(m2 < 0.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn photon_moments_examples() {
        use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

        let m = PhotonPairModel::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(photon_moments(&m).coords(), [1.0, 1.0, 1.0]);

        let m = PhotonPairModel::new(0.0, FRAC_PI_4, FRAC_PI_8).unwrap();
        let p = photon_moments(&m);
        let r = 1.0 / std::f64::consts::SQRT_2;
        for (got, want) in p.coords().iter().zip([0.0, r, r]) {
            assert!((got - want).abs() < 1e-15);
        }

        let m = PhotonPairModel::new(0.0, FRAC_PI_3, 2.0 * FRAC_PI_3).unwrap();
        let p = photon_moments(&m);
        for (got, want) in p.coords().iter().zip([-0.5, -0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        let g = crate::geometry::GramMatrix::from_point(p);
        assert!(g.det().abs() < 1e-12);
    }

    #[test]
    fn photon_behavior_has_perfect_diagonal_correlations() {
        let m = PhotonPairModel::new(0.1, 0.9, 2.3).unwrap();
        let b = m.behavior();
        assert!(validate(&b, 1e-12).valid);
        assert!(check_no_signalling(&b, 1e-12).no_signalling);
        for q in 0..3 {
            assert!((mixed_moment(&b, q, q) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn curved_surface_examples() {
        let tol = 1e-9;
        let pt = |x, y, z| MomentPoint::new(x, y, z).unwrap();

        assert!(is_on_curved_n1_surface(pt(1.0, 1.0, 1.0), tol));
        // Witness (0.5, 1, 1).
        assert!(is_on_curved_n1_surface(pt(0.5, 0.5, 1.0), tol));
        // Requires alpha^2 = 1.62 > 1: no factorization at all.
        assert!(!is_on_curved_n1_surface(pt(0.9, 0.9, 0.5), tol));
        // Interior of the single-λ body: witness (0.5, 0.5, 0.5), nothing
        // pinned to ±1.
        assert!(!is_on_curved_n1_surface(pt(0.25, 0.25, 0.25), tol));
        // Exactly one zero coordinate is unreachable.
        assert!(!is_on_curved_n1_surface(pt(0.0, 0.5, 0.5), tol));
        // Two zeros sit on the pinched coordinate-plane seam.
        assert!(is_on_curved_n1_surface(pt(0.0, 0.0, 0.5), tol));
        // Negative product octants are unreachable.
        assert!(!is_on_curved_n1_surface(pt(0.5, 0.5, -0.5), tol));
        // Outside the cube.
        assert!(!is_on_curved_n1_surface(pt(1.2, 1.0, 1.0), tol));
    }

    #[test]
    fn model_json_round_trip_and_rejection() {
        let m = LocalHiddenVariableModel::new(
            vec![0.3, 0.7],
            vec![triple(0.1, -0.4, 1.0), triple(-1.0, 0.25, 0.5)],
        )
        .unwrap();
        let text = m.to_json();
        let back = LocalHiddenVariableModel::from_json(&text).unwrap();
        assert_eq!(m, back);

        let bad_sum = text.replace("0.3", "0.4");
        assert!(LocalHiddenVariableModel::from_json(&bad_sum).is_err());

        let bad_kind = text.replace("lhv-model", "other");
        assert!(LocalHiddenVariableModel::from_json(&bad_kind).is_err());
    }
}
