//! Full conditional probability tables `P(a1, a2 | q1, q2)` for the
//! three-setting, binary-outcome scenario, and their reduction to mixed
//! moments.
//!
//! A behavior holds nine 4-entry blocks, one per setting pair. The outcome
//! order inside a block is fixed everywhere, including serialized forms:
//! `(+1,+1), (+1,-1), (-1,+1), (-1,-1)`. Behaviors are immutable once
//! built; validation is a separate reporting operation so that tables read
//! from files can be inspected rather than rejected blind.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MomentPoint;

/// Canonical outcome order for the four entries of a block.
pub const OUTCOME_PAIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Index of an outcome pair in the canonical order. Panics on labels
/// outside `{+1, -1}`.
pub fn outcome_index(a1: i8, a2: i8) -> usize {
    let i = match a1 {
        1 => 0,
        -1 => 2,
        _ => panic!("outcome label a1 = {a1}, expected +1 or -1"),
    };
    let j = match a2 {
        1 => 0,
        -1 => 1,
        _ => panic!("outcome label a2 = {a2}, expected +1 or -1"),
    };
    i + j
}

/// Version written into serialized behavior documents.
pub const BEHAVIOR_FORMAT_VERSION: u32 = 1;

/// Conditional probability table over 9 setting pairs x 4 outcome pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    // blocks[q1][q2] in canonical outcome order
    blocks: [[[f64; 4]; 3]; 3],
}

impl Behavior {
    pub fn from_blocks(blocks: [[[f64; 4]; 3]; 3]) -> Self {
        Self { blocks }
    }

    /// The maximally mixed table: every entry 1/4.
    pub fn uniform() -> Self {
        Self {
            blocks: [[[0.25; 4]; 3]; 3],
        }
    }

    pub fn block(&self, q1: usize, q2: usize) -> &[f64; 4] {
        &self.blocks[q1][q2]
    }

    pub fn prob(&self, q1: usize, q2: usize, a1: i8, a2: i8) -> f64 {
        self.blocks[q1][q2][outcome_index(a1, a2)]
    }

    /// Marginal `P(a1 | q1, q2)` at site 1.
    pub fn site1_marginal(&self, q1: usize, q2: usize, a1: i8) -> f64 {
        self.prob(q1, q2, a1, 1) + self.prob(q1, q2, a1, -1)
    }

    /// Marginal `P(a2 | q1, q2)` at site 2.
    pub fn site2_marginal(&self, q1: usize, q2: usize, a2: i8) -> f64 {
        self.prob(q1, q2, 1, a2) + self.prob(q1, q2, -1, a2)
    }

    /// Serializes to the versioned structured-text document. Output is
    /// deterministic: blocks are keyed `"q1,q2"` in sorted order and floats
    /// use the shortest representation that parses back bit-exactly.
    pub fn to_json(&self) -> String {
        let mut blocks = BTreeMap::new();
        for q1 in 0..3 {
            for q2 in 0..3 {
                blocks.insert(format!("{q1},{q2}"), self.blocks[q1][q2]);
            }
        }
        let doc = BehaviorDoc {
            version: BEHAVIOR_FORMAT_VERSION,
            scenario: "3322".to_string(),
            blocks,
        };
        serde_json::to_string_pretty(&doc).expect("behavior document serializes")
    }

    /// Parses the versioned document, requiring scenario `"3322"`, version
    /// [`BEHAVIOR_FORMAT_VERSION`], and all nine blocks.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BehaviorDoc = serde_json::from_str(text)?;
        if doc.version != BEHAVIOR_FORMAT_VERSION {
            return Err(Error::Parse {
                what: "behavior document",
                reason: format!(
                    "unsupported version {}, expected {BEHAVIOR_FORMAT_VERSION}",
                    doc.version
                ),
            });
        }
        if doc.scenario != "3322" {
            return Err(Error::Parse {
                what: "behavior document",
                reason: format!("scenario \"{}\", expected \"3322\"", doc.scenario),
            });
        }
        let mut blocks = [[[0.0; 4]; 3]; 3];
        for q1 in 0..3 {
            for q2 in 0..3 {
                let key = format!("{q1},{q2}");
                let entries = doc.blocks.get(&key).ok_or_else(|| Error::Parse {
                    what: "behavior document",
                    reason: format!("missing setting pair \"{key}\""),
                })?;
                blocks[q1][q2] = *entries;
            }
        }
        if doc.blocks.len() != 9 {
            let extra: Vec<_> = doc
                .blocks
                .keys()
                .filter(|k| {
                    !matches!(k.as_bytes(), [q1, b',', q2] if (b'0'..=b'2').contains(q1) && (b'0'..=b'2').contains(q2))
                })
                .cloned()
                .collect();
            return Err(Error::Parse {
                what: "behavior document",
                reason: format!("unexpected block keys: {extra:?}"),
            });
        }
        Ok(Self { blocks })
    }
}

#[derive(Serialize, Deserialize)]
struct BehaviorDoc {
    version: u32,
    scenario: String,
    blocks: BTreeMap<String, [f64; 4]>,
}

/// Expansion of a behavior into local expectations and mixed moments:
/// `P = ¼(1 + a1·A1 + a2·A2 + a1a2·M)` per setting pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelatorExpansion {
    /// `A1[q1][q2] = <a1>` under settings `(q1, q2)`.
    pub a1_marginals: [[f64; 3]; 3],
    /// `A2[q1][q2] = <a2>` under settings `(q1, q2)`.
    pub a2_marginals: [[f64; 3]; 3],
    /// `M[q1][q2] = <a1 a2>` under settings `(q1, q2)`.
    pub mixed: [[f64; 3]; 3],
}

impl CorrelatorExpansion {
    pub fn zero() -> Self {
        Self {
            a1_marginals: [[0.0; 3]; 3],
            a2_marginals: [[0.0; 3]; 3],
            mixed: [[0.0; 3]; 3],
        }
    }
}

/// Per-block normalization residuals and negativity findings.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub tolerance: f64,
    /// `|Σ block - 1|` for each setting pair.
    pub block_residuals: [[f64; 3]; 3],
    /// `(q1, q2, outcome index, value)` for entries below `-tol`.
    pub negative_entries: Vec<(usize, usize, usize, f64)>,
    pub valid: bool,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.block_residuals
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Checks normalization and non-negativity of every block.
pub fn validate(b: &Behavior, tol: f64) -> ValidationReport {
    let mut block_residuals = [[0.0; 3]; 3];
    let mut negative_entries = Vec::new();
    for q1 in 0..3 {
        for q2 in 0..3 {
            let block = b.block(q1, q2);
            let sum: f64 = block.iter().sum();
            block_residuals[q1][q2] = (sum - 1.0).abs();
            for (idx, &value) in block.iter().enumerate() {
                if value < -tol {
                    negative_entries.push((q1, q2, idx, value));
                }
            }
        }
    }
    let valid = negative_entries.is_empty() && block_residuals.iter().flatten().all(|&r| r <= tol);
    ValidationReport {
        tolerance: tol,
        block_residuals,
        negative_entries,
        valid,
    }
}

/// Exchange-symmetry check result.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub max_residual: f64,
    /// `(q1, q2, a1, a2)` of the worst-violating entry, if any residual is
    /// nonzero.
    pub worst: Option<(usize, usize, i8, i8)>,
}

/// Tests `P(a1,a2|q1,q2) = P(a2,a1|q2,q1)` for all arguments. Running over
/// every entry also covers the diagonal constraint
/// `P(+1,-1|q,q) = P(-1,+1|q,q)` as the `q1 = q2` case.
pub fn check_exchange_symmetry(b: &Behavior, tol: f64) -> SymmetryReport {
    let mut max_residual = 0.0;
    let mut worst = None;
    for q1 in 0..3 {
        for q2 in 0..3 {
            for &(a1, a2) in &OUTCOME_PAIRS {
                let residual = (b.prob(q1, q2, a1, a2) - b.prob(q2, q1, a2, a1)).abs();
                if residual > max_residual {
                    max_residual = residual;
                    worst = Some((q1, q2, a1, a2));
                }
            }
        }
    }
    SymmetryReport {
        symmetric: max_residual <= tol,
        max_residual,
        worst,
    }
}

/// No-signalling check result.
#[derive(Clone, Copy, Debug)]
pub struct NoSignallingReport {
    pub no_signalling: bool,
    /// Largest marginal shift induced by the distant setting.
    pub max_deviation: f64,
}

/// Tests that each site's marginal outcome distribution is independent of
/// the other site's setting choice.
pub fn check_no_signalling(b: &Behavior, tol: f64) -> NoSignallingReport {
    let mut max_deviation: f64 = 0.0;
    for a in [1i8, -1] {
        for q1 in 0..3 {
            let reference = b.site1_marginal(q1, 0, a);
            for q2 in 1..3 {
                max_deviation = max_deviation.max((b.site1_marginal(q1, q2, a) - reference).abs());
            }
        }
        for q2 in 0..3 {
            let reference = b.site2_marginal(0, q2, a);
            for q1 in 1..3 {
                max_deviation = max_deviation.max((b.site2_marginal(q1, q2, a) - reference).abs());
            }
        }
    }
    NoSignallingReport {
        no_signalling: max_deviation <= tol,
        max_deviation,
    }
}

/// The correlator `<a1 a2> = Σ a1·a2·P(a1,a2|q1,q2)` for one setting pair.
pub fn mixed_moment(b: &Behavior, q1: usize, q2: usize) -> f64 {
    let block = b.block(q1, q2);
    ((block[0] - block[1]) - block[2]) + block[3]
}

/// All nine correlators as a matrix indexed `[q1][q2]`.
pub fn moment_matrix(b: &Behavior) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (q1, row) in m.iter_mut().enumerate() {
        for (q2, entry) in row.iter_mut().enumerate() {
            *entry = mixed_moment(b, q1, q2);
        }
    }
    m
}

/// Reduces a valid, exchange-symmetric behavior to its moment point
/// `(M01, M02, M12)`. The transposed moments must agree within `tol`
/// (they do for any exchange-symmetric table); the returned coordinates
/// average each pair.
pub fn reduce_to_moment_point(b: &Behavior, tol: f64) -> Result<MomentPoint> {
    let m = moment_matrix(b);
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut coords = [0.0; 3];
    for (k, &(q1, q2)) in pairs.iter().enumerate() {
        let forward = m[q1][q2];
        let reverse = m[q2][q1];
        if (forward - reverse).abs() > tol {
            return Err(Error::MomentAsymmetry {
                q1,
                q2,
                forward,
                reverse,
                tol,
            });
        }
        coords[k] = 0.5 * (forward + reverse);
    }
    MomentPoint::new(coords[0], coords[1], coords[2])
}

/// Builds the 36-entry table from `¼(1 + a1·A1 + a2·A2 + a1a2·M)`.
///
/// Entries in `[-1e-12, 0)` are rounding dust and clamp to zero; anything
/// more negative means the expansion is infeasible and names the offending
/// block and outcome.
pub fn from_correlator_expansion(e: &CorrelatorExpansion) -> Result<Behavior> {
    let mut blocks = [[[0.0; 4]; 3]; 3];
    for q1 in 0..3 {
        for q2 in 0..3 {
            for (idx, &(a1, a2)) in OUTCOME_PAIRS.iter().enumerate() {
                let (s1, s2) = (f64::from(a1), f64::from(a2));
                let value = 0.25
                    * (1.0
                        + s1 * e.a1_marginals[q1][q2]
                        + s2 * e.a2_marginals[q1][q2]
                        + s1 * s2 * e.mixed[q1][q2]);
                if value < -1e-12 {
                    return Err(Error::InfeasibleExpansion {
                        q1,
                        q2,
                        a1,
                        a2,
                        value,
                    });
                }
                blocks[q1][q2][idx] = value.max(0.0);
            }
        }
    }
    Ok(Behavior::from_blocks(blocks))
}

/// Extracts `(A1, A2, M)` back out of a table; inverse of
/// [`from_correlator_expansion`] for normalized behaviors.
pub fn correlator_expansion_of(b: &Behavior) -> CorrelatorExpansion {
    let mut e = CorrelatorExpansion::zero();
    for q1 in 0..3 {
        for q2 in 0..3 {
            let block = b.block(q1, q2);
            e.a1_marginals[q1][q2] = (block[0] + block[1]) - (block[2] + block[3]);
            e.a2_marginals[q1][q2] = (block[0] + block[2]) - (block[1] + block[3]);
            e.mixed[q1][q2] = ((block[0] - block[1]) - block[2]) + block[3];
        }
    }
    e
}

/// No-signalling realization of an arbitrary cube point: zero local
/// expectations, off-diagonal moments from `p` (symmetrized), diagonal
/// moments from `diagonal`. Every point of the cube is reachable this way;
/// the default diagonal fill is the neutral `(0, 0, 0)`.
pub fn ns_behavior_from_point(p: MomentPoint, diagonal: [f64; 3]) -> Result<Behavior> {
    for (what, value) in [("x", p.x()), ("y", p.y()), ("z", p.z())] {
        if value.abs() > 1.0 {
            return Err(Error::OutOfRange {
                what,
                value,
                min: -1.0,
                max: 1.0,
            });
        }
    }
    for (q, &value) in diagonal.iter().enumerate() {
        if !value.is_finite() || value.abs() > 1.0 {
            return Err(Error::OutOfRange {
                what: ["M00", "M11", "M22"][q],
                value,
                min: -1.0,
                max: 1.0,
            });
        }
    }
    let mut e = CorrelatorExpansion::zero();
    let [x, y, z] = p.coords();
    e.mixed = [
        [diagonal[0], x, y],
        [x, diagonal[1], z],
        [y, z, diagonal[2]],
    ];
    from_correlator_expansion(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DEFAULT_TOLERANCE;

    const TOL: f64 = DEFAULT_TOLERANCE;

    #[test]
    fn uniform_behavior_is_valid() {
        let report = validate(&Behavior::uniform(), TOL);
        assert!(report.valid);
        assert_eq!(report.max_residual(), 0.0);
        assert!(report.negative_entries.is_empty());
    }

    #[test]
    fn validate_flags_bad_normalization_and_negativity() {
        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[1][2] = [0.2, 0.2, 0.2, 0.3]; // sums to 0.9
        let report = validate(&Behavior::from_blocks(blocks), TOL);
        assert!(!report.valid);
        assert!((report.block_residuals[1][2] - 0.1).abs() < 1e-15);

        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[0][0] = [-0.01, 0.35, 0.33, 0.33];
        let report = validate(&Behavior::from_blocks(blocks), TOL);
        assert!(!report.valid);
        assert_eq!(report.negative_entries, vec![(0, 0, 0, -0.01)]);
    }

    #[test]
    fn exchange_symmetry_detects_transposition_mismatch() {
        assert!(check_exchange_symmetry(&Behavior::uniform(), TOL).symmetric);

        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[0][1] = [0.2, 0.3, 0.25, 0.25];
        blocks[1][0] = [0.2, 0.25, 0.2, 0.35];
        // P(+,-|0,1) = 0.3 but P(-,+|1,0) = 0.2.
        let report = check_exchange_symmetry(&Behavior::from_blocks(blocks), TOL);
        assert!(!report.symmetric);
        assert!((report.max_residual - 0.1).abs() < 1e-15);
    }

    #[test]
    fn no_signalling_detects_marginal_shift() {
        assert!(check_no_signalling(&Behavior::uniform(), TOL).no_signalling);

        // P(a1 = +1 | q1 = 0) is 0.8 under q2 = 0 and q2 = 2 but 0.6 under
        // q2 = 1.
        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[0][0] = [0.4, 0.4, 0.1, 0.1];
        blocks[0][1] = [0.3, 0.3, 0.2, 0.2];
        blocks[0][2] = [0.4, 0.4, 0.1, 0.1];
        let report = check_no_signalling(&Behavior::from_blocks(blocks), TOL);
        assert!(!report.no_signalling);
        assert!((report.max_deviation - 0.2).abs() < 1e-15);
    }

    #[test]
    fn mixed_moment_examples() {
        assert_eq!(mixed_moment(&Behavior::uniform(), 0, 1), 0.0);

        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[0][1] = [0.5, 0.0, 0.0, 0.5];
        assert_eq!(mixed_moment(&Behavior::from_blocks(blocks), 0, 1), 1.0);

        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[2][1] = [0.4, 0.1, 0.1, 0.4];
        let m = mixed_moment(&Behavior::from_blocks(blocks), 2, 1);
        assert!((m - 0.6).abs() < 1e-15);
    }

    #[test]
    fn reduce_uniform_and_cube_realization() {
        let p = reduce_to_moment_point(&Behavior::uniform(), TOL).unwrap();
        assert_eq!(p.coords(), [0.0, 0.0, 0.0]);

        let target = MomentPoint::new(0.3, -0.5, 0.9).unwrap();
        let b = ns_behavior_from_point(target, [0.0; 3]).unwrap();
        let p = reduce_to_moment_point(&b, TOL).unwrap();
        for (got, want) in p.coords().iter().zip(target.coords()) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn reduce_rejects_asymmetric_moments() {
        let mut blocks = [[[0.25; 4]; 3]; 3];
        blocks[0][1] = [0.5, 0.0, 0.0, 0.5]; // M01 = 1
        blocks[1][0] = [0.25; 4]; // M10 = 0
        let err = reduce_to_moment_point(&Behavior::from_blocks(blocks), TOL).unwrap_err();
        match err {
            Error::MomentAsymmetry { q1, q2, .. } => assert_eq!((q1, q2), (0, 1)),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn expansion_examples() {
        let b = from_correlator_expansion(&CorrelatorExpansion::zero()).unwrap();
        assert_eq!(b, Behavior::uniform());

        let mut e = CorrelatorExpansion::zero();
        e.mixed[0][1] = 1.0;
        let b = from_correlator_expansion(&e).unwrap();
        assert_eq!(*b.block(0, 1), [0.5, 0.0, 0.0, 0.5]);
        assert_eq!(*b.block(1, 0), [0.25; 4]);

        let mut e = CorrelatorExpansion::zero();
        e.a1_marginals[0][0] = 0.5;
        let b = from_correlator_expansion(&e).unwrap();
        assert_eq!(*b.block(0, 0), [0.375, 0.375, 0.125, 0.125]);
    }

    #[test]
    fn infeasible_expansion_names_entry() {
        let mut e = CorrelatorExpansion::zero();
        e.a1_marginals[0][0] = 0.8;
        e.mixed[0][0] = -0.8;
        let err = from_correlator_expansion(&e).unwrap_err();
        match err {
            Error::InfeasibleExpansion {
                q1,
                q2,
                a1,
                a2,
                value,
            } => {
                assert_eq!((q1, q2, a1, a2), (0, 0, -1, -1));
                assert!((value - (-0.15)).abs() < 1e-15);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn ns_behavior_examples() {
        let origin = MomentPoint::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(
            ns_behavior_from_point(origin, [0.0; 3]).unwrap(),
            Behavior::uniform()
        );

        // Cube corner outside the quantum set, diagonal fill +1.
        let corner = MomentPoint::new(1.0, 1.0, -1.0).unwrap();
        let b = ns_behavior_from_point(corner, [1.0; 3]).unwrap();
        assert!(validate(&b, TOL).valid);
        assert!(check_exchange_symmetry(&b, TOL).symmetric);
        assert!(check_no_signalling(&b, TOL).no_signalling);
        let p = reduce_to_moment_point(&b, TOL).unwrap();
        assert_eq!(p.coords(), [1.0, 1.0, -1.0]);

        let out = ns_behavior_from_point(MomentPoint::new(1.2, 0.0, 0.0).unwrap(), [0.0; 3]);
        assert!(out.is_err());
        let out = ns_behavior_from_point(origin, [0.0, 1.5, 0.0]);
        assert!(out.is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = MomentPoint::new(0.1 + 0.2, -1.0 / 3.0, 0.9).unwrap();
        let b = ns_behavior_from_point(p, [0.7, 0.0, -0.3]).unwrap();
        let text = b.to_json();
        let back = Behavior::from_json(&text).unwrap();
        assert_eq!(b, back);
        // Deterministic document: re-serialization is byte-identical.
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn json_rejects_malformed_documents() {
        let good = Behavior::uniform().to_json();

        let wrong_version = good.replace("\"version\": 1", "\"version\": 2");
        assert!(Behavior::from_json(&wrong_version).is_err());

        let wrong_scenario = good.replace("\"3322\"", "\"2222\"");
        assert!(Behavior::from_json(&wrong_scenario).is_err());

        let missing_block = good.replace("\"2,2\"", "\"3,3\"");
        assert!(Behavior::from_json(&missing_block).is_err());
    }
}
