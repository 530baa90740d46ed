//! Dimension counting for the behavior space and its symmetry reduction.
//!
//! The raw table has 36 entries. Normalization (one constraint per setting
//! pair) leaves 27 free parameters. Exchange symmetry identifies each
//! off-diagonal block with its transpose (3 further parameters per
//! unordered pair) and forces `P(+,-|q,q) = P(-,+|q,q)` on the diagonal
//! (2 parameters per diagonal block), leaving `9 + 6 = 15`. Projecting to
//! the off-diagonal mixed moments lands in 3 dimensions.
//!
//! For reference, the local polytope of the full 36-dimensional space has
//! 684 facet-defining inequalities — 36 positivity, 72 CHSH-type, 576
//! I3322-type. That enumeration is out of scope here; the counts are
//! recorded as constants and the dimension chain is verified by rank
//! computation instead.

use crate::behavior::{Behavior, OUTCOME_PAIRS};

pub const FULL_DIM: usize = 36;
pub const NORMALIZED_DIM: usize = 27;
pub const SYMMETRIC_DIM: usize = 15;
pub const MOMENT_DIM: usize = 3;

pub const POSITIVITY_FACETS: usize = 36;
pub const CHSH_TYPE_FACETS: usize = 72;
pub const I3322_TYPE_FACETS: usize = 576;
pub const TOTAL_FACETS: usize = POSITIVITY_FACETS + CHSH_TYPE_FACETS + I3322_TYPE_FACETS;

/// One linear constraint `coeffs · vec(P) = rhs` on the flattened table.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: [f64; FULL_DIM],
    pub rhs: f64,
}

fn entry_index(q1: usize, q2: usize, outcome: usize) -> usize {
    (q1 * 3 + q2) * 4 + outcome
}

fn flatten(b: &Behavior) -> [f64; FULL_DIM] {
    let mut v = [0.0; FULL_DIM];
    for q1 in 0..3 {
        for q2 in 0..3 {
            for (k, &p) in b.block(q1, q2).iter().enumerate() {
                v[entry_index(q1, q2, k)] = p;
            }
        }
    }
    v
}

/// The nine per-block normalization constraints.
pub fn normalization_constraints() -> Vec<Constraint> {
    let mut rows = Vec::with_capacity(9);
    for q1 in 0..3 {
        for q2 in 0..3 {
            let mut coeffs = [0.0; FULL_DIM];
            for k in 0..4 {
                coeffs[entry_index(q1, q2, k)] = 1.0;
            }
            rows.push(Constraint { coeffs, rhs: 1.0 });
        }
    }
    rows
}

/// Exchange-symmetry constraints: transpose identification of the three
/// off-diagonal block pairs (4 rows each) and the within-block swap
/// condition on the three diagonal blocks (1 row each).
pub fn symmetry_constraints() -> Vec<Constraint> {
    let mut rows = Vec::new();
    for (q1, q2) in [(0usize, 1usize), (0, 2), (1, 2)] {
        for (k, &(a1, a2)) in OUTCOME_PAIRS.iter().enumerate() {
            let swapped = OUTCOME_PAIRS
                .iter()
                .position(|&pair| pair == (a2, a1))
                .expect("swapped outcome pair exists");
            let mut coeffs = [0.0; FULL_DIM];
            coeffs[entry_index(q1, q2, k)] = 1.0;
            coeffs[entry_index(q2, q1, swapped)] -= 1.0;
            rows.push(Constraint { coeffs, rhs: 0.0 });
        }
    }
    for q in 0..3 {
        let mut coeffs = [0.0; FULL_DIM];
        coeffs[entry_index(q, q, 1)] = 1.0; // (+1, -1)
        coeffs[entry_index(q, q, 2)] = -1.0; // (-1, +1)
        rows.push(Constraint { coeffs, rhs: 0.0 });
    }
    rows
}

/// Normalization plus symmetry: the full constraint system whose solution
/// space is the 15-dimensional symmetric behavior family.
pub fn full_constraint_system() -> Vec<Constraint> {
    let mut rows = normalization_constraints();
    rows.extend(symmetry_constraints());
    rows
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn matrix_rank(rows: &[Constraint], tol: f64) -> usize {
    let mut m: Vec<[f64; FULL_DIM]> = rows.iter().map(|c| c.coeffs).collect();
    let mut rank = 0;
    for col in 0..FULL_DIM {
        let Some(pivot_row) = (rank..m.len())
            .filter(|&r| m[r][col].abs() > tol)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            continue;
        };
        m.swap(rank, pivot_row);
        let pivot = m[rank][col];
        for r in (rank + 1)..m.len() {
            let factor = m[r][col] / pivot;
            if factor != 0.0 {
                for c in col..FULL_DIM {
                    m[r][c] -= factor * m[rank][c];
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Free parameters of the symmetric behavior family: `36 - rank` of the
/// full constraint system. Evaluates to [`SYMMETRIC_DIM`].
pub fn symmetric_free_parameters() -> usize {
    FULL_DIM - matrix_rank(&full_constraint_system(), 1e-9)
}

/// Worst violation of the constraint system by a concrete table. Zero (up
/// to rounding) exactly for normalized, exchange-symmetric behaviors.
pub fn constraint_residual(b: &Behavior) -> f64 {
    let v = flatten(b);
    full_constraint_system()
        .iter()
        .map(|c| {
            let lhs: f64 = c.coeffs.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            (lhs - c.rhs).abs()
        })
        .fold(0.0, f64::max)
}
