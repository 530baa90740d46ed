//! Shared helpers for the integration and acceptance suites.
//!
//! The eigenvalue routine here is the independent oracle for the
//! determinant/minor quantum test: it goes through Jacobi rotations and
//! never touches the closed-form `det G` path it cross-checks.

#![allow(dead_code)]

use rand::distr::Uniform;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(lo: f64, hi: f64) -> Uniform<f64> {
    Uniform::new_inclusive(lo, hi).expect("valid range")
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues_3x3(mut a: [[f64; 3]; 3]) -> [f64; 3] {
    fn max_off_diagonal(a: &[[f64; 3]; 3]) -> f64 {
        a[0][1].abs().max(a[0][2].abs()).max(a[1][2].abs())
    }

    for _ in 0..60 {
        if max_off_diagonal(&a) < 1e-14 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            let mut g = [[0.0; 3]; 3];
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            g[p][p] = c;
            g[q][q] = c;
            g[p][q] = s;
            g[q][p] = -s;

            a = mat_mul(&transpose(&g), &mat_mul(&a, &g));
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                c[i][j] += a[i][k] * bk[j];
            }
        }
    }
    c
}

/// Minimum eigenvalue of the unit-diagonal Gram matrix with off-diagonals
/// `(x, y, z)`.
pub fn min_gram_eigenvalue(x: f64, y: f64, z: f64) -> f64 {
    let eig = symmetric_eigenvalues_3x3([[1.0, x, y], [x, 1.0, z], [y, z, 1.0]]);
    eig.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Uniform point on the 3-simplex (flat Dirichlet) via exponential spacings.
pub fn random_simplex_weights(rng: &mut impl Rng) -> [f64; 4] {
    let mut w = [0.0; 4];
    let mut total = 0.0;
    for wi in &mut w {
        let u: f64 = rng.random();
        *wi = -(1.0 - u).ln();
        total += *wi;
    }
    for wi in &mut w {
        *wi /= total;
    }
    w
}

#[test]
fn jacobi_matches_known_spectra() {
    // Identity.
    let eig = symmetric_eigenvalues_3x3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    for e in eig {
        assert!((e - 1.0).abs() < 1e-12);
    }
    // Gram matrix of (1, 1, 1): eigenvalues {3, 0, 0}.
    let mut eig = symmetric_eigenvalues_3x3([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
    eig.sort_by(f64::total_cmp);
    assert!(eig[0].abs() < 1e-12 && eig[1].abs() < 1e-12 && (eig[2] - 3.0).abs() < 1e-12);
    // Gram matrix of (1, 1, -1): eigenvalues {2, 2, -1}.
    let mut eig = symmetric_eigenvalues_3x3([[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0]]);
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] + 1.0).abs() < 1e-12);
    assert!((eig[1] - 2.0).abs() < 1e-12 && (eig[2] - 2.0).abs() < 1e-12);
}
