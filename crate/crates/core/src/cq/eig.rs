//! Closed-form eigendecomposition of small (m <= 3) complex matrices.
//!
//! The contour solver diagonalizes the m x m differentiation symbol at every
//! node; for the stage counts we support this is cheaper and more predictable
//! than a general nonsymmetric eigensolver.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;

pub struct Eig {
    pub values: Vec<C64>,
    /// Columns are right eigenvectors.
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
    /// Frobenius condition number of the eigenvector matrix.
    pub cond: f64,
}

pub fn eig_small(mat: &DMatrix<C64>) -> Result<Eig> {
    let m = mat.nrows();
    if mat.ncols() != m || m == 0 || m > 3 {
        return Err(Error::InvalidParameter(format!(
            "eig_small handles square matrices of size 1..3, got {}x{}",
            m,
            mat.ncols()
        )));
    }
    let values = match m {
        1 => vec![mat[(0, 0)]],
        2 => eig_values_2(mat),
        _ => eig_values_3(mat),
    };
    let mut vectors = DMatrix::<C64>::zeros(m, m);
    if m == 1 {
        vectors[(0, 0)] = C64::ONE;
    } else {
        for (j, &lam) in values.iter().enumerate() {
            let v = null_vector(mat, lam)?;
            for i in 0..m {
                vectors[(i, j)] = v[i];
            }
        }
    }
    let inverse = vectors.clone().try_inverse().ok_or_else(|| {
        Error::Numerical("eigenvector matrix is singular (defective or near-defective)".into())
    })?;
    let cond = vectors.norm() * inverse.norm();
    Ok(Eig { values, vectors, inverse, cond })
}

fn eig_values_2(m: &DMatrix<C64>) -> Vec<C64> {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    vec![(tr + disc) * 0.5, (tr - disc) * 0.5]
}

/// Roots of the characteristic polynomial via Cardano's formula.
fn eig_values_3(m: &DMatrix<C64>) -> Vec<C64> {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    // sum of principal 2x2 minors
    let c2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
    // lambda^3 + a2 lambda^2 + a1 lambda + a0
    let a2 = -tr;
    let a1 = c2;
    let a0 = -det;
    // depressed cubic x^3 + p x + q, lambda = x - a2/3
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let half_q = q * 0.5;
    let inner = (half_q * half_q + p * p * p / 27.0).sqrt();
    // pick the larger of -q/2 +- inner to avoid cancellation
    let t0 = -half_q + inner;
    let t1 = -half_q - inner;
    let t = if t0.norm() >= t1.norm() { t0 } else { t1 };
    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let roots_x: Vec<C64> = if t.norm() == 0.0 {
        // p = q = 0: triple root at zero
        vec![C64::ZERO; 3]
    } else {
        let u = t.powf(1.0 / 3.0);
        let v = -p / (3.0 * u);
        (0..3)
            .map(|k| {
                let w = omega.powu(k as u32);
                u * w + v * w.conj()
            })
            .collect()
    };
    roots_x.into_iter().map(|x| x - shift).collect()
}

/// Unit null vector of (M - lambda I), assuming rank m-1.
fn null_vector(m: &DMatrix<C64>, lam: C64) -> Result<Vec<C64>> {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= lam;
    }
    let v: Vec<C64> = if n == 2 {
        let cands = [
            vec![a[(0, 1)], -a[(0, 0)]],
            vec![a[(1, 1)], -a[(1, 0)]],
        ];
        best_candidate(&cands)
    } else {
        let row = |i: usize| [a[(i, 0)], a[(i, 1)], a[(i, 2)]];
        let cands = [
            cross3(row(0), row(1)),
            cross3(row(0), row(2)),
            cross3(row(1), row(2)),
        ];
        best_candidate(&cands.iter().map(|c| c.to_vec()).collect::<Vec<_>>())
    };
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical(format!("failed to find eigenvector for lambda = {lam}")));
    }
    Ok(v.into_iter().map(|z| z / norm).collect())
}

fn cross3(a: [C64; 3], b: [C64; 3]) -> [C64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn best_candidate(cands: &[Vec<C64>]) -> Vec<C64> {
    cands
        .iter()
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            nx.partial_cmp(&ny).unwrap()
        })
        .unwrap()
        .clone()
}
