//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::model::C64;

/// Eigen-decomposition `A = V diag(λ) V⁻¹` of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<C64>,
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

/// Diagonalizes `a` through its complex Schur form.
///
/// Eigenvectors of the triangular factor are found by back-substitution;
/// near-zero pivots are replaced by a small multiple of `‖T‖`, so a defective
/// matrix shows up as a huge condition number rather than a division by zero.
/// Returns `None` if the eigenvector matrix is singular.
pub fn eigen_decompose(a: &DMatrix<C64>) -> Option<EigenDecomposition> {
    let n = a.nrows();
    let (q, t) = Schur::new(a.clone()).unpack();
    let values = DVector::from_fn(n, |k, _| t[(k, k)]);

    let scale = t.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);

    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::from(1.0);
        for j in (0..k).rev() {
            let mut acc = C64::from(0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = C64::from(smin);
            }
            y[(j, k)] = -acc / denom;
        }
    }

    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::from(norm);
        }
    }

    let condition = condition_number(&vectors);
    let inverse = vectors.clone().try_inverse()?;
    Some(EigenDecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(a: &DMatrix<C64>) -> f64 {
    let sv = SVD::new(a.clone(), false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the lower
/// triangle is read.
pub fn hermitian_eigenvalues(a: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest `|a_ij − conj(a_ji)|`.
pub fn hermiticity_defect(a: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Largest modulus among the entries.
pub fn max_modulus<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonalizes_non_normal_matrix() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 1.0),
                c(2.0, 0.0),
                c(0.0, 0.5),
                c(0.0, 0.0),
                c(-1.0, 0.0),
                c(3.0, -1.0),
                c(0.5, 0.0),
                c(0.0, 0.0),
                c(2.0, 2.0),
            ],
        );
        let e = eigen_decompose(&a).unwrap();
        let rebuilt = &e.vectors * DMatrix::from_diagonal(&e.values) * &e.inverse;
        assert!((rebuilt - a).norm() < 1e-12);
        assert!(e.condition < 1e3);
    }

    #[test]
    fn defective_matrix_has_huge_condition() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        );
        let cond = eigen_decompose(&a)
            .map(|e| e.condition)
            .unwrap_or(f64::INFINITY);
        assert!(cond > 1e8, "condition {cond}");
    }

    #[test]
    fn hermitian_helpers() {
        let a =
            DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert_eq!(hermiticity_defect(&a), 0.0);
    }
}
