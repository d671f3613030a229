//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for rank decisions in orthonormalization and
/// pseudo-inverses. Generic data sits many orders of magnitude above this.
pub const RANK_RTOL: f64 = 1e-10;

/// Vector norm order used by [`mixed_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormOrder {
    One,
    Two,
    Inf,
}

fn vec_norm(iter: impl Iterator<Item = f64>, order: NormOrder) -> f64 {
    match order {
        NormOrder::One => iter.map(f64::abs).sum(),
        NormOrder::Two => iter.map(|v| v * v).sum::<f64>().sqrt(),
        NormOrder::Inf => iter.map(f64::abs).fold(0.0, f64::max),
    }
}

/// Mixed (q1, q2) norm: q1-norm of each row, then the q2-norm of the
/// resulting vector of row norms. `(2, 1)` is the row-group norm used by the
/// outlier penalty; `(inf, inf)` is the entrywise max.
pub fn mixed_norm(m: &DMatrix<f64>, row_order: NormOrder, agg_order: NormOrder) -> f64 {
    let rows = (0..m.nrows()).map(|i| vec_norm(m.row(i).iter().copied(), row_order));
    vec_norm(rows, agg_order)
}

/// Frobenius distance between two equally shaped matrices.
pub fn frobenius_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok((a - b).norm())
}

/// Exact symmetrization (A + A^T)/2.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    s
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let se = m.clone().symmetric_eigen();
    let k = se.eigenvalues.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = DVector::from_iterator(k, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(k, k);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen(m);
    vals[0]
}

/// Symmetric pseudo-inverse: eigenvalues with magnitude at most
/// `RANK_RTOL * max|eig|` (or non-finite) are treated as zero and excluded.
pub fn sym_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let s = symmetrize(m);
    let (vals, vecs) = sym_eigen(&s);
    let vmax = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let cut = RANK_RTOL * vmax;
    let k = vals.len();
    let mut out = DMatrix::zeros(k, k);
    for c in 0..k {
        let lam = vals[c];
        if lam.abs() > cut && lam.is_finite() {
            let v = vecs.column(c);
            // out += v v^T / lam
            for i in 0..k {
                for j in 0..k {
                    out[(i, j)] += v[i] * v[j] / lam;
                }
            }
        }
    }
    symmetrize(&out)
}

/// General Moore-Penrose pseudo-inverse via SVD with a relative cutoff.
pub fn pinv(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    let eps = RANK_RTOL * smax.max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps)
        .map_err(|e| Error::Numerical(format!("svd pseudo-inverse: {e}")))
}

/// Symmetric positive-definite square root.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = symmetrize(m);
    let (vals, vecs) = sym_eigen(&s);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "min eigenvalue {:.3e}",
            vals[0]
        )));
    }
    let k = vals.len();
    let mut out = DMatrix::zeros(k, k);
    for c in 0..k {
        let r = vals[c].sqrt();
        let v = vecs.column(c);
        for i in 0..k {
            for j in 0..k {
                out[(i, j)] += r * v[i] * v[j];
            }
        }
    }
    Ok(symmetrize(&out))
}

/// Orthonormal basis of the column span of `m`, built by pivoted
/// Gram-Schmidt with full reorthogonalization. Columns whose residual norm
/// falls at or below `RANK_RTOL` times the largest original column norm are
/// treated as dependent, so the result has one column per effective rank.
pub fn orthonormal_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let k = m.ncols();
    let mut work: Vec<DVector<f64>> = (0..k).map(|j| m.column(j).into_owned()).collect();
    let max_norm = work.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let tol = (RANK_RTOL * max_norm).max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k.min(n));
    let mut alive: Vec<usize> = (0..k).collect();
    while basis.len() < n {
        // pivot: remaining column with the largest residual norm
        let Some((pos, &best)) = alive
            .iter()
            .enumerate()
            .max_by(|a, b| work[*a.1].norm().total_cmp(&work[*b.1].norm()))
        else {
            break;
        };
        if work[best].norm() <= tol {
            break;
        }
        alive.swap_remove(pos);
        let mut v = work[best].clone();
        // two reorthogonalization passes for numerical safety
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv <= tol {
            continue;
        }
        v /= nv;
        for idx in &alive {
            let c = v.dot(&work[*idx]);
            work[*idx].axpy(-c, &v, 1.0);
        }
        basis.push(v);
    }
    let r = basis.len();
    let mut q = DMatrix::zeros(n, r);
    for (c, v) in basis.iter().enumerate() {
        q.set_column(c, v);
    }
    q
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "lstsq: {} rows vs rhs length {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    let eps = RANK_RTOL * smax.max(f64::MIN_POSITIVE);
    svd.solve(b, eps)
        .map(|m| DVector::from_column_slice(m.as_slice()))
        .map_err(|e| Error::Numerical(format!("svd solve: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mixed_norm_orders() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, -4.0, 0.0, 2.0]);
        // (2,1): row norms 5 and 2, summed
        assert_relative_eq!(mixed_norm(&m, NormOrder::Two, NormOrder::One), 7.0);
        // (1,inf): row 1-norms 7 and 2, max
        assert_relative_eq!(mixed_norm(&m, NormOrder::One, NormOrder::Inf), 7.0);
        // (inf,inf): entrywise max abs
        assert_relative_eq!(mixed_norm(&m, NormOrder::Inf, NormOrder::Inf), 4.0);
        // (2,2) is Frobenius
        assert_relative_eq!(
            mixed_norm(&m, NormOrder::Two, NormOrder::Two),
            m.norm(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn frobenius_distance_shape_check() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(2, 3);
        assert!(frobenius_distance(&a, &b).is_err());
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_relative_eq!(frobenius_distance(&a, &c).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn sym_pinv_singular_example() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = sym_pinv(&s);
        assert_relative_eq!(p[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[(0, 1)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(p[(1, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sym_pinv_inverts_pd() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let p = sym_pinv(&s);
        let id = &s * &p;
        assert_relative_eq!(id[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(id[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_handles_rank_deficiency() {
        // two identical columns plus one independent
        let m = DMatrix::from_columns(&[
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 2.0, 0.0]),
        ]);
        let q = orthonormal_basis(&m);
        assert_eq!(q.ncols(), 2);
        let qtq = q.transpose() * &q;
        assert_relative_eq!(qtq[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(qtq[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_of_empty_matrix() {
        let m = DMatrix::<f64>::zeros(4, 0);
        let q = orthonormal_basis(&m);
        assert_eq!(q.shape(), (4, 0));
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = sym_sqrt(&s).unwrap();
        assert_relative_eq!((&r * &r)[(0, 1)], 1.0, epsilon = 1e-12);
        assert!(sym_sqrt(&DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0])).is_err());
    }

    #[test]
    fn lstsq_min_norm_rank_deficient() {
        // a = [[1,1],[0,0]], b = [2,0]: solutions x1+x2=2; min-norm is (1,1)
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = DVector::from_column_slice(&[2.0, 0.0]);
        let x = lstsq_min_norm(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-10);
    }
}
