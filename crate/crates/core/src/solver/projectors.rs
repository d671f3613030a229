//! Orthogonal projectors onto the complements of leave-one-column-out spans.
//!
//! For each column j, `Z^j v = v - Q_j (Q_j^T v)` where `Q_j` is an
//! orthonormal basis of the span of the remaining design columns (plus the
//! constant direction when an intercept is fitted). Bases are built once per
//! design and reused across solver iterations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::orthonormal_basis;
use crate::sampling::u_n;

/// Cached orthonormal bases for all leave-one-out projectors and the
/// full-design projector.
#[derive(Clone, Debug)]
pub struct ProjectorCache {
    /// `bases[j]`: n x r_j orthonormal basis of span(X_{.,j^c} [, u]).
    bases: Vec<DMatrix<f64>>,
    /// Orthonormal basis of span(X [, u]).
    full_basis: DMatrix<f64>,
    n: usize,
    p: usize,
    fit_intercept: bool,
    /// True if some leave-one-out span already fills R^n, which makes the
    /// corresponding fidelity term vanish identically.
    degenerate: bool,
}

impl ProjectorCache {
    /// Builds all p leave-one-out bases plus the full-design basis.
    pub fn build(xn: &DMatrix<f64>, fit_intercept: bool) -> Result<Self> {
        let n = xn.nrows();
        let p = xn.ncols();
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput("empty design".into()));
        }
        let u = u_n(n);
        let cols_of = |skip: Option<usize>| -> DMatrix<f64> {
            let keep: Vec<usize> = (0..p).filter(|&k| Some(k) != skip).collect();
            let extra = usize::from(fit_intercept);
            let mut m = DMatrix::zeros(n, keep.len() + extra);
            if fit_intercept {
                m.column_mut(0).copy_from(&u);
            }
            for (idx, &k) in keep.iter().enumerate() {
                m.column_mut(extra + idx).copy_from(&xn.column(k));
            }
            m
        };
        let mut degenerate = false;
        let mut bases = Vec::with_capacity(p);
        for j in 0..p {
            let q = orthonormal_basis(&cols_of(Some(j)));
            degenerate |= q.ncols() == n;
            bases.push(q);
        }
        let full_basis = orthonormal_basis(&cols_of(None));
        Ok(ProjectorCache {
            bases,
            full_basis,
            n,
            p,
            fit_intercept,
            degenerate,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn fit_intercept(&self) -> bool {
        self.fit_intercept
    }
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }
    /// Rank of the span `Z^j` projects out.
    pub fn span_rank(&self, j: usize) -> usize {
        self.bases[j].ncols()
    }

    /// `Z^j v`.
    pub fn project_out(&self, j: usize, v: &DVector<f64>) -> DVector<f64> {
        project_complement(&self.bases[j], v)
    }

    /// `Z v` with Z the complement of the full design span.
    pub fn project_out_full(&self, v: &DVector<f64>) -> DVector<f64> {
        project_complement(&self.full_basis, v)
    }
}

fn project_complement(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    let coeffs = q.transpose() * v;
    v - q * coeffs
}
