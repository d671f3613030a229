//! Ground-truth precision models for the synthetic benchmark.
//!
//! A model is built in two steps: a base symmetric matrix `A` (one of four
//! named families, or a user-supplied custom matrix), then a normalization
//! that rescales `A` so the inverse of the result has unit diagonal:
//! `omega = D^{1/2} A D^{1/2}` with `D = diag entries of A^{-1}` (entrywise
//! square root of the diagonal). All downstream quantities (covariance,
//! coefficient matrix, noise scales) derive from the normalized precision.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Base-matrix family.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelVariant {
    /// `A[i][j] = 0.6^|i-j|`.
    Toeplitz,
    /// Dense inverse of the banded matrix with 1 on the diagonal, -1/3 on the
    /// first off-diagonals and -1/10 on the second, truncated back to
    /// bandwidth 2. Positive definiteness of the truncation is validated and
    /// failure is an error, not a silent repair.
    Pentadiagonal,
    /// Hub structure: `A[0][0] = p`, `A[i][i] = 2`, `A[0][i] = A[i][0] = sqrt(2)`.
    Star,
    /// Unit diagonal, 0.5 everywhere else.
    Equicorrelation,
    /// User-supplied symmetric base matrix.
    Custom(DMatrix<f64>),
}

impl ModelVariant {
    /// Stable tag used in seed derivation and serialized documents.
    pub fn tag(&self) -> u64 {
        match self {
            ModelVariant::Toeplitz => 1,
            ModelVariant::Pentadiagonal => 2,
            ModelVariant::Star => 3,
            ModelVariant::Equicorrelation => 4,
            ModelVariant::Custom(_) => 5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelVariant::Toeplitz => "toeplitz",
            ModelVariant::Pentadiagonal => "pentadiagonal",
            ModelVariant::Star => "star",
            ModelVariant::Equicorrelation => "equicorrelation",
            ModelVariant::Custom(_) => "custom",
        }
    }
}

/// Declarative description of a model: family, dimension, mean.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub variant: ModelVariant,
    pub p: usize,
    pub mu: DVector<f64>,
}

impl ModelSpec {
    /// Spec with zero mean.
    pub fn centered(variant: ModelVariant, p: usize) -> Self {
        ModelSpec {
            variant,
            p,
            mu: DVector::zeros(p),
        }
    }
}

/// Builds the base matrix `A` for a spec. The result is symmetric but not
/// yet normalized; feed it through [`normalize_precision`].
pub fn build_base_matrix(spec: &ModelSpec) -> Result<DMatrix<f64>> {
    let p = spec.p;
    if p == 0 {
        return Err(Error::InvalidInput("model dimension p must be >= 1".into()));
    }
    match &spec.variant {
        ModelVariant::Toeplitz => Ok(DMatrix::from_fn(p, p, |i, j| {
            0.6f64.powi((i as i32 - j as i32).abs())
        })),
        ModelVariant::Pentadiagonal => {
            let mut banded = DMatrix::zeros(p, p);
            for i in 0..p {
                banded[(i, i)] = 1.0;
                if i + 1 < p {
                    banded[(i, i + 1)] = -1.0 / 3.0;
                    banded[(i + 1, i)] = -1.0 / 3.0;
                }
                if i + 2 < p {
                    banded[(i, i + 2)] = -1.0 / 10.0;
                    banded[(i + 2, i)] = -1.0 / 10.0;
                }
            }
            let inv = banded.clone().try_inverse().ok_or_else(|| {
                Error::Numerical("pentadiagonal base matrix is singular".into())
            })?;
            let truncated = DMatrix::from_fn(p, p, |i, j| {
                if (i as i64 - j as i64).abs() <= 2 {
                    inv[(i, j)]
                } else {
                    0.0
                }
            });
            let min_eig = linalg::min_eigenvalue(&truncated);
            if min_eig <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "band-truncated inverse has min eigenvalue {min_eig:.3e} at p={p}"
                )));
            }
            Ok(truncated)
        }
        ModelVariant::Star => {
            let mut a = DMatrix::zeros(p, p);
            a[(0, 0)] = p as f64;
            for i in 1..p {
                a[(i, i)] = 2.0;
                a[(0, i)] = 2f64.sqrt();
                a[(i, 0)] = 2f64.sqrt();
            }
            if p == 1 {
                a[(0, 0)] = 1.0;
            }
            Ok(a)
        }
        ModelVariant::Equicorrelation => Ok(DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else {
                0.5
            }
        })),
        ModelVariant::Custom(a) => {
            if a.nrows() != p || a.ncols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "custom base matrix is {}x{}, spec says p={}",
                    a.nrows(),
                    a.ncols(),
                    p
                )));
            }
            let scale = a.amax().max(f64::MIN_POSITIVE);
            for i in 0..p {
                for j in 0..i {
                    if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::InvalidInput(
                            "custom base matrix must be symmetric".into(),
                        ));
                    }
                }
            }
            Ok(a.clone())
        }
    }
}

/// Rescales a symmetric positive definite matrix so its inverse has unit
/// diagonal: `omega = D^{1/2} A D^{1/2}` where `D[j] = (A^{-1})[j][j]`
/// (entrywise square root). Idempotent on already-normalized input.
pub fn normalize_precision(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "normalize_precision needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let sym = linalg::symmetrize(a);
    let chol = sym.clone().cholesky().ok_or_else(|| {
        Error::NotPositiveDefinite("normalize_precision requires positive definite input".into())
    })?;
    let inv = chol.inverse();
    let p = a.nrows();
    let mut d = DVector::zeros(p);
    for j in 0..p {
        let v = inv[(j, j)];
        if v <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "inverse diagonal entry {j} is {v:.3e}"
            )));
        }
        d[j] = v.sqrt();
    }
    Ok(DMatrix::from_fn(p, p, |i, j| d[i] * sym[(i, j)] * d[j]))
}

/// A fully derived ground-truth model.
///
/// Holds the normalized precision `omega` (inverse covariance with
/// `diag(omega^{-1}) = 1`), the covariance `sigma = omega^{-1}`, the
/// coefficient matrix `b = omega * diag(omega)^{-1}` (unit diagonal), the
/// diagonal `omega_diag`, the per-column noise scales
/// `phi[j] = omega[j][j]^{-1/2}`, the mean, and factorizations used by the
/// sampler (lower Cholesky factor and symmetric square root of sigma).
#[derive(Clone, Debug)]
pub struct PrecisionModel {
    pub p: usize,
    pub variant_name: String,
    pub variant_tag: u64,
    pub omega: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub omega_diag: DVector<f64>,
    pub phi: DVector<f64>,
    pub mu: DVector<f64>,
    pub chol_lower: DMatrix<f64>,
    pub sqrt_sigma: DMatrix<f64>,
}

impl PrecisionModel {
    /// Builds the model for a spec: base matrix, normalization, derivations.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.mu.len() != spec.p {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, expected p={}",
                spec.mu.len(),
                spec.p
            )));
        }
        let base = build_base_matrix(spec)?;
        let omega = normalize_precision(&base)?;
        Self::from_precision_named(
            omega,
            spec.mu.clone(),
            spec.variant.name().to_string(),
            spec.variant.tag(),
        )
    }

    /// Builds the model from an explicit normalized precision matrix.
    /// Rejects matrices whose inverse does not have unit diagonal (within
    /// 1e-8); use [`normalize_precision`] first for raw matrices.
    pub fn from_precision(omega: DMatrix<f64>, mu: DVector<f64>) -> Result<Self> {
        Self::from_precision_named(omega, mu, "custom".to_string(), 5)
    }

    fn from_precision_named(
        omega: DMatrix<f64>,
        mu: DVector<f64>,
        variant_name: String,
        variant_tag: u64,
    ) -> Result<Self> {
        let p = omega.nrows();
        if p == 0 || omega.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "precision matrix must be square and non-empty, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        if mu.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, expected {}",
                mu.len(),
                p
            )));
        }
        if !omega.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("precision matrix has non-finite entries".into()));
        }
        let sym = linalg::symmetrize(&omega);
        let chol_omega = sym.clone().cholesky().ok_or_else(|| {
            Error::NotPositiveDefinite("precision matrix must be positive definite".into())
        })?;
        let sigma = chol_omega.inverse();
        for j in 0..p {
            if (sigma[(j, j)] - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "precision matrix is not normalized: diag(omega^-1)[{j}] = {}; \
                     apply normalize_precision first",
                    sigma[(j, j)]
                )));
            }
        }
        let sigma = linalg::symmetrize(&sigma);
        let omega_diag = DVector::from_fn(p, |j, _| sym[(j, j)]);
        let mut b = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..p {
                b[(i, j)] = sym[(i, j)] / omega_diag[j];
            }
            b[(j, j)] = 1.0;
        }
        let phi = DVector::from_fn(p, |j, _| 1.0 / omega_diag[j].sqrt());
        let chol_lower = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("covariance is not positive definite".into()))?
            .l();
        let sqrt_sigma = linalg::sym_sqrt(&sigma)?;
        Ok(PrecisionModel {
            p,
            variant_name,
            variant_tag,
            omega: sym,
            sigma,
            b,
            omega_diag,
            phi,
            mu,
            chol_lower,
            sqrt_sigma,
        })
    }
}
