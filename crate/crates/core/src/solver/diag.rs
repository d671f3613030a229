//! Diagnostics tied to the theory: the penalty-domination statistic and the
//! dimension-reduction cone check. Both need ground truth, so they only make
//! sense on synthetic data.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::sampling::ContaminatedDataset;
use crate::solver::{FitRaw, ProjectorCache};

/// The quantity the penalty must dominate: the maximum row norm of the
/// column-normalized projected noise,
/// `max_i sqrt(sum_j (Z^j e_j)_i^2 / ||Z^j e_j||^2)`.
/// Projectors are built without an intercept (the centered-model setting the
/// bound is stated in). Invariant to rescaling noise columns.
pub fn lambda_condition_statistic(xn: &DMatrix<f64>, noise: &DMatrix<f64>) -> Result<f64> {
    let (n, p) = (xn.nrows(), xn.ncols());
    let cache = ProjectorCache::build(xn, false)?;
    let mut row_sq = vec![0.0f64; n];
    for j in 0..p.min(noise.ncols()) {
        let w = cache.project_out(j, &noise.column(j).into_owned());
        let norm = w.norm();
        if norm > 0.0 {
            for i in 0..n {
                let v = w[i] / norm;
                row_sq[i] += v * v;
            }
        }
    }
    Ok(row_sq.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt())
}

/// Both sides of the dimension-reduction cone inequality for the estimation
/// error `Theta_hat - Theta_star`.
#[derive(Clone, Copy, Debug)]
pub struct ConeDiagnostic {
    /// Mass off the true outlier rows.
    pub lhs: f64,
    /// Twice the mass on the true outlier rows.
    pub rhs: f64,
    pub in_cone: bool,
}

/// Checks whether the fit error lies in the cone where mass off the true
/// outlier rows is at most twice the mass on them.
pub fn cone_diagnostic(fit: &FitRaw, dataset: &ContaminatedDataset) -> ConeDiagnostic {
    let delta = &fit.theta_hat - &dataset.theta_star;
    let mut on = 0.0;
    let mut off = 0.0;
    let mut iter = dataset.outliers.iter().peekable();
    for i in 0..delta.nrows() {
        let norm = delta.row(i).norm();
        if iter.peek() == Some(&&i) {
            on += norm;
            iter.next();
        } else {
            off += norm;
        }
    }
    let rhs = 2.0 * on;
    ConeDiagnostic {
        lhs: off,
        rhs,
        in_cone: off <= rhs + 1e-12,
    }
}
