//! Synthetic data generation: clean Gaussian samples and row contamination.
//!
//! Determinism contract: given a model, sizes, and seeds, every byte of the
//! generated data is reproducible. Standard-normal variates come from a
//! ChaCha8 stream in a documented order (row-major for the inlier matrix;
//! positions first, then payload rows in increasing row order for the
//! contamination), and index sampling is a partial Fisher-Yates implemented
//! here so the sequence does not depend on RNG-crate internals.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::PrecisionModel;
use crate::seed::rng_from;

/// How selected rows are corrupted.
#[derive(Clone, Debug, PartialEq)]
pub enum ContaminationScheme {
    /// The observed row is replaced by iid standard normal entries;
    /// the corruption row is the difference to the clean row.
    ReplaceStandardNormal,
    /// A corruption row is added to the clean row. The row is drawn as a
    /// uniformly random direction in the whitened geometry, scaled so the
    /// whitened norm is exactly `m_e * sqrt(p)`.
    AdditiveBoundedRows { m_e: f64 },
}

impl ContaminationScheme {
    pub fn name(&self) -> &'static str {
        match self {
            ContaminationScheme::ReplaceStandardNormal => "replace",
            ContaminationScheme::AdditiveBoundedRows { .. } => "additive",
        }
    }
}

/// Contamination parameters: fraction, scheme, seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ContaminationSpec {
    /// Fraction of rows to corrupt, in `[0, 1)`. The count is
    /// `round(epsilon * n)` with ties rounding up.
    pub epsilon: f64,
    pub scheme: ContaminationScheme,
    pub seed: u64,
}

/// A generated dataset together with its ground truth.
#[derive(Clone, Debug)]
pub struct ContaminatedDataset {
    /// Observed rows `x = y + e_star`.
    pub x: DMatrix<f64>,
    /// Clean Gaussian rows.
    pub y: DMatrix<f64>,
    /// Corruption matrix; zero outside the outlier rows.
    pub e_star: DMatrix<f64>,
    /// Sorted outlier row indices.
    pub outliers: Vec<usize>,
    /// `e_star * b / sqrt(n)`: the row-sparse target of the convex program.
    pub theta_star: DMatrix<f64>,
    /// `(y - 1 mu^T) * b / sqrt(n)`: the effective noise field.
    pub xi: DMatrix<f64>,
    pub epsilon: f64,
    pub scheme: ContaminationScheme,
    pub seed_inliers: u64,
    pub seed_contamination: u64,
}

impl ContaminatedDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Uniform integer in `[0, bound)` by rejection on the top 64-bit word.
/// Implemented here so generated index sets never depend on RNG-crate
/// sampling internals.
fn uniform_below(rng: &mut impl Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}

/// Simple random sample of `k` distinct indices from `0..n` (partial
/// Fisher-Yates), returned sorted.
pub fn sample_indices(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + uniform_below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// Draws `n` clean rows `y_i ~ N(mu, sigma)` as `z_i^T L^T + mu^T` with `L`
/// the lower Cholesky factor of sigma; `z` is filled row-major from the
/// seeded stream.
pub fn sample_inliers(model: &PrecisionModel, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample_inliers needs n >= 1".into()));
    }
    let p = model.p;
    let mut rng = rng_from(seed);
    let mut z: DMatrix<f64> = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let mut y: DMatrix<f64> = &z * model.chol_lower.transpose();
    for i in 0..n {
        for j in 0..p {
            y[(i, j)] += model.mu[j];
        }
    }
    Ok(y)
}

/// Applies row contamination to clean data. Outlier positions are a simple
/// random sample without replacement; payload rows are then generated in
/// increasing row order from the same stream.
pub fn contaminate(
    y: &DMatrix<f64>,
    model: &PrecisionModel,
    spec: &ContaminationSpec,
) -> Result<ContaminatedDataset> {
    let n = y.nrows();
    let p = y.ncols();
    if p != model.p {
        return Err(Error::DimensionMismatch(format!(
            "data has p={p}, model has p={}",
            model.p
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty data".into()));
    }
    if !(0.0..1.0).contains(&spec.epsilon) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be in [0, 1), got {}",
            spec.epsilon
        )));
    }
    if let ContaminationScheme::AdditiveBoundedRows { m_e } = spec.scheme {
        if !(m_e.is_finite() && m_e > 0.0) {
            return Err(Error::InvalidInput(format!(
                "additive scheme needs m_e > 0, got {m_e}"
            )));
        }
    }
    let n_out = (spec.epsilon * n as f64).round() as usize;
    let mut rng = rng_from(spec.seed);
    let outliers = sample_indices(&mut rng, n, n_out);

    let mut x = y.clone();
    let mut e_star: DMatrix<f64> = DMatrix::zeros(n, p);
    for &i in &outliers {
        match spec.scheme {
            ContaminationScheme::ReplaceStandardNormal => {
                for j in 0..p {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    x[(i, j)] = g;
                    e_star[(i, j)] = g - y[(i, j)];
                }
            }
            ContaminationScheme::AdditiveBoundedRows { m_e } => {
                let mut g: DVector<f64> = DVector::zeros(p);
                loop {
                    for j in 0..p {
                        g[j] = StandardNormal.sample(&mut rng);
                    }
                    if g.norm() > 1e-12 {
                        break;
                    }
                }
                let w: DVector<f64> = &g * (m_e * (p as f64).sqrt() / g.norm());
                let e: DVector<f64> = &model.sqrt_sigma * w;
                for j in 0..p {
                    e_star[(i, j)] = e[j];
                    x[(i, j)] = y[(i, j)] + e[j];
                }
            }
        }
    }

    let scale = 1.0 / (n as f64).sqrt();
    let theta_star: DMatrix<f64> = (&e_star * &model.b) * scale;
    let mut centered = y.clone();
    for i in 0..n {
        for j in 0..p {
            centered[(i, j)] -= model.mu[j];
        }
    }
    let xi: DMatrix<f64> = (&centered * &model.b) * scale;

    Ok(ContaminatedDataset {
        x,
        y: y.clone(),
        e_star,
        outliers,
        theta_star,
        xi,
        epsilon: spec.epsilon,
        scheme: spec.scheme.clone(),
        seed_inliers: 0,
        seed_contamination: spec.seed,
    })
}

/// Convenience wrapper: sample inliers, then contaminate. Records both seeds.
pub fn generate_dataset(
    model: &PrecisionModel,
    n: usize,
    seed_inliers: u64,
    spec: &ContaminationSpec,
) -> Result<ContaminatedDataset> {
    let y = sample_inliers(model, n, seed_inliers)?;
    let mut ds = contaminate(&y, model, spec)?;
    ds.seed_inliers = seed_inliers;
    Ok(ds)
}

/// The scaled design `x / sqrt(n)` the solver operates on.
pub fn scaled_design(x: &DMatrix<f64>) -> DMatrix<f64> {
    x / (x.nrows() as f64).sqrt()
}

/// Unit vector `(1, ..., 1)/sqrt(n)`.
pub fn u_n(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, ModelVariant};
    use approx::assert_relative_eq;

    fn toeplitz(p: usize) -> PrecisionModel {
        PrecisionModel::from_spec(&ModelSpec::centered(ModelVariant::Toeplitz, p)).unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let m = toeplitz(3);
        let spec = ContaminationSpec {
            epsilon: 0.2,
            scheme: ContaminationScheme::ReplaceStandardNormal,
            seed: 42,
        };
        let a = generate_dataset(&m, 25, 7, &spec).unwrap();
        let b = generate_dataset(&m, 25, 7, &spec).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.outliers, b.outliers);
        assert_eq!(a.e_star, b.e_star);
    }

    #[test]
    fn epsilon_zero_keeps_data_clean() {
        let m = toeplitz(3);
        let spec = ContaminationSpec {
            epsilon: 0.0,
            scheme: ContaminationScheme::ReplaceStandardNormal,
            seed: 1,
        };
        let ds = generate_dataset(&m, 10, 3, &spec).unwrap();
        assert!(ds.outliers.is_empty());
        assert_eq!(ds.x, ds.y);
        assert_eq!(ds.e_star.amax(), 0.0);
    }

    #[test]
    fn outlier_count_rounds_half_up() {
        let m = toeplitz(2);
        let spec = ContaminationSpec {
            epsilon: 0.25,
            scheme: ContaminationScheme::ReplaceStandardNormal,
            seed: 5,
        };
        // 0.25 * 10 = 2.5 -> 3
        let ds = generate_dataset(&m, 10, 1, &spec).unwrap();
        assert_eq!(ds.outliers.len(), 3);
        let sorted = {
            let mut s = ds.outliers.clone();
            s.sort_unstable();
            s
        };
        assert_eq!(ds.outliers, sorted);
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        let m = toeplitz(2);
        let y = sample_inliers(&m, 5, 1).unwrap();
        for eps in [1.0, -0.1, f64::NAN] {
            let spec = ContaminationSpec {
                epsilon: eps,
                scheme: ContaminationScheme::ReplaceStandardNormal,
                seed: 1,
            };
            assert!(contaminate(&y, &m, &spec).is_err());
        }
    }

    #[test]
    fn empirical_covariance_matches_model() {
        let m = toeplitz(3);
        let n = 20_000;
        let y = sample_inliers(&m, n, 99).unwrap();
        let mean = y.row_mean();
        let mut cov: DMatrix<f64> = DMatrix::zeros(3, 3);
        for i in 0..n {
            let d = y.row(i) - &mean;
            cov += d.transpose() * d;
        }
        cov /= n as f64;
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (cov[(i, j)] - m.sigma[(i, j)]).abs() < 0.05,
                    "cov[{i}{j}]={} sigma={}",
                    cov[(i, j)],
                    m.sigma[(i, j)]
                );
            }
        }
        for j in 0..3 {
            assert!(mean[j].abs() < 0.05);
        }
    }

    #[test]
    fn additive_rows_have_exact_whitened_norm() {
        let m = toeplitz(4);
        let m_e = 2.5;
        let spec = ContaminationSpec {
            epsilon: 0.3,
            scheme: ContaminationScheme::AdditiveBoundedRows { m_e },
            seed: 11,
        };
        let ds = generate_dataset(&m, 40, 2, &spec).unwrap();
        let white = crate::linalg::sym_pinv(&m.sqrt_sigma);
        let target = m_e * 2.0; // m_e * sqrt(p)
        for &i in &ds.outliers {
            let e = ds.e_star.row(i).transpose();
            let w = &white * e;
            assert_relative_eq!(w.norm(), target, epsilon = 1e-8);
        }
        // non-outlier rows untouched
        for i in 0..40 {
            if !ds.outliers.contains(&i) {
                assert_eq!(ds.e_star.row(i).amax(), 0.0);
            }
        }
    }

    #[test]
    fn theta_star_and_xi_identities() {
        let m = toeplitz(3);
        let spec = ContaminationSpec {
            epsilon: 0.2,
            scheme: ContaminationScheme::ReplaceStandardNormal,
            seed: 8,
        };
        let ds = generate_dataset(&m, 30, 4, &spec).unwrap();
        // theta_star rows are nonzero exactly on outliers (generic data)
        for i in 0..30 {
            let nz = ds.theta_star.row(i).amax() > 0.0;
            assert_eq!(nz, ds.outliers.contains(&i));
        }
        // x^(n) b = theta_star + xi + u c with c = b^T mu = 0 here
        let xn = scaled_design(&ds.x);
        let lhs = &xn * &m.b;
        let rhs = &ds.theta_star + &ds.xi;
        assert!((lhs - rhs).amax() < 1e-12);
    }

    // With identity covariance, replacement outliers have the same marginal
    // law as inliers: a one-sample normality statistic stays below the 1%
    // critical value.
    #[test]
    fn replacement_indistinguishable_under_identity() {
        let ident = PrecisionModel::from_precision(DMatrix::identity(3, 3), DVector::zeros(3))
            .unwrap();
        let spec = ContaminationSpec {
            epsilon: 0.5,
            scheme: ContaminationScheme::ReplaceStandardNormal,
            seed: 3,
        };
        let ds = generate_dataset(&ident, 400, 21, &spec).unwrap();
        let mut entries: Vec<f64> = Vec::new();
        for &i in &ds.outliers {
            for j in 0..3 {
                entries.push(ds.x[(i, j)]);
            }
        }
        entries.sort_by(f64::total_cmp);
        // one-sample Kolmogorov-Smirnov against N(0,1)
        fn phi(z: f64) -> f64 {
            // Abramowitz-Stegun 7.1.26 erf approximation, |err| < 1.5e-7
            let x = z / std::f64::consts::SQRT_2;
            let t = 1.0 / (1.0 + 0.3275911 * x.abs());
            let poly = t
                * (0.254829592
                    + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
            let erf = 1.0 - poly * (-x * x).exp();
            let erf = if x >= 0.0 { erf } else { -erf };
            0.5 * (1.0 + erf)
        }
        let m = entries.len() as f64;
        let mut d = 0.0f64;
        for (k, &v) in entries.iter().enumerate() {
            let cdf = phi(v);
            d = d.max((cdf - k as f64 / m).abs());
            d = d.max(((k + 1) as f64 / m - cdf).abs());
        }
        // 1% critical value is ~1.63/sqrt(m)
        assert!(d * m.sqrt() < 1.63, "KS statistic {d} too large");
    }

    #[test]
    fn scaled_design_and_u() {
        let x = DMatrix::from_row_slice(4, 1, &[2.0, 2.0, 2.0, 2.0]);
        let xn = scaled_design(&x);
        assert_relative_eq!(xn[(0, 0)], 1.0);
        let u = u_n(4);
        assert_relative_eq!(u.norm(), 1.0);
        assert_relative_eq!(u[0], 0.5);
    }
}
