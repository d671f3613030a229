//! The two convex programs as flat-vector problems for the APG engine.
//!
//! Both use the smoothed square-root fidelity `sqrt(||v||^2 + eps^2)` per
//! residual column. At eps = 0 a zero residual column contributes a zero
//! (sub)gradient, which is an admissible subgradient choice.

use nalgebra::{DMatrix, DMatrixView, DVector};

use super::apg::ApgProblem;
use super::projectors::ProjectorCache;

/// min over Theta of `sum_j ||Z^j(x_j - theta_j)|| + lambda sum_i ||Theta_i||`.
/// Variable layout: vec(Theta) column-major, length n*p.
pub struct ModerateProblem<'a> {
    pub cache: &'a ProjectorCache,
    /// Precomputed `Z^j x_j` columns.
    pub zx: Vec<DVector<f64>>,
    pub lambda: f64,
    pub n: usize,
    pub p: usize,
}

impl ApgProblem for ModerateProblem<'_> {
    fn dim(&self) -> usize {
        self.n * self.p
    }

    fn fidelity(&mut self, x: &[f64], eps: f64, grad: Option<&mut [f64]>) -> (f64, f64) {
        let (n, p) = (self.n, self.p);
        let mut smoothed = 0.0;
        let mut raw = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        for j in 0..p {
            let theta_j = DVector::from_column_slice(&x[j * n..(j + 1) * n]);
            let v = &self.zx[j] - self.cache.project_out(j, &theta_j);
            let norm = v.norm();
            let f = (norm * norm + eps * eps).sqrt();
            smoothed += f;
            raw += norm;
            if let Some(g) = grad.as_deref_mut() {
                if f > 0.0 {
                    for i in 0..n {
                        g[j * n + i] = -v[i] / f;
                    }
                }
            }
        }
        (smoothed, raw)
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        let (n, p) = (self.n, self.p);
        let mut total = 0.0;
        for i in 0..n {
            let mut sq = 0.0;
            for j in 0..p {
                let v = x[j * n + i];
                sq += v * v;
            }
            total += sq.sqrt();
        }
        self.lambda * total
    }

    fn prox(&self, x: &mut [f64], step: f64) {
        group_soft_threshold_rows(x, 0, self.n, self.p, step * self.lambda);
    }
}

/// min over (B with unit diagonal, c, Theta) of
/// `sum_j ||Xn B_j - u c_j - theta_j|| + lambda ||Theta||_{2,1}
///  + lambda gamma ||offdiag B||_1`.
/// Variable layout: [vec(B) p*p | c p | vec(Theta) n*p], column-major blocks.
/// Diagonal entries of B are pinned: gradient zeroed, prox never touches
/// them, so values stay exactly as initialized (1).
pub struct HighDimProblem {
    pub xn: DMatrix<f64>,
    pub xn_t: DMatrix<f64>,
    pub u: DVector<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub fit_intercept: bool,
    /// Adds the constant `lambda * gamma * p` for the pinned unit diagonal.
    pub penalize_diagonal: bool,
    pub n: usize,
    pub p: usize,
}

impl HighDimProblem {
    pub fn theta_offset(&self) -> usize {
        self.p * self.p + self.p
    }
    pub fn c_offset(&self) -> usize {
        self.p * self.p
    }

    fn residual(&self, x: &[f64]) -> DMatrix<f64> {
        let (n, p) = (self.n, self.p);
        let b = DMatrixView::from_slice(&x[..p * p], p, p);
        let mut r = &self.xn * b;
        let c = &x[self.c_offset()..self.c_offset() + p];
        let theta = &x[self.theta_offset()..];
        for j in 0..p {
            for i in 0..n {
                r[(i, j)] -= theta[j * n + i];
                if self.fit_intercept {
                    r[(i, j)] -= self.u[i] * c[j];
                }
            }
        }
        r
    }
}

impl ApgProblem for HighDimProblem {
    fn dim(&self) -> usize {
        self.p * self.p + self.p + self.n * self.p
    }

    fn fidelity(&mut self, x: &[f64], eps: f64, grad: Option<&mut [f64]>) -> (f64, f64) {
        let (n, p) = (self.n, self.p);
        let mut r = self.residual(x);
        let mut smoothed = 0.0;
        let mut raw = 0.0;
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            let norm = r.column(j).norm();
            let f = (norm * norm + eps * eps).sqrt();
            smoothed += f;
            raw += norm;
            scales.push(if f > 0.0 { 1.0 / f } else { 0.0 });
        }
        if let Some(g) = grad {
            // w = r with columns scaled to unit (smoothed) norm
            for j in 0..p {
                let s = scales[j];
                for i in 0..n {
                    r[(i, j)] *= s;
                }
            }
            let gb = &self.xn_t * &r;
            let to = self.theta_offset();
            let co = self.c_offset();
            for j in 0..p {
                for k in 0..p {
                    g[j * p + k] = if k == j { 0.0 } else { gb[(k, j)] };
                }
                g[co + j] = if self.fit_intercept {
                    -self.u.dot(&r.column(j))
                } else {
                    0.0
                };
                for i in 0..n {
                    g[to + j * n + i] = -r[(i, j)];
                }
            }
        }
        (smoothed, raw)
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        let (n, p) = (self.n, self.p);
        let mut rows = 0.0;
        let theta = &x[self.theta_offset()..];
        for i in 0..n {
            let mut sq = 0.0;
            for j in 0..p {
                let v = theta[j * n + i];
                sq += v * v;
            }
            rows += sq.sqrt();
        }
        let mut b_l1 = 0.0;
        for j in 0..p {
            for k in 0..p {
                if k != j {
                    b_l1 += x[j * p + k].abs();
                }
            }
        }
        if self.penalize_diagonal {
            b_l1 += p as f64; // |B_jj| = 1 pinned
        }
        self.lambda * (rows + self.gamma * b_l1)
    }

    fn prox(&self, x: &mut [f64], step: f64) {
        let (n, p) = (self.n, self.p);
        let t = step * self.lambda * self.gamma;
        if t > 0.0 {
            for j in 0..p {
                for k in 0..p {
                    if k != j {
                        let v = x[j * p + k];
                        x[j * p + k] = v.signum() * (v.abs() - t).max(0.0);
                    }
                }
            }
        }
        let to = self.theta_offset();
        group_soft_threshold_rows(x, to, n, p, step * self.lambda);
    }
}

/// Row-group soft threshold on an n x p column-major block at `offset`.
fn group_soft_threshold_rows(x: &mut [f64], offset: usize, n: usize, p: usize, t: f64) {
    for i in 0..n {
        let mut sq = 0.0;
        for j in 0..p {
            let v = x[offset + j * n + i];
            sq += v * v;
        }
        let norm = sq.sqrt();
        let scale = if norm > t { 1.0 - t / norm } else { 0.0 };
        for j in 0..p {
            x[offset + j * n + i] *= scale;
        }
    }
}
