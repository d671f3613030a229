//! Accelerated proximal gradient engine with smoothing continuation.
//!
//! Minimizes `F(x) = fid(x) + pen(x)` where `fid` is a sum of Euclidean
//! norms (nonsmooth) and `pen` is prox-friendly. Each norm `||v||` is
//! smoothed to `sqrt(||v||^2 + eps^2)`; eps follows a decreasing schedule,
//! and a final eps = 0 fixed-point pass restores exact sparsity through the
//! prox. The engine is deterministic: no randomness, and all decisions are
//! made on scale-free quantities.

/// A problem the engine can minimize. `x` is a flat variable vector whose
/// layout the problem defines.
pub trait ApgProblem {
    fn dim(&self) -> usize;
    /// Evaluates the fidelity at `x` with smoothing `eps`; returns
    /// `(smoothed value, raw value)` and, when `grad` is given, writes the
    /// gradient of the smoothed fidelity into it.
    fn fidelity(&mut self, x: &[f64], eps: f64, grad: Option<&mut [f64]>) -> (f64, f64);
    /// Penalty value at `x` (the raw nonsmooth penalty, constants included).
    fn penalty(&self, x: &[f64]) -> f64;
    /// Proximal map of `step * penalty` applied to `x` in place. Must keep
    /// any pinned coordinates (e.g. unit diagonal) intact.
    fn prox(&self, x: &mut [f64], step: f64);
}

pub struct ApgSettings {
    pub smoothing_schedule: Vec<f64>,
    /// Total inner-iteration budget across all smoothing stages.
    pub max_iterations: usize,
    /// Relative objective-change stopping rule per stage.
    pub tol_objective: f64,
    /// Fixed-point pass iteration cap.
    pub polish_iterations: usize,
}

pub struct ApgOutcome {
    pub x: Vec<f64>,
    /// Raw (unsmoothed) objective at `x`.
    pub objective: f64,
    /// Best raw objective seen after each iteration; nonincreasing.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Raw objective `fid_raw + pen`.
fn raw_objective<P: ApgProblem>(problem: &mut P, x: &[f64]) -> f64 {
    let (_, raw) = problem.fidelity(x, 0.0, None);
    raw + problem.penalty(x)
}

/// Stage stop: the incumbent must stall (relative change below tolerance)
/// for this many consecutive iterations.
const STALL_STREAK: usize = 3;

pub fn minimize<P: ApgProblem>(problem: &mut P, x0: Vec<f64>, settings: &ApgSettings) -> ApgOutcome {
    let dim = problem.dim();
    assert_eq!(x0.len(), dim);

    let mut best_x = x0;
    let mut best_f = raw_objective(problem, &best_x);
    let mut trace = vec![best_f];
    let mut iterations = 0usize;

    let mut step = 1.0f64;
    let mut grad = vec![0.0; dim];
    let mut cand = vec![0.0; dim];

    'stages: for &eps in &settings.smoothing_schedule {
        // each stage restarts from the incumbent best point
        let mut x = best_x.clone();
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut stage_prev = best_f;
        let mut stall = 0usize;
        let stage_cap = (settings.max_iterations / settings.smoothing_schedule.len()).max(200);

        for _ in 0..stage_cap {
            if iterations >= settings.max_iterations {
                break 'stages;
            }
            iterations += 1;

            let (fy, _) = problem.fidelity(&y, eps, Some(&mut grad));
            // backtracking line search on the smooth part
            loop {
                for i in 0..dim {
                    cand[i] = y[i] - step * grad[i];
                }
                problem.prox(&mut cand, step);
                let fid_cand = problem.fidelity(&cand, eps, None).0;
                let mut quad = fy;
                let mut sq = 0.0;
                for i in 0..dim {
                    let d = cand[i] - y[i];
                    quad += grad[i] * d;
                    sq += d * d;
                }
                quad += sq / (2.0 * step);
                if fid_cand <= quad + 1e-12 * quad.abs().max(1.0) || step < 1e-18 {
                    break;
                }
                step *= 0.5;
            }

            // momentum with gradient-mapping restart
            let mut restart_dot = 0.0;
            for i in 0..dim {
                restart_dot += (y[i] - cand[i]) * (cand[i] - x[i]);
            }
            let restart = restart_dot > 0.0;
            let t_next = if restart {
                1.0
            } else {
                0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
            };
            let beta = if restart { 0.0 } else { (t - 1.0) / t_next };
            for i in 0..dim {
                let xi = cand[i];
                y[i] = xi + beta * (xi - x[i]);
                x[i] = xi;
            }
            t = t_next;
            step *= 1.25;

            let f = raw_objective(problem, &x);
            if f < best_f {
                best_f = f;
                best_x.copy_from_slice(&x);
            }
            trace.push(best_f);

            let rel = (stage_prev - best_f) / best_f.abs().max(1.0);
            if rel < settings.tol_objective {
                stall += 1;
                if stall >= STALL_STREAK {
                    break;
                }
            } else {
                stall = 0;
            }
            stage_prev = best_f;
        }
    }

    // eps = 0 fixed-point pass: monotone proximal steps restore the exact
    // sparsity pattern the smoothed stages only approach
    let mut x = best_x.clone();
    let mut polish_step = step.clamp(1e-12, 1.0);
    'polish: for _ in 0..settings.polish_iterations {
        problem.fidelity(&x, 0.0, Some(&mut grad));
        loop {
            if polish_step < 1e-18 {
                break 'polish;
            }
            for i in 0..dim {
                cand[i] = x[i] - polish_step * grad[i];
            }
            problem.prox(&mut cand, polish_step);
            let f = raw_objective(problem, &cand);
            if f <= best_f {
                let mut moved = 0.0;
                let mut scale = 0.0;
                for i in 0..dim {
                    let d = cand[i] - x[i];
                    moved += d * d;
                    scale += x[i] * x[i];
                }
                x.copy_from_slice(&cand);
                best_f = f;
                trace.push(best_f);
                polish_step *= 1.25;
                if moved.sqrt() <= 1e-13 * scale.sqrt().max(1.0) {
                    break 'polish;
                }
                break;
            }
            polish_step *= 0.5;
        }
    }
    best_x = x;

    ApgOutcome {
        x: best_x,
        objective: best_f,
        trace,
        iterations,
    }
}
