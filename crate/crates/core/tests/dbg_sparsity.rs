// temp probe
#[test]
fn dbg_sparsity() {
    use nalgebra::DMatrix;
    use rand_distr::{Distribution, StandardNormal};
    use robust_precision::seed::rng_from;
    use robust_precision::solver::*;
    let mut rng = rng_from(23);
    let xn = DMatrix::from_fn(15, 3, |_, _| {let v: f64 = StandardNormal.sample(&mut rng); v}) / (15f64).sqrt();
    let lmax = lambda_max_moderate(&xn, false).unwrap();
    let fit = solve_moderate(&xn, &SolverConfig::moderate(lmax * 0.5)).unwrap();
    let tr = &fit.objective_trace;
    println!("iterations={} trace_len={}", fit.iterations, tr.len());
    println!("head: {:?}", &tr[..12.min(tr.len())]);
    println!("tail: {:?}", &tr[tr.len().saturating_sub(8)..]);
    // where does it plateau?
    let mut marks = vec![];
    for (k, w) in tr.windows(2).enumerate() {
        if (w[0] - w[1]) / w[0].abs().max(1.0) < 1e-9 {
            marks.push(k);
            if marks.len() > 6 { break; }
        }
    }
    println!("first plateau steps at trace indices: {:?}", marks);
}
