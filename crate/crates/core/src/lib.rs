//! Robust estimation of Gaussian precision matrices from row-contaminated
//! samples.
//!
//! A fraction of the observation rows may be arbitrarily corrupted. The
//! estimator solves a convex square-root program that is jointly sparse in a
//! row-outlier matrix and (in the high-dimensional mode) entrywise sparse in
//! the column-scaled precision factor, then reads off the precision matrix,
//! the corruption rows, and the mean. See the crate README for the CLI.

pub mod error;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
pub use model::{ModelSpec, ModelVariant, PrecisionModel};
pub use sampling::{
    generate_dataset, ContaminatedDataset, ContaminationScheme, ContaminationSpec,
};
pub use seed::{mix_seed, rng_from, RNG_ID};
pub use solver::{
    solve_highdim, solve_moderate, FitRaw, Mode, SolveStatus, SolverConfig,
};
