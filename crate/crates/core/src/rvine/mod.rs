//! R-vine models in matrix form: likelihood, simulation, estimation and
//! per-observation derivatives.

mod derivs;
mod eval;
mod fit;
mod matrix;
pub mod models;
mod spec;

use crate::data::SampleMatrix;
use crate::error::Result;
use crate::rng::{rng_from_seed, uniform};

pub use derivs::{score_and_hessian, ScoreHessian};
pub use eval::{VineEvaluator, LN_DENSITY_FLOOR};
pub use fit::{
    fit_mle, fit_mle_with, fit_pair, fit_sequential, fit_sequential_with, link_bounds, select_pair,
    select_sequential, FitMode, MleFit,
};
pub use matrix::{check_matrix, RVineMatrix, Violation};
pub use spec::{ModelJson, RVineSpec};

pub(crate) use eval::inverse;

/// Total and per-observation log-likelihood.
pub fn loglik(spec: &RVineSpec, data: &SampleMatrix) -> Result<(f64, Vec<f64>)> {
    let ev = VineEvaluator::new(spec, data)?;
    Ok((ev.total(), ev.per_obs().to_vec()))
}

/// Independent uniforms consumed by [`simulate`]: row-major draws from the seed's stream.
pub fn simulation_uniforms(n: usize, d: usize, seed: u64) -> SampleMatrix {
    let mut rng = rng_from_seed(seed);
    let m = nalgebra::DMatrix::from_row_iterator(n, d, (0..n * d).map(|_| uniform(&mut rng)));
    SampleMatrix::from_matrix_unchecked(m)
}

/// `n` draws from the model by inverse Rosenblatt transform of seeded uniforms.
pub fn simulate(spec: &RVineSpec, n: usize, seed: u64) -> Result<SampleMatrix> {
    let w = simulation_uniforms(n, spec.dim(), seed);
    Ok(SampleMatrix::from_matrix_unchecked(inverse(spec, &w)?))
}

#[cfg(test)]
mod tests;
