//! Per-observation scores and Hessians by central finite differences.

use nalgebra::DMatrix;

use super::eval::VineEvaluator;
use super::spec::RVineSpec;
use crate::data::SampleMatrix;
use crate::error::Result;
use crate::fd::{step1, step2};

/// Row `t` of `scores` is the gradient of `ln c(u_t; theta)`; `hessians[t]` its Hessian.
#[derive(Clone, Debug)]
pub struct ScoreHessian {
    pub scores: DMatrix<f64>,
    pub hessians: Vec<DMatrix<f64>>,
}

impl ScoreHessian {
    pub fn nobs(&self) -> usize {
        self.scores.nrows()
    }

    pub fn nparams(&self) -> usize {
        self.scores.ncols()
    }
}

/// Scores and Hessians of the per-observation log-likelihood at the model parameters.
pub fn score_and_hessian(spec: &RVineSpec, data: &SampleMatrix) -> Result<ScoreHessian> {
    let theta = spec.params();
    let p = theta.len();
    let mut ev = VineEvaluator::new(spec, data)?;
    let n = ev.nobs();
    let mut scores = DMatrix::zeros(n, p);
    let mut hessians = vec![DMatrix::zeros(p, p); n];
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..p {
        let h = step1(theta[j]);
        ev.delta(&[(j, theta[j] + h)], &mut fp)?;
        ev.delta(&[(j, theta[j] - h)], &mut fm)?;
        for t in 0..n {
            scores[(t, j)] = (fp[t] - fm[t]) / (2.0 * h);
        }
        let h = step2(theta[j]);
        ev.delta(&[(j, theta[j] + h)], &mut fp)?;
        ev.delta(&[(j, theta[j] - h)], &mut fm)?;
        for t in 0..n {
            hessians[t][(j, j)] = (fp[t] + fm[t]) / (h * h);
        }
    }
    let mut fpp = vec![0.0; n];
    let mut fpm = vec![0.0; n];
    for j in 0..p {
        for k in 0..j {
            let (hj, hk) = (step2(theta[j]), step2(theta[k]));
            ev.delta(&[(j, theta[j] + hj), (k, theta[k] + hk)], &mut fpp)?;
            ev.delta(&[(j, theta[j] + hj), (k, theta[k] - hk)], &mut fpm)?;
            ev.delta(&[(j, theta[j] - hj), (k, theta[k] + hk)], &mut fp)?;
            ev.delta(&[(j, theta[j] - hj), (k, theta[k] - hk)], &mut fm)?;
            let scale = 4.0 * hj * hk;
            for t in 0..n {
                let v = (fpp[t] - fpm[t] - fp[t] + fm[t]) / scale;
                hessians[t][(j, k)] = v;
                hessians[t][(k, j)] = v;
            }
        }
    }
    Ok(ScoreHessian { scores, hessians })
}
