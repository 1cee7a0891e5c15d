//! Central finite differences for scores and Hessians.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Step for first derivatives: `cbrt(eps) * max(1, |x|)`.
#[inline]
pub fn step1(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Step for second derivatives: `eps^(1/4) * max(1, |x|)`.
#[inline]
pub fn step2(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

/// Gradient and Hessian of a scalar function by central differences.
///
/// The mixed partials use the symmetric four-point stencil, so the Hessian is
/// symmetric by construction.
pub fn score_hessian<F>(theta: &[f64], f: F) -> Result<(DVector<f64>, DMatrix<f64>)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let p = theta.len();
    let mut x = theta.to_vec();
    let f0 = f(&x)?;
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);
    for j in 0..p {
        let h = step1(theta[j]);
        x[j] = theta[j] + h;
        let fp = f(&x)?;
        x[j] = theta[j] - h;
        let fm = f(&x)?;
        grad[j] = (fp - fm) / (2.0 * h);

        let h = step2(theta[j]);
        x[j] = theta[j] + h;
        let fp = f(&x)?;
        x[j] = theta[j] - h;
        let fm = f(&x)?;
        x[j] = theta[j];
        hess[(j, j)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for j in 0..p {
        for k in 0..j {
            let (hj, hk) = (step2(theta[j]), step2(theta[k]));
            let mut g = |sj: f64, sk: f64| {
                x[j] = theta[j] + sj * hj;
                x[k] = theta[k] + sk * hk;
                let r = f(&x);
                x[j] = theta[j];
                x[k] = theta[k];
                r
            };
            let v = (g(1.0, 1.0)? - g(1.0, -1.0)? - g(-1.0, 1.0)? + g(-1.0, -1.0)?) / (4.0 * hj * hk);
            hess[(j, k)] = v;
            hess[(k, j)] = v;
        }
    }
    Ok((grad, hess))
}
