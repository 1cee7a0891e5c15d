//! Box-constrained BFGS with backtracking line search.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient infinity norm falls below this.
    pub gtol: f64,
    /// Stop when the relative objective change falls below this.
    pub ftol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iter: 500, gtol: 1e-5, ftol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Zero the gradient components that push against an active bound.
fn projected(g: &DVector<f64>, x: &[f64], lo: &[f64], hi: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        g.len(),
        (0..g.len()).map(|i| {
            if (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0) {
                0.0
            } else {
                g[i]
            }
        }),
    )
}

/// Minimize `f` over the box `[lo, hi]` starting from `x0`.
///
/// Objective failures during the line search count as `+inf`.
pub fn minimize<F, G>(
    mut f: F,
    mut grad: G,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: BfgsOptions,
) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    let p = x0.len();
    let clamp = |x: &mut [f64]| {
        for i in 0..p {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut fx = f(&x)?;
    let mut g = DVector::from_vec(grad(&x, fx)?);
    let mut hinv = DMatrix::<f64>::identity(p, p);
    let mut first = true;
    for it in 0..opts.max_iter {
        let pg = projected(&g, &x, lo, hi);
        if pg.amax() < opts.gtol {
            return Ok(BfgsResult { x, f: fx, iterations: it, converged: true });
        }
        let mut dir = -(&hinv * &pg);
        for i in 0..p {
            if pg[i] == 0.0 {
                dir[i] = 0.0;
            }
        }
        if dir.dot(&pg) >= 0.0 {
            hinv = DMatrix::identity(p, p);
            dir = -pg.clone();
        }
        // keep the first trial step of moderate length on the link scale
        let norm = dir.amax();
        let mut alpha = if norm > 1.0 { 1.0 / norm } else { 1.0 };
        let slope = dir.dot(&pg);
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = (0..p).map(|i| x[i] + alpha * dir[i]).collect();
            clamp(&mut xn);
            let fxn = f(&xn).unwrap_or(f64::INFINITY);
            if fxn.is_finite() && fxn <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fxn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            // no descent possible along the quasi-Newton or gradient direction
            return Ok(BfgsResult { x, f: fx, iterations: it, converged: pg.amax() < 1e3 * opts.gtol });
        };
        let gn = DVector::from_vec(grad(&xn, fxn)?);
        let s = DVector::from_iterator(p, (0..p).map(|i| xn[i] - x[i]));
        let y = &gn - &g;
        let rel = (fx - fxn).abs() / fx.abs().max(1.0);
        x = xn;
        fx = fxn;
        g = gn;
        if rel < opts.ftol {
            return Ok(BfgsResult { x, f: fx, iterations: it + 1, converged: true });
        }
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first {
                hinv *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (rho * rho * yhy + rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
    }
    Ok(BfgsResult { x, f: fx, iterations: opts.max_iter, converged: false })
}
