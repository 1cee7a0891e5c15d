//! Information matrix equality tests: White's test and the information ratio.

use nalgebra::{DMatrix, DVector};

use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::rvine::{score_and_hessian, RVineSpec, ScoreHessian};
use crate::special::{chi2_sf, order_free_sum};

/// Largest accepted condition number of the mean Hessian.
pub const MAX_CONDITION: f64 = 1e12;
/// Ridge added to the White covariance estimate before inversion.
pub const WHITE_RIDGE: f64 = 1e-8;

/// Sample information matrices at fitted parameters.
#[derive(Clone, Debug)]
pub struct InfoMatrices {
    pub h_bar: DMatrix<f64>,
    pub c_bar: DMatrix<f64>,
    /// Row `t` is `vech(H_t + s_t s_t^T)`.
    pub per_obs_d: DMatrix<f64>,
    pub scores: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct IrResult {
    pub ir: f64,
    pub psi_bar: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct WhiteResult {
    pub t_n: f64,
    pub dof: usize,
    pub d_bar: DVector<f64>,
    pub v_hat: DMatrix<f64>,
}

/// Chi-squared reference p-value of White's statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticPValue {
    pub p_value: f64,
    /// Always set: the chi-squared limit is approached slowly.
    pub warning: &'static str,
}

/// Half-vectorization, lower triangle column by column.
pub fn vech(m: &DMatrix<f64>) -> DVector<f64> {
    let p = m.nrows();
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for j in 0..p {
        for i in j..p {
            out.push(m[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

fn mean_of(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    order_free_sum((0..n).map(f)) / n as f64
}

fn from_score_hessian(sh: &ScoreHessian) -> Result<InfoMatrices> {
    let (n, p) = (sh.nobs(), sh.nparams());
    if p == 0 {
        return Err(Error::domain("information matrices need at least one parameter"));
    }
    let s = &sh.scores;
    let h_bar = DMatrix::from_fn(p, p, |i, j| mean_of(n, |t| sh.hessians[t][(i, j)]));
    let mut c_bar = DMatrix::from_fn(p, p, |i, j| mean_of(n, |t| s[(t, i)] * s[(t, j)]));
    let eig = c_bar.clone().symmetric_eigen();
    if eig.eigenvalues.min() < 0.0 {
        let clipped = eig.eigenvalues.map(|x| x.max(0.0));
        c_bar = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        c_bar = (&c_bar + c_bar.transpose()) * 0.5;
    }
    let q = p * (p + 1) / 2;
    let mut per_obs_d = DMatrix::zeros(n, q);
    for t in 0..n {
        let mut k = 0;
        for j in 0..p {
            for i in j..p {
                per_obs_d[(t, k)] = sh.hessians[t][(i, j)] + s[(t, i)] * s[(t, j)];
                k += 1;
            }
        }
    }
    Ok(InfoMatrices { h_bar, c_bar, per_obs_d, scores: sh.scores.clone() })
}

/// Mean Hessian, mean score outer product and per-observation `vech(H_t + C_t)`.
pub fn info_matrices(spec_fitted: &RVineSpec, data: &SampleMatrix) -> Result<InfoMatrices> {
    from_score_hessian(&score_and_hessian(spec_fitted, data)?)
}

impl InfoMatrices {
    pub fn nparams(&self) -> usize {
        self.h_bar.nrows()
    }

    pub fn nobs(&self) -> usize {
        self.per_obs_d.nrows()
    }

    /// Column means of `per_obs_d`.
    pub fn d_bar(&self) -> DVector<f64> {
        let n = self.nobs();
        DVector::from_fn(self.per_obs_d.ncols(), |k, _| mean_of(n, |t| self.per_obs_d[(t, k)]))
    }

    /// Assemble from given mean matrices; `per_obs_d` and `scores` stay empty.
    pub fn from_means(h_bar: DMatrix<f64>, c_bar: DMatrix<f64>) -> Self {
        let p = h_bar.nrows();
        InfoMatrices { h_bar, c_bar, per_obs_d: DMatrix::zeros(0, p * (p + 1) / 2), scores: DMatrix::zeros(0, p) }
    }
}

/// Inverse of `H_bar` after the condition-number guard.
fn checked_inverse(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = h.clone().symmetric_eigen();
    let abs = eig.eigenvalues.map(f64::abs);
    let (lo, hi) = (abs.min(), abs.max());
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::SingularMatrix(format!(
            "mean Hessian is near singular (condition number {:.3e})",
            hi / lo
        )));
    }
    h.clone().lu().try_inverse().ok_or_else(|| Error::SingularMatrix("mean Hessian is not invertible".into()))
}

/// `IR_n = tr(-H_bar^-1 C_bar) / p`.
pub fn ir_statistic(im: &InfoMatrices) -> Result<IrResult> {
    let hinv = checked_inverse(&im.h_bar)?;
    let psi_bar = -(hinv * &im.c_bar);
    let ir = psi_bar.trace() / im.nparams() as f64;
    Ok(IrResult { ir, psi_bar })
}

/// Step of the outer difference quotient for the Jacobian of `d_bar`.
fn outer_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.2) * x.abs().max(1.0)
}

/// White's statistic `T_n = n d_bar^T V^-1 d_bar`.
///
/// The Jacobian of `d_bar` with respect to the parameters is taken by central
/// differences, re-evaluating the information matrices at shifted parameters.
pub fn white_statistic(im: &InfoMatrices, spec_fitted: &RVineSpec, data: &SampleMatrix) -> Result<WhiteResult> {
    let (n, p) = (im.nobs(), im.nparams());
    let q = p * (p + 1) / 2;
    let d_bar = im.d_bar();
    let hinv = checked_inverse(&im.h_bar)?;
    let theta = spec_fitted.params();
    let mut grad_d = DMatrix::zeros(q, p);
    for k in 0..p {
        let h = outer_step(theta[k]);
        let mut tp = theta.clone();
        tp[k] += h;
        let mut tm = theta.clone();
        tm[k] -= h;
        let shifted = |t: &[f64]| -> Result<DVector<f64>> {
            let spec = spec_fitted.with_params(t).map_err(|e| {
                Error::numerical(format!("parameter {k} too close to its boundary for differencing: {e}"))
            })?;
            Ok(info_matrices(&spec, data)?.d_bar())
        };
        let col = (shifted(&tp)? - shifted(&tm)?) / (2.0 * h);
        grad_d.set_column(k, &col);
    }
    let a = grad_d * hinv;
    let mut e = DMatrix::zeros(n, q);
    for t in 0..n {
        let s = im.scores.row(t).transpose();
        let et = im.per_obs_d.row(t).transpose() - &a * s;
        e.set_row(t, &et.transpose());
    }
    let mut v_hat = DMatrix::from_fn(q, q, |i, j| mean_of(n, |t| e[(t, i)] * e[(t, j)]));
    for i in 0..q {
        v_hat[(i, i)] += WHITE_RIDGE;
    }
    let chol = v_hat
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularMatrix("White covariance estimate is not positive definite".into()))?;
    let x = chol.solve(&d_bar);
    let t_n = (n as f64 * d_bar.dot(&x)).max(0.0);
    Ok(WhiteResult { t_n, dof: q, d_bar, v_hat })
}

/// Upper chi-squared tail with `p(p+1)/2` degrees of freedom.
pub fn white_asymptotic_pvalue(w: &WhiteResult) -> AsymptoticPValue {
    AsymptoticPValue {
        p_value: chi2_sf(w.t_n, w.dof as f64),
        warning: "asymptotic chi-squared p-value; unreliable at small n",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::{Family, PairCopula, Rotation};
    use crate::rng::{rng_from_seed, uniform};
    use crate::rvine::{fit_mle, simulate, RVineMatrix};

    fn bivariate(pc: PairCopula) -> RVineSpec {
        RVineSpec::from_fn(RVineMatrix::from_lower(&[&[2], &[1, 1]]).unwrap(), |_, _| pc)
    }

    fn random_spd(p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let a = DMatrix::from_fn(p, p, |_, _| uniform(&mut rng) - 0.5);
        &a * a.transpose() + DMatrix::identity(p, p) * 0.1
    }

    #[test]
    fn ir_examples() {
        let im = InfoMatrices::from_means(DMatrix::from_element(1, 1, -4.0), DMatrix::from_element(1, 1, 2.0));
        assert!((ir_statistic(&im).unwrap().ir - 0.5).abs() < 1e-15);
        for seed in 0..5 {
            let c = random_spd(4, seed);
            let im = InfoMatrices::from_means(-c.clone(), c);
            assert!((ir_statistic(&im).unwrap().ir - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ir_trace_two_ways() {
        let h = -random_spd(5, 11);
        let c = random_spd(5, 12);
        let ir = ir_statistic(&InfoMatrices::from_means(h.clone(), c.clone())).unwrap().ir;
        // eigen route: -H = L L^T, tr(-H^-1 C) = tr(L^-1 C L^-T)
        let l = (-h).cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let m = &li * c * li.transpose();
        let ev = m.symmetric_eigen().eigenvalues.sum() / 5.0;
        assert!((ir - ev).abs() < 1e-8);
    }

    #[test]
    fn singular_hessian_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, -1.0, -1.0]);
        let im = InfoMatrices::from_means(h, DMatrix::identity(2, 2));
        assert!(matches!(ir_statistic(&im), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn asymptotic_pvalue_examples() {
        let w = |t_n| WhiteResult { t_n, dof: 1, d_bar: DVector::zeros(1), v_hat: DMatrix::identity(1, 1) };
        assert_eq!(white_asymptotic_pvalue(&w(0.0)).p_value, 1.0);
        assert!((white_asymptotic_pvalue(&w(3.841_458_820_694_124)).p_value - 0.05).abs() < 1e-9);
        assert!(white_asymptotic_pvalue(&w(1e4)).p_value < 1e-100);
    }

    #[test]
    fn vech_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(vech(&m).as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn white_on_clayton_and_row_order() {
        let truth = bivariate(PairCopula::new(Family::Clayton, Rotation::R0, &[2.0]).unwrap());
        let data = simulate(&truth, 400, 3).unwrap();
        let fit = fit_mle(&truth, &data).unwrap().spec;
        let im = info_matrices(&fit, &data).unwrap();
        assert_eq!(im.h_bar, im.h_bar.transpose());
        let w = white_statistic(&im, &fit, &data).unwrap();
        assert!(w.t_n >= 0.0 && w.dof == 1);
        let rev: Vec<usize> = (0..400).rev().collect();
        let data_r = data.select_rows(&rev);
        let im_r = info_matrices(&fit, &data_r).unwrap();
        let w_r = white_statistic(&im_r, &fit, &data_r).unwrap();
        assert_eq!(w.t_n, w_r.t_n);
        let ir = ir_statistic(&im).unwrap();
        assert!((ir.ir - 1.0).abs() < 0.3, "{}", ir.ir);
    }

    #[test]
    fn zero_d_bar_gives_zero_statistic() {
        let truth = bivariate(PairCopula::new(Family::Gauss, Rotation::R0, &[0.3]).unwrap());
        let data = simulate(&truth, 100, 4).unwrap();
        let mut im = info_matrices(&truth, &data).unwrap();
        im.per_obs_d.fill(0.0);
        assert_eq!(white_statistic(&im, &truth, &data).unwrap().t_n, 0.0);
    }
}
