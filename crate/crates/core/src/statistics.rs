//! Univariate and empirical-copula test statistics.

use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::rvine::{simulate, RVineSpec};
use crate::special::order_free_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UniKind {
    AD,
    CvM,
    KS,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniTestStat {
    pub kind: UniKind,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EcpKind {
    Cvm,
    Ks,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EcpStat {
    pub kind: EcpKind,
    pub value: f64,
}

/// `(1/(n+1)) #{t : u_t <= point componentwise}`.
pub fn empirical_copula(sample: &SampleMatrix, point: &[f64]) -> f64 {
    let (n, d) = (sample.nrows(), sample.ncols());
    let cols: Vec<&[f64]> = (0..d).map(|j| sample.column(j)).collect();
    let count = (0..n).filter(|&t| (0..d).all(|j| cols[j][t] <= point[j])).count();
    count as f64 / (n + 1) as f64
}

/// Empirical copula of `sample` at every row of `at`.
fn empirical_copula_at(sample: &SampleMatrix, at: &SampleMatrix) -> Vec<f64> {
    let d = sample.ncols();
    let n = sample.nrows();
    let cols: Vec<&[f64]> = (0..d).map(|j| sample.column(j)).collect();
    let pts: Vec<&[f64]> = (0..d).map(|j| at.column(j)).collect();
    (0..at.nrows())
        .map(|s| {
            let point: Vec<f64> = (0..d).map(|j| pts[j][s]).collect();
            let count = (0..n).filter(|&t| (0..d).all(|j| cols[j][t] <= point[j])).count();
            count as f64 / (n + 1) as f64
        })
        .collect()
}

/// Univariate goodness-of-fit statistic of `z_t = null_cdf(s_t)` against U(0,1).
///
/// KS compares with `F_n(y) = (1/(n+1)) #{z_t <= y}` including the gap left of 1;
/// CvM and AD use the usual sorted-sample closed forms.
pub fn uni_stat(kind: UniKind, s: &[f64], null_cdf: impl Fn(f64) -> f64) -> Result<UniTestStat> {
    if s.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let mut z: Vec<f64> = s.iter().map(|&x| null_cdf(x)).collect();
    if z.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("null cdf returned NaN"));
    }
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let nf = n as f64;
    let value = match kind {
        UniKind::KS => {
            let m = nf + 1.0;
            let mut dmax = 1.0 - nf / m;
            for (i, &x) in z.iter().enumerate() {
                let i = i as f64;
                dmax = dmax.max(((i + 1.0) / m - x).abs()).max((x - i / m).abs());
            }
            dmax
        }
        UniKind::CvM => {
            1.0 / (12.0 * nf) + z.iter().enumerate().map(|(i, &x)| (x - (2.0 * i as f64 + 1.0) / (2.0 * nf)).powi(2)).sum::<f64>()
        }
        UniKind::AD => {
            if let Some(x) = z.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
                return Err(Error::domain(format!("Anderson-Darling needs values in (0,1), got {x}")));
            }
            let sum: f64 = (0..n)
                .map(|i| (2.0 * i as f64 + 1.0) * (z[i].ln() + (-z[n - 1 - i]).ln_1p()))
                .sum();
            -nf - sum / nf
        }
    };
    Ok(UniTestStat { kind, value: value.max(0.0) })
}

fn ecp_reduce(kind: EcpKind, diffs: impl Iterator<Item = f64>) -> f64 {
    match kind {
        EcpKind::Cvm => order_free_sum(diffs.map(|x| x * x)),
        EcpKind::Ks => diffs.map(f64::abs).fold(0.0, f64::max),
    }
}

/// Distance between the empirical copula of `data` and that of a reference
/// sample, both evaluated at the data points.
pub fn ecp_distance(kind: EcpKind, data: &SampleMatrix, reference: &SampleMatrix) -> Result<EcpStat> {
    if data.ncols() != reference.ncols() {
        return Err(Error::Format("reference sample dimension differs from the data".into()));
    }
    let cn = empirical_copula_at(data, data);
    let cr = empirical_copula_at(reference, data);
    Ok(EcpStat { kind, value: ecp_reduce(kind, cn.iter().zip(&cr).map(|(a, b)| a - b)) })
}

/// ECP statistic: the fitted copula is replaced by the empirical copula of
/// `approx_n` draws from `fitted`.
pub fn ecp_stat(kind: EcpKind, data: &SampleMatrix, fitted: &RVineSpec, approx_n: usize, seed: u64) -> Result<EcpStat> {
    let reference = simulate(fitted, approx_n, seed)?;
    ecp_distance(kind, data, &reference)
}

/// ECP2 statistic: distance between the empirical copula of the PIT sample and
/// the independence copula at the PIT points.
pub fn ecp2_stat(kind: EcpKind, y: &SampleMatrix) -> EcpStat {
    let cn = empirical_copula_at(y, y);
    let d = y.ncols();
    let prod = (0..y.nrows()).map(|t| (0..d).map(|j| y.get(t, j)).product::<f64>());
    EcpStat { kind, value: ecp_reduce(kind, cn.iter().zip(prod).map(|(a, b)| a - b)) }
}

/// `min(1, m * min(p))`.
pub fn hybrid_pvalue(pvals: &[f64]) -> Result<f64> {
    if pvals.is_empty() {
        return Err(Error::domain("hybrid p-value needs at least one p-value"));
    }
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(format!("p-value {p} outside [0,1]")));
    }
    let min = pvals.iter().copied().fold(1.0, f64::min);
    Ok((pvals.len() as f64 * min).min(1.0))
}
