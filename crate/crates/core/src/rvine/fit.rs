//! Parameter estimation: sequential tree-by-tree fits and joint maximum likelihood.

use super::eval::{pair_args, run_step, Plan, VineEvaluator, Workspace};
use super::matrix::RVineMatrix;
use super::spec::RVineSpec;
use crate::data::SampleMatrix;
use crate::dependence::kendall_tau;
use crate::error::{Error, Result};
use crate::fd::step1;
use crate::optim::{minimize, BfgsOptions};
use crate::pair::{Family, PairCopula, Rotation};

/// How sequential estimation treats an empirical τ the family cannot reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    /// Reject with a domain error naming the edge.
    Strict,
    /// Move τ to the nearest attainable value.
    Lenient,
}

/// Result of joint maximum likelihood.
#[derive(Clone, Debug)]
pub struct MleFit {
    pub spec: RVineSpec,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Parameter box the optimizer works in, natural scale.
fn natural_box(family: Family) -> &'static [(f64, f64)] {
    match family {
        Family::Independence => &[],
        Family::Gauss => &[(-0.995, 0.995)],
        Family::StudentT => &[(-0.995, 0.995), (2.1, 29.5)],
        Family::Clayton => &[(1e-3, 50.0)],
        Family::Gumbel | Family::Joe => &[(1.0 + 1e-3, 50.0)],
        Family::Frank => &[(-50.0, 50.0)],
    }
}

fn to_link(family: Family, k: usize, x: f64) -> f64 {
    match (family, k) {
        (Family::Gauss | Family::StudentT, 0) => x.atanh(),
        (Family::StudentT, _) => {
            let q = (x - 2.0) / 28.0;
            (q / (1.0 - q)).ln()
        }
        (Family::Clayton, _) => x.ln(),
        (Family::Gumbel | Family::Joe, _) => (x - 1.0).ln(),
        _ => x,
    }
}

fn from_link(family: Family, k: usize, y: f64) -> f64 {
    match (family, k) {
        (Family::Gauss | Family::StudentT, 0) => y.tanh(),
        (Family::StudentT, _) => 2.0 + 28.0 / (1.0 + (-y).exp()),
        (Family::Clayton, _) => y.exp(),
        (Family::Gumbel | Family::Joe, _) => 1.0 + y.exp(),
        // θ = 0 is the independence limit, excluded from the Frank domain
        (Family::Frank, _) if y.abs() < 1e-10 => 1e-10_f64.copysign(y),
        _ => y,
    }
}

/// Optimizer bounds on the link scale for each parameter of `family`.
pub fn link_bounds(family: Family) -> Vec<(f64, f64)> {
    natural_box(family)
        .iter()
        .enumerate()
        .map(|(k, &(lo, hi))| (to_link(family, k, lo), to_link(family, k, hi)))
        .collect()
}

fn clamp_to_box(family: Family, k: usize, x: f64) -> f64 {
    let (lo, hi) = natural_box(family)[k];
    x.clamp(lo, hi)
}

/// Range of τ reachable inside the optimizer box.
fn tau_range(family: Family, rotation: Rotation) -> (f64, f64) {
    let (lo, hi) = natural_box(family)[0];
    let mut params = [lo, hi].map(|x| {
        let mut p = vec![x];
        if family == Family::StudentT {
            p.push(crate::pair::DEFAULT_NU);
        }
        PairCopula::new(family, rotation, &p).map_or(0.0, |pc| pc.tau())
    });
    params.sort_by(f64::total_cmp);
    (params[0], params[1])
}

/// Mean pair log density.
fn pair_mean_loglik(pc: &PairCopula, u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| pc.eval(a, b).0).sum::<f64>() / u.len() as f64
}

/// Maximum likelihood for a single pair, started from `start`.
fn pair_mle(start: &PairCopula, u: &[f64], v: &[f64]) -> Result<PairCopula> {
    let family = start.family();
    let p = start.nparams();
    if p == 0 {
        return Ok(*start);
    }
    let bounds = link_bounds(family);
    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let make = |y: &[f64]| -> Result<PairCopula> {
        let theta: Vec<f64> = y.iter().enumerate().map(|(k, &v)| from_link(family, k, v)).collect();
        start.with_params(&theta)
    };
    let f = |y: &[f64]| -> Result<f64> { Ok(-pair_mean_loglik(&make(y)?, u, v)) };
    let grad = |y: &[f64], _fy: f64| -> Result<Vec<f64>> {
        let mut g = vec![0.0; p];
        let mut yy = y.to_vec();
        for k in 0..p {
            let h = step1(y[k]);
            yy[k] = y[k] + h;
            let fp = f(&yy)?;
            yy[k] = y[k] - h;
            let fm = f(&yy)?;
            yy[k] = y[k];
            g[k] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    };
    let y0: Vec<f64> =
        start.params().iter().enumerate().map(|(k, &x)| to_link(family, k, clamp_to_box(family, k, x))).collect();
    let res = minimize(f, grad, &y0, &lo, &hi, BfgsOptions::default())?;
    let fitted = make(&res.x)?;
    if pair_mean_loglik(&fitted, u, v) >= pair_mean_loglik(start, u, v) {
        Ok(fitted)
    } else {
        Ok(*start)
    }
}

/// Estimate one pair's parameters from its pseudo-observations.
///
/// One-parameter families invert the empirical Kendall's τ; the Student-t
/// pair starts from the τ inversion and is refined by pair maximum likelihood.
pub fn fit_pair(pc: &PairCopula, u: &[f64], v: &[f64], mode: FitMode) -> Result<PairCopula> {
    let family = pc.family();
    if family == Family::Independence {
        return Ok(*pc);
    }
    let tau = kendall_tau(u, v);
    if !tau.is_finite() {
        return Err(Error::numerical("empirical Kendall's tau is undefined"));
    }
    let rotation = pc.rotation();
    let positive = match family {
        Family::Clayton | Family::Gumbel | Family::Joe => Some(matches!(rotation, Rotation::R0 | Rotation::R180)),
        _ => None,
    };
    if mode == FitMode::Strict {
        if let Some(pos) = positive {
            if (pos && tau <= 0.0) || (!pos && tau >= 0.0) {
                return Err(Error::domain(format!(
                    "empirical tau {tau:.4} is outside the range of {family}{}",
                    rotation_suffix(rotation)
                )));
            }
        }
    }
    let (tlo, thi) = tau_range(family, rotation);
    let tau = tau.clamp(tlo, thi);
    let mut theta = PairCopula::tau_to_param(family, rotation, tau)?;
    for (k, x) in theta.iter_mut().enumerate() {
        *x = clamp_to_box(family, k, *x);
    }
    let start = pc.with_params(&theta)?;
    if family == Family::StudentT {
        pair_mle(&start, u, v)
    } else {
        Ok(start)
    }
}

fn rotation_suffix(r: Rotation) -> String {
    if r == Rotation::R0 {
        String::new()
    } else {
        format!(" rotated {}", r.degrees())
    }
}

/// Tree-by-tree pass: `fit(r, c, current, z1, z2)` replaces the pair at `(r, c)`.
fn sequential<F>(matrix: &RVineMatrix, start: &RVineSpec, data: &SampleMatrix, mut fit: F) -> Result<RVineSpec>
where
    F: FnMut(usize, usize, &PairCopula, &[f64], &[f64]) -> Result<PairCopula>,
{
    super::eval::check_dims(start, data)?;
    let plan = Plan::new(matrix);
    let d = plan.d;
    let mut pairs = start.pairs().to_vec();
    let mut ws = Workspace::new(d, data.nrows());
    ws.load(&plan, data);
    for r in (1..d).rev() {
        if r + 1 < d {
            for (si, s) in plan.steps.iter().enumerate().filter(|(_, s)| s.r == r + 1) {
                run_step(&plan, si, &pairs[s.r * d + s.c], &mut ws)?;
            }
        }
        for (si, s) in plan.steps.iter().enumerate().filter(|(_, s)| s.r == r) {
            let (z1, z2) = pair_args(&plan, &ws, si);
            let cell = s.r * d + s.c;
            pairs[cell] = fit(s.r, s.c, &pairs[cell], &z1, &z2).map_err(|e| match e {
                Error::Domain(m) => {
                    Error::Domain(format!("tree {}, edge {}: {m}", matrix.tree_of(s.r), matrix.edge_label(s.r, s.c)))
                }
                other => other,
            })?;
        }
    }
    Ok(RVineSpec::from_fn(matrix.clone(), |r, c| pairs[r * d + c]))
}

/// Sequential estimation with strict τ handling.
pub fn fit_sequential(spec: &RVineSpec, data: &SampleMatrix) -> Result<RVineSpec> {
    fit_sequential_with(spec, data, FitMode::Strict)
}

/// Sequential estimation keeping structure, families and rotations of `spec`.
pub fn fit_sequential_with(spec: &RVineSpec, data: &SampleMatrix, mode: FitMode) -> Result<RVineSpec> {
    if spec.nparams() == 0 {
        super::eval::check_dims(spec, data)?;
        return Ok(spec.clone());
    }
    sequential(spec.matrix(), spec, data, |_, _, pc, u, v| fit_pair(pc, u, v, mode))
}

/// Family and rotation with the smallest AIC among `families`, each fitted by pair maximum likelihood.
pub fn select_pair(u: &[f64], v: &[f64], families: &[Family]) -> Result<PairCopula> {
    let tau = kendall_tau(u, v);
    let n = u.len() as f64;
    let mut best: Option<(f64, PairCopula)> = None;
    for &family in families {
        let rotations: &[Rotation] = match family {
            Family::Clayton | Family::Gumbel | Family::Joe if tau >= 0.0 => &[Rotation::R0, Rotation::R180],
            Family::Clayton | Family::Gumbel | Family::Joe => &[Rotation::R90, Rotation::R270],
            _ => &[Rotation::R0],
        };
        for &rotation in rotations {
            let start = if family == Family::Independence {
                PairCopula::independence()
            } else {
                let init: &[f64] = match family {
                    Family::StudentT => &[0.0, crate::pair::DEFAULT_NU],
                    Family::Gauss => &[0.0],
                    Family::Gumbel | Family::Joe => &[1.5],
                    _ => &[1.0],
                };
                let seed = PairCopula::new(family, rotation, init)?;
                pair_mle(&fit_pair(&seed, u, v, FitMode::Lenient)?, u, v)?
            };
            let aic = -2.0 * n * pair_mean_loglik(&start, u, v) + 2.0 * start.nparams() as f64;
            if best.as_ref().is_none_or(|(b, _)| aic < *b) {
                best = Some((aic, start));
            }
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::domain("no candidate families given"))
}

/// Sequential family selection and estimation on a fixed structure.
pub fn select_sequential(matrix: &RVineMatrix, data: &SampleMatrix, families: &[Family]) -> Result<RVineSpec> {
    let start = RVineSpec::independence(matrix.clone());
    sequential(matrix, &start, data, |_, _, _, u, v| select_pair(u, v, families))
}

/// Joint maximum likelihood from `start` with default optimizer settings.
pub fn fit_mle(start: &RVineSpec, data: &SampleMatrix) -> Result<MleFit> {
    fit_mle_with(start, data, BfgsOptions::default())
}

/// Joint maximum likelihood over all free parameters on the link scale.
///
/// The objective is the mean log-likelihood; `opts.gtol` applies to its gradient.
/// The start is returned when the optimizer cannot improve on it.
pub fn fit_mle_with(start: &RVineSpec, data: &SampleMatrix, opts: BfgsOptions) -> Result<MleFit> {
    let start_ll = VineEvaluator::new(start, data)?.total();
    let p = start.nparams();
    if p == 0 {
        return Ok(MleFit { spec: start.clone(), loglik: start_ll, iterations: 0, converged: true });
    }
    let n = data.nrows() as f64;
    let fams: Vec<(Family, usize)> =
        start.param_cells().iter().map(|&(r, c, k)| (start.pair(r, c).family(), k)).collect();
    let natural = |y: &[f64]| -> Vec<f64> { y.iter().zip(&fams).map(|(&v, &(f, k))| from_link(f, k, v)).collect() };
    let lo: Vec<f64> = fams.iter().map(|&(f, k)| link_bounds(f)[k].0).collect();
    let hi: Vec<f64> = fams.iter().map(|&(f, k)| link_bounds(f)[k].1).collect();
    let y0: Vec<f64> = start
        .params()
        .iter()
        .zip(&fams)
        .map(|(&x, &(f, k))| to_link(f, k, clamp_to_box(f, k, x)))
        .collect();
    let objective = |y: &[f64]| -> Result<f64> {
        let spec = start.with_params(&natural(y))?;
        Ok(-VineEvaluator::new(&spec, data)?.total() / n)
    };
    let grad = |y: &[f64], _fy: f64| -> Result<Vec<f64>> {
        let spec = start.with_params(&natural(y))?;
        let mut ev = VineEvaluator::new(&spec, data)?;
        let mut dp = vec![0.0; data.nrows()];
        let mut dm = vec![0.0; data.nrows()];
        let mut g = vec![0.0; p];
        for j in 0..p {
            let (f, k) = fams[j];
            let h = step1(y[j]);
            ev.delta(&[(j, from_link(f, k, y[j] + h))], &mut dp)?;
            ev.delta(&[(j, from_link(f, k, y[j] - h))], &mut dm)?;
            let diff: f64 = dp.iter().zip(&dm).map(|(a, b)| a - b).sum();
            g[j] = -diff / (2.0 * h * n);
        }
        Ok(g)
    };
    let res = minimize(objective, grad, &y0, &lo, &hi, opts)?;
    let spec = start.with_params(&natural(&res.x))?;
    let loglik = -res.f * n;
    if loglik >= start_ll {
        Ok(MleFit { spec, loglik, iterations: res.iterations, converged: res.converged })
    } else {
        Ok(MleFit { spec: start.clone(), loglik: start_ll, iterations: res.iterations, converged: res.converged })
    }
}
