//! Parametric bootstrap p-values, the size and power study and Monte Carlo KLIC.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::gof::{statistics, GofOptions, TestId};
use crate::rng::derive_seed;
use crate::rvine::{fit_mle, fit_sequential_with, loglik, simulate, FitMode, ModelJson, RVineSpec};
use crate::special::order_free_sum;

/// Share of replications that must succeed.
pub const MIN_SUCCESS_RATE: f64 = 0.95;

/// Machine-readable result of one test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
}

/// Estimate the parameters of `spec_h0`'s structure and families on `data`:
/// sequential start followed by joint maximum likelihood.
pub fn fit_model(spec_h0: &RVineSpec, data: &SampleMatrix) -> Result<RVineSpec> {
    let start = fit_sequential_with(spec_h0, data, FitMode::Lenient)?;
    Ok(fit_mle(&start, data)?.spec)
}

/// Tail frequency `#{t_r >= t_obs} / B`, floored at `1/B`.
pub fn tail_pvalue(t_obs: f64, reference: &[f64]) -> f64 {
    let b = reference.len() as f64;
    let hits = reference.iter().filter(|&&t| t >= t_obs).count() as f64;
    (hits / b).max(1.0 / b)
}

fn run_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Study(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Fit and evaluate all `tests` on one replication drawn from `model`.
fn replicate(
    tests: &[TestId],
    model: &RVineSpec,
    fit_under: &RVineSpec,
    n: usize,
    seed: u64,
    tag: &str,
    r: usize,
) -> Vec<Option<f64>> {
    let run = || -> Result<Vec<Option<f64>>> {
        let data = simulate(model, n, derive_seed(seed, tag, r as u64))?;
        let fitted = fit_model(fit_under, &data)?;
        let stat_seed = derive_seed(seed, &format!("{tag}/ecp"), r as u64);
        Ok(statistics(tests, &fitted, &data, stat_seed, GofOptions::default()).into_iter().map(|x| x.ok()).collect())
    };
    run().unwrap_or_else(|_| vec![None; tests.len()])
}

fn successes(values: &[Option<f64>], b: usize, what: &str) -> Result<Vec<f64>> {
    let ok: Vec<f64> = values.iter().flatten().copied().filter(|x| x.is_finite()).collect();
    if (ok.len() as f64) < MIN_SUCCESS_RATE * b as f64 {
        return Err(Error::Study(format!("{what}: only {} of {b} replications succeeded", ok.len())));
    }
    Ok(ok)
}

/// Bootstrap p-values of several tests sharing the refitted replications.
pub fn bootstrap_pvalues(
    tests: &[TestId],
    spec_h0: &RVineSpec,
    data: &SampleMatrix,
    b: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<TestReport>> {
    if b < 2 {
        return Err(Error::Study("at least two bootstrap replications are required".into()));
    }
    let fitted = fit_model(spec_h0, data)?;
    let observed = statistics(tests, &fitted, data, derive_seed(seed, "observed/ecp", 0), GofOptions::default());
    let n = data.nrows();
    let reps: Vec<Vec<Option<f64>>> = run_pool(workers, || {
        (0..b).into_par_iter().map(|r| replicate(tests, &fitted, &fitted, n, seed, "bootstrap", r)).collect()
    })?;
    let mut reports = Vec::with_capacity(tests.len());
    for (k, (&test, obs)) in tests.iter().zip(observed).enumerate() {
        let t_obs = obs?;
        let column: Vec<Option<f64>> = reps.iter().map(|row| row[k]).collect();
        let reference = successes(&column, b, &test.name())?;
        reports.push(TestReport {
            test: test.name(),
            statistic: t_obs,
            p_value: tail_pvalue(t_obs, &reference),
            b,
            seed,
            n,
            d: data.ncols(),
        });
    }
    Ok(reports)
}

/// Bootstrap p-value of one test.
pub fn bootstrap_pvalue(test: TestId, spec_h0: &RVineSpec, data: &SampleMatrix, b: usize, seed: u64) -> Result<TestReport> {
    Ok(bootstrap_pvalues(&[test], spec_h0, data, b, seed, None)?.remove(0))
}

/// Study configuration, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfigJson {
    pub true_model: ModelJson,
    pub alternatives: Vec<ModelJson>,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tests: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub true_model: RVineSpec,
    pub alternatives: Vec<RVineSpec>,
    pub n: usize,
    pub b: usize,
    pub alpha: f64,
    pub master_seed: u64,
    pub tests: Vec<TestId>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 2 {
            return Err(Error::Study("B must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Study(format!("alpha = {} is not inside (0,1)", self.alpha)));
        }
        if self.n == 0 || self.tests.is_empty() {
            return Err(Error::Study("n and the test list must be nonempty".into()));
        }
        for (i, spec) in std::iter::once(&self.true_model).chain(&self.alternatives).enumerate() {
            if let Some(v) = spec.validate().first() {
                return Err(Error::InvalidModel(format!("model {i}: {v}")));
            }
            if spec.dim() != self.true_model.dim() {
                return Err(Error::InvalidModel(format!("model {i} has a different dimension")));
            }
        }
        Ok(())
    }

    pub fn from_json(j: &StudyConfigJson) -> Result<Self> {
        let tests = j.tests.iter().map(|s| s.parse()).collect::<Result<Vec<TestId>>>()?;
        let cfg = StudyConfig {
            true_model: RVineSpec::from_json(&j.true_model)?,
            alternatives: j.alternatives.iter().map(RVineSpec::from_json).collect::<Result<_>>()?,
            n: j.n,
            b: j.b,
            alpha: j.alpha,
            master_seed: j.seed,
            tests,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> StudyConfigJson {
        StudyConfigJson {
            true_model: self.true_model.to_json(),
            alternatives: self.alternatives.iter().map(RVineSpec::to_json).collect(),
            n: self.n,
            b: self.b,
            alpha: self.alpha,
            seed: self.master_seed,
            tests: self.tests.iter().map(|t| t.name()).collect(),
        }
    }
}

/// Size (model `M1`) or power (alternatives) of one test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub estimate: f64,
    pub p_values: Vec<f64>,
}

/// Keyed by test name, then model name (`M1`, `M2_1`, `M2_2`, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub alpha: f64,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub results: BTreeMap<String, BTreeMap<String, ModelOutcome>>,
}

/// Rejection frequency `#{p <= alpha} / len`.
pub fn rejection_rate(p_values: &[f64], alpha: f64) -> f64 {
    if p_values.is_empty() {
        return f64::NAN;
    }
    p_values.iter().filter(|&&p| p <= alpha).count() as f64 / p_values.len() as f64
}

/// Size and power study with a shared reference sample.
///
/// Replication `r` draws a sample from `M1` and one from every alternative,
/// fits `M1`'s structure to each and evaluates the statistics. The p-value of
/// every statistic is its tail frequency within the `M1` replications.
pub fn size_power_study(config: &StudyConfig, workers: Option<usize>) -> Result<StudyResult> {
    config.validate()?;
    let tests = &config.tests;
    let (n, b, seed) = (config.n, config.b, config.master_seed);
    let models: Vec<(String, &RVineSpec)> = std::iter::once(("M1".to_string(), &config.true_model))
        .chain(config.alternatives.iter().enumerate().map(|(i, s)| (format!("M2_{}", i + 1), s)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..models.len()).flat_map(|m| (0..b).map(move |r| (m, r))).collect();
    let values: Vec<Vec<Option<f64>>> = run_pool(workers, || {
        jobs.par_iter()
            .map(|&(m, r)| replicate(tests, models[m].1, &config.true_model, n, seed, &models[m].0, r))
            .collect()
    })?;
    let mut results = BTreeMap::new();
    for (k, test) in tests.iter().enumerate() {
        let reference_col: Vec<Option<f64>> = values[..b].iter().map(|row| row[k]).collect();
        let reference = successes(&reference_col, b, &test.name())?;
        let mut per_model = BTreeMap::new();
        for (m, (name, _)) in models.iter().enumerate() {
            let col: Vec<Option<f64>> = values[m * b..(m + 1) * b].iter().map(|row| row[k]).collect();
            let stats = successes(&col, b, &format!("{} on {name}", test.name()))?;
            let p_values: Vec<f64> = stats.iter().map(|&t| tail_pvalue(t, &reference)).collect();
            per_model.insert(name.clone(), ModelOutcome { estimate: rejection_rate(&p_values, config.alpha), p_values });
        }
        results.insert(test.name(), per_model);
    }
    Ok(StudyResult { alpha: config.alpha, n, b, seed, results })
}

/// Monte Carlo estimate of the Kullback-Leibler distance from `true_spec` to `alt_spec`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlicEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
}

pub fn klic_mc(true_spec: &RVineSpec, alt_spec: &RVineSpec, draws: usize, seed: u64) -> Result<KlicEstimate> {
    if true_spec.dim() != alt_spec.dim() {
        return Err(Error::InvalidModel("models differ in dimension".into()));
    }
    if draws < 2 {
        return Err(Error::domain("KLIC needs at least two draws"));
    }
    let u = simulate(true_spec, draws, seed)?;
    let (_, l0) = loglik(true_spec, &u)?;
    let (_, l1) = loglik(alt_spec, &u)?;
    let diff: Vec<f64> = l0.iter().zip(&l1).map(|(a, b)| a - b).collect();
    let nf = draws as f64;
    let mean = order_free_sum(diff.iter().copied()) / nf;
    let var = order_free_sum(diff.iter().map(|x| (x - mean).powi(2))) / (nf - 1.0);
    Ok(KlicEstimate { estimate: mean, std_error: (var / nf).sqrt(), draws })
}
