use super::models::*;
use super::*;
use crate::pair::{Family, PairCopula, Rotation};
use crate::rng::{rng_from_seed, uniform};

fn bivariate(pc: PairCopula) -> RVineSpec {
    let m = RVineMatrix::from_lower(&[&[2], &[1, 1]]).unwrap();
    RVineSpec::from_fn(m, |_, _| pc)
}

fn random_sample(n: usize, d: usize, seed: u64) -> SampleMatrix {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| uniform(&mut rng)).collect()).collect();
    SampleMatrix::from_rows(&rows).unwrap()
}

fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).amax()
}

#[test]
fn independence_loglik_is_zero() {
    let spec = RVineSpec::independence(rvine_5d_matrix());
    let data = random_sample(20, 5, 1);
    let (total, per_obs) = loglik(&spec, &data).unwrap();
    assert_eq!(total, 0.0);
    assert!(per_obs.iter().all(|&x| x == 0.0));
}

#[test]
fn bivariate_gauss_at_center() {
    let rho = 0.898;
    let spec = bivariate(PairCopula::new(Family::Gauss, Rotation::R0, &[rho]).unwrap());
    let data = SampleMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
    let (total, _) = loglik(&spec, &data).unwrap();
    let oracle = -0.5 * (1.0 - rho * rho).ln();
    assert!((total - oracle).abs() < 1e-12);
    assert!((total - 2.273f64.ln()).abs() < 1e-3);
}

#[test]
fn bivariate_pit_is_hfunc() {
    let pc = PairCopula::new(Family::Gauss, Rotation::R0, &[0.6]).unwrap();
    let spec = bivariate(pc);
    let data = random_sample(50, 2, 2);
    let y = VineEvaluator::new(&spec, &data).unwrap().pit();
    // the diagonal variable 2 is conditioned on variable 1
    for t in 0..50 {
        assert_eq!(y[(t, 0)], data.get(t, 0));
        let h = pc.hfunc(data.get(t, 1), data.get(t, 0)).unwrap();
        assert!((y[(t, 1)] - h).abs() < 1e-12);
    }
}

#[test]
fn independence_simulation_returns_raw_uniforms() {
    let spec = RVineSpec::independence(rvine_5d_matrix());
    let x = simulate(&spec, 4, 11).unwrap();
    let w = simulation_uniforms(4, 5, 11);
    assert_eq!(x.as_matrix(), w.as_matrix());
}

#[test]
fn simulate_pit_roundtrip() {
    let models = [
        bivariate(PairCopula::new(Family::Clayton, Rotation::R90, &[3.0]).unwrap()),
        true_model_5d(),
        true_model_8d(),
    ];
    for spec in &models {
        let d = spec.dim();
        let x = simulate(spec, 300, 5).unwrap();
        let w = simulation_uniforms(300, d, 5);
        let y = VineEvaluator::new(spec, &x).unwrap().pit();
        let err = max_abs_diff(&y, w.as_matrix());
        assert!(err < 1e-8, "d={d}: {err}");
    }
}

#[test]
fn simulation_is_deterministic() {
    let spec = true_model_5d();
    let a = simulate(&spec, 50, 9).unwrap();
    let b = simulate(&spec, 50, 9).unwrap();
    assert_eq!(a.as_matrix(), b.as_matrix());
    let c = simulate(&spec, 50, 10).unwrap();
    assert_ne!(a.as_matrix(), c.as_matrix());
}

#[test]
fn both_matrices_of_the_same_vine_agree() {
    let spec = true_model_5d();
    let alt = spec_from_edges(rvine_5d_matrix_alt(), &EDGES_5D, |i| LABEL_MAP_5D[i - 1]).unwrap();
    let data = random_sample(40, 5, 3);
    let (a, pa) = loglik(&spec, &data).unwrap();
    let (b, pb) = loglik(&alt, &data).unwrap();
    assert!((a - b).abs() < 1e-9);
    for (x, y) in pa.iter().zip(&pb) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn row_permutation_keeps_total() {
    let spec = true_model_5d();
    let data = simulate(&spec, 64, 4).unwrap();
    let idx: Vec<usize> = (0..64).rev().collect();
    let perm = data.select_rows(&idx);
    let (a, _) = loglik(&spec, &data).unwrap();
    let (b, _) = loglik(&spec, &perm).unwrap();
    assert_eq!(a, b);
}

#[test]
fn delta_matches_full_evaluation() {
    let spec = true_model_8d();
    let data = simulate(&spec, 30, 8).unwrap();
    let mut ev = VineEvaluator::new(&spec, &data).unwrap();
    let base = ev.per_obs().to_vec();
    let theta = spec.params();
    let mut out = vec![0.0; 30];
    for j in [0, 5, 13, 27] {
        let mut th = theta.clone();
        th[j] *= 1.01;
        ev.delta(&[(j, th[j])], &mut out).unwrap();
        let (_, full) = loglik(&spec.with_params(&th).unwrap(), &data).unwrap();
        for t in 0..30 {
            assert!((base[t] + out[t] - full[t]).abs() < 1e-10, "param {j}, obs {t}");
        }
    }
    // two parameters at once, then the workspace must be restored
    let mut th = theta.clone();
    th[2] *= 0.97;
    th[20] *= 1.03;
    ev.delta(&[(2, th[2]), (20, th[20])], &mut out).unwrap();
    let (_, full) = loglik(&spec.with_params(&th).unwrap(), &data).unwrap();
    for t in 0..30 {
        assert!((base[t] + out[t] - full[t]).abs() < 1e-10);
    }
    ev.delta(&[], &mut out).unwrap();
    assert!(out.iter().all(|&x| x == 0.0));
}

#[test]
fn gauss_scores_match_analytic_form() {
    let rho: f64 = 0.4;
    let spec = bivariate(PairCopula::new(Family::Gauss, Rotation::R0, &[rho]).unwrap());
    let data = simulate(&spec, 40, 12).unwrap();
    let sh = score_and_hessian(&spec, &data).unwrap();
    let r2 = 1.0 - rho * rho;
    for t in 0..40 {
        let x = crate::special::norm_quantile(data.get(t, 0));
        let y = crate::special::norm_quantile(data.get(t, 1));
        let score = rho / r2 + (x * y * (1.0 + rho * rho) - rho * (x * x + y * y)) / (r2 * r2);
        assert!((sh.scores[(t, 0)] - score).abs() < 1e-5, "{} vs {score}", sh.scores[(t, 0)]);
        let h = (1.0 + rho * rho) / (r2 * r2) - (x * x + y * y) / (r2 * r2)
            + 4.0 * rho * (x * y * (1.0 + rho * rho) - rho * (x * x + y * y)) / (r2 * r2 * r2)
            + 2.0 * rho * x * y / (r2 * r2);
        assert!((sh.hessians[t][(0, 0)] - h).abs() < 1e-4, "{} vs {h}", sh.hessians[t][(0, 0)]);
    }
}

#[test]
fn hessians_are_symmetric() {
    let spec = true_model_5d();
    let data = simulate(&spec, 10, 13).unwrap();
    let sh = score_and_hessian(&spec, &data).unwrap();
    assert_eq!(sh.nparams(), 10);
    for h in &sh.hessians {
        assert_eq!(h, &h.transpose());
    }
}

#[test]
fn sequential_fit_bivariate_clayton() {
    let truth = bivariate(PairCopula::new(Family::Clayton, Rotation::R0, &[2.0]).unwrap());
    let data = simulate(&truth, 5000, 21).unwrap();
    let fit = fit_sequential(&truth, &data).unwrap();
    let theta = fit.params()[0];
    assert!((theta - 2.0).abs() < 0.15, "{theta}");
}

#[test]
fn sequential_fit_rejects_wrong_sign() {
    let truth = bivariate(PairCopula::new(Family::Clayton, Rotation::R90, &[2.0]).unwrap());
    let data = simulate(&truth, 500, 22).unwrap();
    let start = bivariate(PairCopula::new(Family::Clayton, Rotation::R0, &[1.0]).unwrap());
    let err = fit_sequential(&start, &data).unwrap_err();
    assert!(matches!(err, crate::Error::Domain(_)), "{err}");
    assert!(err.to_string().contains("tree 1"), "{err}");
    let lenient = fit_sequential_with(&start, &data, FitMode::Lenient).unwrap();
    assert!(lenient.params()[0] > 0.0);
}

#[test]
fn sequential_fit_of_independence_is_identity() {
    let spec = RVineSpec::independence(rvine_5d_matrix());
    let data = random_sample(30, 5, 4);
    assert_eq!(fit_sequential(&spec, &data).unwrap(), spec);
}

#[test]
fn student_t_pair_fit() {
    let truth = bivariate(PairCopula::new(Family::StudentT, Rotation::R0, &[0.6, 5.0]).unwrap());
    let data = simulate(&truth, 3000, 23).unwrap();
    let fit = fit_sequential(&truth, &data).unwrap();
    let p = fit.params();
    assert!((p[0] - 0.6).abs() < 0.05, "{p:?}");
    assert!((p[1] - 5.0).abs() < 2.0, "{p:?}");
}

#[test]
fn mle_bivariate_gauss() {
    let truth = bivariate(PairCopula::new(Family::Gauss, Rotation::R0, &[0.5]).unwrap());
    let data = simulate(&truth, 5000, 24).unwrap();
    let start = fit_sequential(&truth, &data).unwrap();
    let fit = fit_mle(&start, &data).unwrap();
    assert!(fit.converged);
    assert!((fit.spec.params()[0] - 0.5).abs() < 0.03);
    let (ll, _) = loglik(&truth, &data).unwrap();
    assert!(fit.loglik >= ll);
    // restarting at the optimum is a fixed point
    let again = fit_mle(&fit.spec, &data).unwrap();
    assert!(again.iterations <= 1, "{}", again.iterations);
    assert!((again.spec.params()[0] - fit.spec.params()[0]).abs() < 1e-6);
}

#[test]
fn mle_dominates_truth_in_five_dimensions() {
    let truth = true_model_5d();
    let data = simulate(&truth, 2000, 25).unwrap();
    let start = fit_sequential(&truth, &data).unwrap();
    let fit = fit_mle(&start, &data).unwrap();
    let (ll, _) = loglik(&truth, &data).unwrap();
    assert!(fit.loglik >= ll, "{} < {ll}", fit.loglik);
    assert!(fit.converged);
    let taus = fit.spec.taus();
    let truth_taus = truth.taus();
    for r in 1..5 {
        for c in 0..r {
            assert!((taus[r][c] - truth_taus[r][c]).abs() < 0.06, "cell ({r},{c})");
        }
    }
}

#[test]
fn select_pair_finds_rotation() {
    let truth = bivariate(PairCopula::new(Family::Gumbel, Rotation::R90, &[2.5]).unwrap());
    let data = simulate(&truth, 2000, 26).unwrap();
    let pc = select_pair(data.column(1), data.column(0), &SELECTION_FAMILIES).unwrap();
    assert!(pc.tau() < -0.4, "{pc}");
}

#[test]
fn benchmark_models_validate() {
    for spec in [true_model_5d(), true_model_8d(), gauss_vine(cvine_5d_matrix()), gauss_vine(dvine_5d_matrix())] {
        assert!(spec.validate().is_empty());
    }
    assert_eq!(true_model_8d().nparams(), 28);
}
