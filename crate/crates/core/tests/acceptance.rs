//! Acceptance criteria, one report line each.
//!
//! Criteria 5 and 6 take tens of minutes and only run with `VINEGOF_SLOW=1`;
//! otherwise they report SKIP.

use std::path::{Path, PathBuf};
use std::process::Command;

use vinegof::bootstrap::{fit_model, klic_mc, size_power_study, StudyConfig};
use vinegof::dependence::spearman_rho;
use vinegof::gof::TestId;
use vinegof::infomatrix::{info_matrices, ir_statistic, vech};
use vinegof::rng::rng_from_seed;
use vinegof::rvine::models::{
    cvine_5d_matrix, dvine_5d_matrix, gauss_vine, rvine_5d_matrix, true_model_5d, true_model_8d, EDGES_5D,
    LABEL_MAP_5D, SELECTION_FAMILIES,
};
use vinegof::rvine::{fit_mle, loglik, score_and_hessian, select_sequential, simulate};
use vinegof::special::{chi2_cdf, ks_uniform_pvalue};
use vinegof::statistics::{ecp2_stat, empirical_copula, uni_stat, EcpKind, UniKind};
use vinegof::transforms::{aggregate, inverse_rosenblatt, rosenblatt, AggregationRule};
use vinegof::{Family, PairCopula, RVineMatrix, RVineSpec, Rotation, SampleMatrix};

use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn slow_enabled() -> bool {
    std::env::var("VINEGOF_SLOW").is_ok_and(|v| v == "1")
}

fn clayton2() -> RVineSpec {
    let m = RVineMatrix::from_lower(&[&[2], &[1, 1]]).unwrap();
    RVineSpec::from_fn(m, |_, _| PairCopula::new(Family::Clayton, Rotation::R0, &[2.0]).unwrap())
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

// 1. Vine density against the hand-chained factorization in figure labels.
fn density_oracle() -> Outcome {
    let start = std::time::Instant::now();
    let spec = true_model_5d();
    let pair = |a: usize, b: usize, cond: &[usize]| {
        let e = EDGES_5D.iter().find(|e| e.a == a && e.b == b && e.cond == cond).unwrap();
        PairCopula::new(e.family, Rotation::R0, &PairCopula::tau_to_param(e.family, Rotation::R0, e.tau).unwrap())
            .unwrap()
    };
    let (c12, c13, c14, c45) = (pair(1, 2, &[]), pair(1, 3, &[]), pair(1, 4, &[]), pair(4, 5, &[]));
    let (c24_1, c34_1, c15_4) = (pair(2, 4, &[1]), pair(3, 4, &[1]), pair(1, 5, &[4]));
    let (c23_14, c35_14, c25_134) = (pair(2, 3, &[1, 4]), pair(3, 5, &[1, 4]), pair(2, 5, &[1, 3, 4]));
    let mut rng = rng_from_seed(1);
    let mut rows = Vec::new();
    let mut expected = Vec::new();
    for _ in 0..100 {
        let u: [f64; 5] = std::array::from_fn(|_| rng.gen_range(0.01..0.99));
        let h = |c: &PairCopula, a: f64, b: f64| c.hfunc(a, b).unwrap();
        let h1 = |c: &PairCopula, a: f64, b: f64| c.hfunc_first(a, b).unwrap();
        let l = |c: &PairCopula, a: f64, b: f64| c.ln_pdf(a, b).unwrap();
        let (c2_1, c3_1, c4_1) = (h1(&c12, u[0], u[1]), h1(&c13, u[0], u[2]), h1(&c14, u[0], u[3]));
        let (c1_4, c5_4) = (h(&c14, u[0], u[3]), h1(&c45, u[3], u[4]));
        let (c2_14, c3_14, c5_14) = (h(&c24_1, c2_1, c4_1), h(&c34_1, c3_1, c4_1), h1(&c15_4, c1_4, c5_4));
        let (c2_134, c5_134) = (h(&c23_14, c2_14, c3_14), h1(&c35_14, c3_14, c5_14));
        expected.push(
            l(&c12, u[0], u[1])
                + l(&c13, u[0], u[2])
                + l(&c14, u[0], u[3])
                + l(&c45, u[3], u[4])
                + l(&c24_1, c2_1, c4_1)
                + l(&c34_1, c3_1, c4_1)
                + l(&c15_4, c1_4, c5_4)
                + l(&c23_14, c2_14, c3_14)
                + l(&c35_14, c3_14, c5_14)
                + l(&c25_134, c2_134, c5_134),
        );
        let mut row = vec![0.0; 5];
        for i in 0..5 {
            row[LABEL_MAP_5D[i] - 1] = u[i];
        }
        rows.push(row);
    }
    let (_, per_obs) = loglik(&spec, &SampleMatrix::from_rows(&rows).unwrap()).unwrap();
    let worst = per_obs.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(worst < 1e-10 && secs < 1.0, format!("max |diff| = {worst:.2e} (< 1e-10), {secs:.3} s (< 1 s)"))
}

// 2. Rosenblatt roundtrip and PIT uniformity.
fn pit_correctness() -> Outcome {
    let start = std::time::Instant::now();
    let m2 = RVineMatrix::from_lower(&[&[2], &[1, 1]]).unwrap();
    let biv = RVineSpec::from_fn(m2, |_, _| PairCopula::new(Family::Gumbel, Rotation::R0, &[2.5]).unwrap());
    let mut worst = 0.0f64;
    for spec in [biv, true_model_5d(), true_model_8d()] {
        let x = simulate(&spec, 1000, 21).unwrap();
        let w = rosenblatt(&spec, &x).unwrap();
        let back = inverse_rosenblatt(&spec, &w).unwrap();
        worst = worst.max((back.as_matrix() - x.as_matrix()).abs().max());
    }
    let spec = true_model_5d();
    let y = rosenblatt(&spec, &simulate(&spec, 2000, 2).unwrap()).unwrap();
    let min_p = (0..5).map(|j| ks_uniform_pvalue(y.column(j))).fold(1.0, f64::min);
    let mut max_rho = 0.0f64;
    for j in 0..5 {
        for k in 0..j {
            max_rho = max_rho.max(spearman_rho(y.column(j), y.column(k)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-8 && min_p > 0.01 && max_rho < 0.08 && secs < 10.0,
        format!(
            "roundtrip {worst:.2e} (< 1e-8), min KS p {min_p:.3} (> 0.01), max |Spearman| {max_rho:.4} (< 0.08), {secs:.2} s"
        ),
    )
}

// 3. Bartlett identity and the IR statistic at the truth.
fn bartlett() -> Outcome {
    let spec = clayton2();
    let x = simulate(&spec, 10_000, 3).unwrap();
    let sh = score_and_hessian(&spec, &x).unwrap();
    let n = sh.nobs();
    let vs: Vec<_> = (0..n)
        .map(|t| {
            let s = sh.scores.row(t).transpose();
            vech(&(&sh.hessians[t] + &s * s.transpose()))
        })
        .collect();
    let k = vs[0].len();
    let mut worst_z = 0.0f64;
    for i in 0..k {
        let comp: Vec<f64> = vs.iter().map(|v| v[i]).collect();
        let (m, sd) = mean_sd(&comp);
        worst_z = worst_z.max(m.abs() / (sd / (n as f64).sqrt()));
    }
    let irs: Vec<f64> = (0..50u64)
        .map(|r| {
            let x = simulate(&spec, 1000, 100 + r).unwrap();
            let fitted = fit_model(&spec, &x).unwrap();
            ir_statistic(&info_matrices(&fitted, &x).unwrap()).unwrap().ir
        })
        .collect();
    let (mean_ir, _) = mean_sd(&irs);
    verdict(
        worst_z <= 3.0 && (mean_ir - 1.0).abs() <= 0.05,
        format!("max |mean|/SE = {worst_z:.2} (<= 3), mean IR = {mean_ir:.4} (1 +- 0.05)"),
    )
}

// 4. Breymann aggregation under the null.
fn breymann_null() -> Outcome {
    let spec = true_model_5d();
    let y = rosenblatt(&spec, &simulate(&spec, 5000, 4).unwrap()).unwrap();
    let s = aggregate(&y, AggregationRule::BREYMANN).unwrap();
    let (m, sd) = mean_sd(&s);
    let se = sd / (s.len() as f64).sqrt();
    let z: Vec<f64> = s.iter().map(|&v| chi2_cdf(v, 5.0)).collect();
    let p = ks_uniform_pvalue(&z);
    verdict(
        (m - 5.0).abs() <= 3.0 * se && p > 0.01,
        format!("mean s = {m:.4} (5 +- {:.4}), KS p = {p:.3} (> 0.01)", 3.0 * se),
    )
}

// 5. Size at desk scale.
fn size() -> Outcome {
    if !slow_enabled() {
        return Outcome::Skip("set VINEGOF_SLOW=1".into());
    }
    let truth = true_model_5d();
    let tests: Vec<TestId> =
        ["ir", "white", "ecp-cvm", "ecp2-cvm", "breymann-ad"].iter().map(|s| s.parse().unwrap()).collect();
    let cfg = StudyConfig {
        true_model: truth.clone(),
        alternatives: vec![truth],
        n: 500,
        b: 200,
        alpha: 0.05,
        master_seed: 5,
        tests,
    };
    let res = size_power_study(&cfg, None).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (test, models) in &res.results {
        let inside = models["M1"].estimate;
        let outer = models["M2_1"].estimate;
        ok &= (0.02..=0.09).contains(&inside) && (0.02..=0.09).contains(&outer);
        parts.push(format!("{test} {inside:.3}/{outer:.3}"));
    }
    verdict(ok, format!("size in-sample/outer in [0.02, 0.09]: {}", parts.join(", ")))
}

fn fitted_alternatives(seed: u64) -> Vec<RVineSpec> {
    let pre = simulate(&true_model_5d(), 1000, seed).unwrap();
    let selected = |m: RVineMatrix| {
        let start = select_sequential(&m, &pre, &SELECTION_FAMILIES).unwrap();
        fit_mle(&start, &pre).unwrap().spec
    };
    vec![
        selected(cvine_5d_matrix()),
        selected(dvine_5d_matrix()),
        fit_model(&gauss_vine(rvine_5d_matrix()), &pre).unwrap(),
    ]
}

// 6. Power ordering at desk scale.
fn power_ordering() -> Outcome {
    if !slow_enabled() {
        return Outcome::Skip("set VINEGOF_SLOW=1".into());
    }
    let tests: Vec<TestId> = ["ecp2-cvm", "ir", "berg-cvm", "berg2-cvm"].iter().map(|s| s.parse().unwrap()).collect();
    let cfg = StudyConfig {
        true_model: true_model_5d(),
        alternatives: fitted_alternatives(6),
        n: 1000,
        b: 300,
        alpha: 0.05,
        master_seed: 6,
        tests,
    };
    let res = size_power_study(&cfg, None).unwrap();
    let power = |t: &str, m: &str| res.results[t][m].estimate;
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, label) in [("M2_1", "C-vine"), ("M2_2", "D-vine"), ("M2_3", "Gauss")] {
        let (e, i, b1, b2) = (power("ecp2-cvm", m), power("ir", m), power("berg-cvm", m), power("berg2-cvm", m));
        ok &= e > b1.max(b2) && i > b1.max(b2);
        parts.push(format!("{label}: ecp2-cvm {e:.3} ir {i:.3} berg-cvm {b1:.3} berg2-cvm {b2:.3}"));
    }
    verdict(ok, parts.join("; "))
}

// 7. Monte Carlo KLIC.
fn klic() -> Outcome {
    let truth = true_model_5d();
    let own = klic_mc(&truth, &truth, 2000, 7).unwrap();
    let gauss = fit_model(&gauss_vine(rvine_5d_matrix()), &simulate(&truth, 1000, 70).unwrap()).unwrap();
    let k = klic_mc(&truth, &gauss, 20_000, 71).unwrap();
    verdict(
        own.estimate.abs() <= 3.0 * own.std_error && (k.estimate - 0.72).abs() <= 0.15,
        format!(
            "self {:.2e} (0 +- {:.2e}), Gauss {:.4} +- {:.4} SE (0.72 +- 0.15)",
            own.estimate,
            3.0 * own.std_error,
            k.estimate,
            k.std_error
        ),
    )
}

// 8. Statistic oracles.
fn statistic_oracles() -> Outcome {
    let ks = uni_stat(UniKind::KS, &[0.25, 0.5, 0.75], |x| x).unwrap().value;
    let sample = SampleMatrix::from_rows(&[vec![0.2, 0.3], vec![0.5, 0.6], vec![0.8, 0.9]]).unwrap();
    let cn = empirical_copula(&sample, &[0.5, 0.6]);
    let mut rng = rng_from_seed(8);
    let mut worst = 0.0f64;
    for n in [1usize, 10, 50] {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect();
        let y = SampleMatrix::from_rows(&rows).unwrap();
        let fast = ecp2_stat(EcpKind::Cvm, &y).value;
        let mut brute = 0.0;
        for t in 0..n {
            let below = (0..n).filter(|&s| (0..4).all(|j| rows[s][j] <= rows[t][j])).count();
            let diff = below as f64 / (n + 1) as f64 - rows[t].iter().product::<f64>();
            brute += diff * diff;
        }
        worst = worst.max((fast - brute).abs());
    }
    verdict(
        (ks - 0.25).abs() < 1e-15 && cn == 0.5 && worst < 1e-12,
        format!("KS D_n = {ks}, C_n = {cn}, ecp2 vs double loop {worst:.1e} (< 1e-12)"),
    )
}

// 9. Byte-identical outputs across repeats and worker counts.
fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_vinegof");
    let models = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let p = |x: &PathBuf| x.to_str().unwrap().to_string();
    let truth = p(&models.join("rvine5_true.json"));
    let mut cfg: serde_json::Value = serde_json::json!({
        "n": 80, "B": 12, "alpha": 0.1, "seed": 9, "tests": ["ir", "white", "ecp2-ks", "berg-ad"],
    });
    let model_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(models.join("rvine5_true.json")).unwrap()).unwrap();
    cfg["true_model"] = model_json.clone();
    cfg["alternatives"] = serde_json::json!([serde_json::from_str::<serde_json::Value>(
        &std::fs::read_to_string(models.join("gauss5_start.json")).unwrap()
    )
    .unwrap()]);
    let cfg_path = dir.path().join("study.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();

    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for (k, workers) in ["1", "3", "1"].iter().enumerate() {
        let w = dir.path().join(format!("run{k}"));
        std::fs::create_dir(&w).unwrap();
        let f = |name: &str| p(&w.join(name));
        run(&["simulate", "--model", &truth, "--n", "120", "--seed", "9", "--out", &f("d.csv")]);
        run(&["fit", "--model", &truth, "--data", &f("d.csv"), "--out", &f("f.json")]);
        run(&[
            "gof", "--model", &f("f.json"), "--data", &f("d.csv"), "--test", "all", "--B", "10", "--seed", "9",
            "--out", &f("r.json"), "--workers", workers,
        ]);
        run(&["power-study", "--config", &p(&cfg_path), "--out", &f("s.json"), "--workers", workers]);
        run(&["klic", "--true", &truth, "--alt", &f("f.json"), "--N", "500", "--seed", "9", "--out", &f("k.json")]);
        outputs.push(
            ["d.csv", "f.json", "r.json", "s.json", "k.json"].iter().map(|n| std::fs::read(w.join(n)).unwrap()).collect(),
        );
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(same, "simulate, fit, gof all, power-study, klic: 3 runs, workers 1/3/1".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("density oracle", density_oracle),
        ("PIT correctness", pit_correctness),
        ("Bartlett identity", bartlett),
        ("Breymann null", breymann_null),
        ("size at desk scale", size),
        ("power ordering", power_ordering),
        ("KLIC", klic),
        ("statistic oracles", statistic_oracles),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = match check() {
            Outcome::Pass(d) => format!("PASS  {}. {name}: {d}", i + 1),
            Outcome::Fail(d) => {
                failed.push(i + 1);
                format!("FAIL  {}. {name}: {d}", i + 1)
            }
            Outcome::Skip(d) => format!("SKIP  {}. {name}: {d}", i + 1),
        };
        println!("{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
