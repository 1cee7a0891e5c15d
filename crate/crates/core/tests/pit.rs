use vinegof::dependence::spearman_rho;
use vinegof::rvine::models::{true_model_5d, true_model_8d};
use vinegof::rvine::simulate;
use vinegof::special::ks_uniform_pvalue;
use vinegof::transforms::{inverse_rosenblatt, rosenblatt};
use vinegof::{PairCopula, RVineMatrix, RVineSpec, Rotation, SampleMatrix};
use vinegof::pair::Family;

fn bivariate_clayton() -> RVineSpec {
    let m = RVineMatrix::from_lower(&[&[2], &[1, 1]]).unwrap();
    RVineSpec::from_fn(m, |_, _| PairCopula::new(Family::Clayton, Rotation::R90, &[1.5]).unwrap())
}

fn max_abs_diff(a: &SampleMatrix, b: &SampleMatrix) -> f64 {
    (a.as_matrix() - b.as_matrix()).abs().max()
}

#[test]
fn rosenblatt_inverts_simulation() {
    for spec in [bivariate_clayton(), true_model_5d(), true_model_8d()] {
        let x = simulate(&spec, 500, 7).unwrap();
        let w = rosenblatt(&spec, &x).unwrap();
        let back = inverse_rosenblatt(&spec, &w).unwrap();
        assert!(max_abs_diff(&back, &x) < 1e-8, "d = {}", spec.dim());
    }
}

#[test]
fn pit_columns_are_independent_uniforms_under_the_truth() {
    let spec = true_model_5d();
    let x = simulate(&spec, 2000, 2).unwrap();
    let y = rosenblatt(&spec, &x).unwrap();
    for j in 0..5 {
        let p = ks_uniform_pvalue(y.column(j));
        assert!(p > 0.01, "column {j}: KS p-value {p}");
        for k in 0..j {
            let r = spearman_rho(y.column(j), y.column(k));
            assert!(r.abs() < 0.08, "columns {k},{j}: Spearman {r}");
        }
    }
}
