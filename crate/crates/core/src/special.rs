//! Univariate distribution helpers and one-dimensional quadrature.

use statrs::function::{beta, erf, gamma};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile.
#[inline]
pub fn norm_quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -norm_quantile(1.0 - p);
    }
    let x = -SQRT_2 * erf::erfc_inv(2.0 * p);
    // one Halley step polishes the statrs inverse to full relative accuracy
    let e = (norm_cdf(x) - p) / norm_ln_pdf(x).exp();
    x - e / (1.0 + 0.5 * x * e)
}

#[inline]
pub fn norm_ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.918_938_533_204_672_8
}

/// Student-t cdf with `nu` degrees of freedom.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let x2 = x * x;
    // The two incomplete-beta forms are accurate on opposite sides of |x| = sqrt(nu).
    if x2 < nu {
        let ib = beta::beta_reg(0.5, 0.5 * nu, x2 / (nu + x2));
        0.5 + 0.5 * x.signum() * ib
    } else {
        let tail = 0.5 * beta::beta_reg(0.5 * nu, 0.5, nu / (nu + x2));
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    gamma::ln_gamma(0.5 * (nu + 1.0))
        - gamma::ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

/// Student-t quantile: incomplete-beta inversion polished by Newton steps on the cdf.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let q = if p < 0.5 { p } else { 1.0 - p };
    let y = beta::inv_beta_reg(0.5 * nu, 0.5, 2.0 * q);
    let mut x = -(nu * (1.0 - y) / y).sqrt();
    if !x.is_finite() {
        x = norm_quantile(q);
    }
    for _ in 0..3 {
        let f = t_cdf(x, nu) - q;
        let dens = t_ln_pdf(x, nu).exp();
        if dens <= 0.0 || !dens.is_finite() {
            break;
        }
        let step = f / dens;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    if p < 0.5 {
        x
    } else {
        -x
    }
}

/// Upper-tail probability of a chi-squared variable.
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma::gamma_ur(0.5 * dof, 0.5 * x)
}

pub fn chi2_cdf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma::gamma_lr(0.5 * dof, 0.5 * x)
}

/// Sum whose value does not depend on the order of the terms.
pub fn order_free_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_W[7] * fc;
    let mut g = G7_W[3] * fc;
    for j in 0..7 {
        let x = h * GK_NODES[j];
        let s = f(c - x) + f(c + x);
        k += K15_W[j] * s;
        if j % 2 == 1 {
            g += G7_W[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below the absolute tolerance `tol` or 2000 subintervals exist.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    struct Piece {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    impl PartialEq for Piece {
        fn eq(&self, o: &Self) -> bool {
            self.err.total_cmp(&o.err).is_eq()
        }
    }
    impl Eq for Piece {}
    impl PartialOrd for Piece {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Piece {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&o.err)
        }
    }
    let (val, err) = gk15(&f, a, b);
    let mut total_err = err;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Piece { a, b, val, err });
    while total_err > tol && heap.len() < 2000 {
        let Some(w) = heap.pop() else { break };
        let m = 0.5 * (w.a + w.b);
        if m <= w.a || m >= w.b {
            heap.push(w);
            break;
        }
        let (v1, e1) = gk15(&f, w.a, m);
        let (v2, e2) = gk15(&f, m, w.b);
        total_err += e1 + e2 - w.err;
        heap.push(Piece { a: w.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: w.b, val: v2, err: e2 });
    }
    heap.iter().map(|p| p.val).sum()
}

/// Asymptotic Kolmogorov distribution upper tail with the Stephens small-sample correction.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let x = (sn + 0.12 + 0.11 / sn) * d;
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Classical one-sample Kolmogorov-Smirnov distance of `z` from U(0,1).
pub fn ks_uniform_distance(z: &[f64]) -> f64 {
    let mut s = z.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max)
}

/// p-value of the classical KS test of uniformity.
pub fn ks_uniform_pvalue(z: &[f64]) -> f64 {
    kolmogorov_sf(ks_uniform_distance(z), z.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_roundtrip() {
        for &p in &[1e-10, 1e-4, 0.025, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10] {
            let x = norm_quantile(p);
            assert!((norm_cdf(x) - p).abs() < 1e-13 * p, "p={p}: {}", norm_cdf(x) - p);
        }
        let q = norm_quantile(0.975);
        assert!((q - 1.959_963_984_540_054).abs() < 1e-12, "{q}");
    }

    #[test]
    fn t_quantile_roundtrip() {
        for &nu in &[2.5, 4.0, 10.0, 29.0] {
            for &p in &[1e-8, 0.01, 0.2, 0.5, 0.6, 0.99, 1.0 - 1e-8] {
                let x = t_quantile(p, nu);
                assert!((t_cdf(x, nu) - p).abs() < 1e-13, "nu={nu} p={p}");
            }
        }
        // t_1 is Cauchy.
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-13);
    }

    #[test]
    fn t_pdf_integrates_to_cdf() {
        let nu = 3.7;
        let v = integrate(|x| t_ln_pdf(x, nu).exp(), -1.0, 2.0, 1e-12);
        assert!((v - (t_cdf(2.0, nu) - t_cdf(-1.0, nu))).abs() < 1e-10);
    }

    #[test]
    fn chi2_quantile_table() {
        assert!((chi2_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-10);
        assert!((chi2_cdf(11.070_497_693_516_35, 5.0) - 0.95).abs() < 1e-10);
    }

    #[test]
    fn integrate_polynomial_and_log() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(|x: f64| if x > 0.0 { x.ln() } else { 0.0 }, 0.0, 1.0, 1e-10);
        assert!((v + 1.0).abs() < 1e-8);
    }
}
