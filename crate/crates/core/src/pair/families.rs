//! Unrotated bivariate families evaluated on clamped arguments.
//!
//! Every family here is exchangeable, so `h(v|u)` is `h_given(v, u)` with the
//! arguments swapped. Heavy-tailed expressions are carried in log space.

use crate::special::{norm_cdf, norm_quantile, t_cdf, t_quantile};
use statrs::function::gamma::ln_gamma;

use super::Family;

/// `ln(e^a + e^b - 1)` for `a, b >= 0`.
#[inline]
fn ln_sum_exp_minus_one(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ((lo - hi).exp() - (-hi).exp()).ln_1p()
}

/// `ln(e^a + e^b)`.
#[inline]
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log density together with both conditional distributions:
/// `(ln c(u,v), h(u|v), h(v|u))`.
#[inline]
pub(crate) fn eval3(family: Family, p: [f64; 2], u: f64, v: f64) -> (f64, f64, f64) {
    match family {
        Family::Independence => (0.0, u, v),
        Family::Gauss => {
            let rho = p[0];
            let x = norm_quantile(u);
            let y = norm_quantile(v);
            let r2 = 1.0 - rho * rho;
            let sd = r2.sqrt();
            let lc = -0.5 * r2.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
            (lc, norm_cdf((x - rho * y) / sd), norm_cdf((y - rho * x) / sd))
        }
        Family::StudentT => {
            let (rho, nu) = (p[0], p[1]);
            let x = t_quantile(u, nu);
            let y = t_quantile(v, nu);
            let r2 = 1.0 - rho * rho;
            let lc = t_log_density(rho, nu, x, y);
            let hu = t_cdf((x - rho * y) / ((nu + y * y) * r2 / (nu + 1.0)).sqrt(), nu + 1.0);
            let hv = t_cdf((y - rho * x) / ((nu + x * x) * r2 / (nu + 1.0)).sqrt(), nu + 1.0);
            (lc, hu, hv)
        }
        Family::Clayton => {
            let th = p[0];
            let (lu, lv) = (u.ln(), v.ln());
            let ls = ln_sum_exp_minus_one(-th * lu, -th * lv);
            let lc = th.ln_1p() - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * ls;
            let k = 1.0 + 1.0 / th;
            let hu = (-(1.0 + th) * lv - k * ls).exp().min(1.0);
            let hv = (-(1.0 + th) * lu - k * ls).exp().min(1.0);
            (lc, hu, hv)
        }
        Family::Gumbel => {
            let th = p[0];
            let (x, y) = (-u.ln(), -v.ln());
            let (lx, ly) = (x.ln(), y.ln());
            let la = ln_add_exp(th * lx, th * ly);
            let w = (la / th).exp();
            let lc = -w + (th - 1.0) * (lx + ly) + x + y + (1.0 / th - 2.0) * la + (w + th - 1.0).ln();
            let base = -w + (1.0 / th - 1.0) * la;
            let hu = (base + (th - 1.0) * ly + y).exp().min(1.0);
            let hv = (base + (th - 1.0) * lx + x).exp().min(1.0);
            (lc, hu, hv)
        }
        Family::Frank => {
            let th = p[0];
            let a = (-th).exp_m1();
            let au = (-th * u).exp_m1();
            let av = (-th * v).exp_m1();
            let den = a + au * av;
            let lc = (-th * a).ln() - th * (u + v) - 2.0 * den.abs().ln();
            let hu = ((-th * v).exp() * au / den).clamp(0.0, 1.0);
            let hv = ((-th * u).exp() * av / den).clamp(0.0, 1.0);
            (lc, hu, hv)
        }
        Family::Joe => {
            let th = p[0];
            let (lub, lvb) = ((-u).ln_1p(), (-v).ln_1p());
            let a = (th * lub).exp();
            let b = (th * lvb).exp();
            let one_a = -(th * lub).exp_m1();
            let one_b = -(th * lvb).exp_m1();
            let s = a + b * one_a;
            let ls = s.ln();
            let lc = (1.0 / th - 2.0) * ls + (th - 1.0) * (lub + lvb) + (th - 1.0 + s).ln();
            let k = (1.0 / th - 1.0) * ls;
            let hu = ((k + (th - 1.0) * lvb).exp() * one_a).min(1.0);
            let hv = ((k + (th - 1.0) * lub).exp() * one_b).min(1.0);
            (lc, hu, hv)
        }
    }
}

fn t_log_density(rho: f64, nu: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    let q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
    ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu) - 2.0 * ln_gamma(0.5 * (nu + 1.0)) - 0.5 * r2.ln()
        - 0.5 * (nu + 2.0) * q.ln_1p()
        + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
}

#[inline]
pub(crate) fn ln_pdf(family: Family, p: [f64; 2], u: f64, v: f64) -> f64 {
    match family {
        Family::Independence => 0.0,
        Family::StudentT => {
            let x = t_quantile(u, p[1]);
            let y = t_quantile(v, p[1]);
            t_log_density(p[0], p[1], x, y)
        }
        _ => eval3(family, p, u, v).0,
    }
}

/// `h(u|v) = dC(u,v)/dv`.
pub(crate) fn h_given(family: Family, p: [f64; 2], u: f64, v: f64) -> f64 {
    match family {
        Family::Independence => u,
        Family::Gauss => {
            let rho = p[0];
            let sd = (1.0 - rho * rho).sqrt();
            norm_cdf((norm_quantile(u) - rho * norm_quantile(v)) / sd)
        }
        Family::StudentT => {
            let (rho, nu) = (p[0], p[1]);
            let x = t_quantile(u, nu);
            let y = t_quantile(v, nu);
            t_cdf((x - rho * y) / ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt(), nu + 1.0)
        }
        _ => eval3(family, p, u, v).1,
    }
}

/// Distribution function of the unrotated family.
pub(crate) fn cdf(family: Family, p: [f64; 2], u: f64, v: f64) -> f64 {
    match family {
        Family::Independence => u * v,
        Family::Gauss | Family::StudentT => {
            // C(u, v) = int_0^v h(u|t) dt with the closed-form conditional.
            crate::special::integrate(|t| if t <= 0.0 { 0.0 } else { h_given(family, p, u, t) }, 0.0, v, 1e-11)
                .clamp(0.0, u.min(v))
        }
        Family::Clayton => {
            let th = p[0];
            let ls = ln_sum_exp_minus_one(-th * u.ln(), -th * v.ln());
            (-ls / th).exp()
        }
        Family::Gumbel => {
            let th = p[0];
            let la = ln_add_exp(th * (-u.ln()).ln(), th * (-v.ln()).ln());
            (-(la / th).exp()).exp()
        }
        Family::Frank => {
            let th = p[0];
            let a = (-th).exp_m1();
            let au = (-th * u).exp_m1();
            let av = (-th * v).exp_m1();
            -(au * av / a).ln_1p() / th
        }
        Family::Joe => {
            let th = p[0];
            let (lub, lvb) = ((-u).ln_1p(), (-v).ln_1p());
            let a = (th * lub).exp();
            let b = (th * lvb).exp();
            let s = a + b * (-(th * lub).exp_m1());
            -(s.ln() / th).exp_m1()
        }
    }
}

/// Solution `u` of `h(u|v) = q`, or `None` when the iteration does not settle.
pub(crate) fn h_inverse(family: Family, p: [f64; 2], q: f64, v: f64) -> Option<f64> {
    match family {
        Family::Independence => Some(q),
        Family::Gauss => {
            let rho = p[0];
            Some(norm_cdf(norm_quantile(q) * (1.0 - rho * rho).sqrt() + rho * norm_quantile(v)))
        }
        Family::StudentT => {
            let (rho, nu) = (p[0], p[1]);
            let y = t_quantile(v, nu);
            let z = t_quantile(q, nu + 1.0);
            Some(t_cdf(z * ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt() + rho * y, nu))
        }
        Family::Clayton => {
            let th = p[0];
            let lv = v.ln();
            let ls = -th / (1.0 + th) * (q.ln() + (1.0 + th) * lv);
            let lb = -th * lv;
            // a = s - b + 1 without cancelling the two large terms
            let a = 1.0 + lb.exp() * (ls - lb).exp_m1();
            Some((-a.ln() / th).exp())
        }
        Family::Frank => {
            let th = p[0];
            let a = (-th).exp_m1();
            let av = (-th * v).exp_m1();
            let au = q * a / ((-th * v).exp() - q * av);
            Some(-au.ln_1p() / th)
        }
        Family::Gumbel => gumbel_h_inverse(p[0], q, v),
        Family::Joe => bracketed_inverse(family, p, q, v),
    }
}

/// Gumbel: with `y = -ln v` and `w = (x^th + y^th)^(1/th)`, `h(u|v) = q` reduces to
/// `w + (th-1) ln w = y + (th-1) ln y - ln q`, monotone in `w >= y`.
fn gumbel_h_inverse(th: f64, q: f64, v: f64) -> Option<f64> {
    let y = -v.ln();
    let ly = y.ln();
    let rhs = y + (th - 1.0) * ly - q.ln();
    // solve G(s) = e^s + (th-1) s = rhs for s = ln w
    let g = |s: f64| s.exp() + (th - 1.0) * s - rhs;
    let mut lo = ly;
    let mut hi = rhs.max(1.0).ln().max(ly);
    while g(hi) < 0.0 {
        hi += 1.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = g(s);
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let step = f / (s.exp() + th - 1.0);
        let mut next = s - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * s.abs().max(1.0) || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            s = next;
            let lw = s;
            // x = w (1 - (y/w)^th)^(1/th)
            let frac = -(th * (ly - lw)).exp_m1();
            let x = lw.exp() * (frac.max(0.0).ln() / th).exp();
            return Some((-x).exp());
        }
        s = next;
    }
    None
}

/// Safeguarded Newton iteration for `h(u|v) = q` on `u in (0, 1)`.
fn bracketed_inverse(family: Family, p: [f64; 2], q: f64, v: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut u = q;
    for _ in 0..200 {
        let uc = u.clamp(super::UMIN, super::UMAX);
        let (lc, h, _) = eval3(family, p, uc, v);
        let f = h - q;
        if f.abs() < 1e-14 {
            return Some(uc);
        }
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let mut next = u - f / lc.exp();
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) < 1e-15 {
            return Some(next.clamp(super::UMIN, super::UMAX));
        }
        u = next;
    }
    None
}
