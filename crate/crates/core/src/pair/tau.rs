//! Kendall's τ of the unrotated families and its inversion.

use crate::error::{Error, Result};
use crate::special::integrate;

use super::{Family, DEFAULT_NU};

const BISECT_TOL: f64 = 1e-10;

/// Debye function of order one, `D1(x) = x^-1 int_0^x t / (e^t - 1) dt`, for `x > 0`.
fn debye1(x: f64) -> f64 {
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    integrate(integrand, 0.0, x, 1e-13) / x
}

/// τ of the Frank copula; odd in θ.
pub fn frank_tau(theta: f64) -> f64 {
    let x = theta.abs();
    let tau = if x < 1e-2 {
        x / 9.0 - x.powi(3) / 900.0
    } else {
        1.0 - 4.0 / x * (1.0 - debye1(x))
    };
    tau.copysign(theta)
}

/// τ of the Joe copula, `1 + 4 int_0^1 phi(t) / phi'(t) dt` with
/// generator `phi(t) = -ln(1 - (1-t)^theta)`.
pub fn joe_tau(theta: f64) -> f64 {
    if theta <= 1.0 {
        return 0.0;
    }
    // substitute s = 1 - t
    let integrand = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let ls = s.ln();
        let one_minus = -(theta * ls).exp_m1();
        (-(theta * ls).exp()).ln_1p() * one_minus * (-(theta - 1.0) * ls).exp() / theta
    };
    1.0 + 4.0 * integrate(integrand, 0.0, 1.0, 1e-13)
}

pub(super) fn base_tau(family: Family, theta: f64) -> f64 {
    match family {
        Family::Independence => 0.0,
        Family::Gauss | Family::StudentT => std::f64::consts::FRAC_2_PI * theta.asin(),
        Family::Clayton => theta / (theta + 2.0),
        Family::Gumbel => 1.0 - 1.0 / theta,
        Family::Frank => frank_tau(theta),
        Family::Joe => joe_tau(theta),
    }
}

fn unattainable(family: Family, tau: f64) -> Error {
    Error::domain(format!("Kendall's tau {tau} is not attainable by the {family} family"))
}

/// Bisection on an increasing map `theta -> tau` over `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let t = f(mid);
        if (t - target).abs() < BISECT_TOL || hi - lo < 1e-14 * mid.abs().max(1.0) {
            return mid;
        }
        if t < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub(super) fn base_tau_to_param(family: Family, tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() || tau <= -1.0 || tau >= 1.0 {
        return Err(unattainable(family, tau));
    }
    match family {
        Family::Independence => Ok(vec![]),
        Family::Gauss => Ok(vec![(std::f64::consts::FRAC_PI_2 * tau).sin()]),
        Family::StudentT => Ok(vec![(std::f64::consts::FRAC_PI_2 * tau).sin(), DEFAULT_NU]),
        Family::Clayton => {
            if tau <= 0.0 {
                return Err(unattainable(family, tau));
            }
            Ok(vec![2.0 * tau / (1.0 - tau)])
        }
        Family::Gumbel => {
            if tau < 0.0 {
                return Err(unattainable(family, tau));
            }
            Ok(vec![1.0 / (1.0 - tau)])
        }
        Family::Frank => {
            let (lo, hi) = (1e-6, 50.0);
            let a = tau.abs();
            if tau == 0.0 || a < frank_tau(lo) || a > frank_tau(hi) {
                return Err(unattainable(family, tau));
            }
            Ok(vec![bisect(frank_tau, a, lo, hi).copysign(tau)])
        }
        Family::Joe => {
            let (lo, hi) = (1.0 + 1e-6, 50.0);
            if tau < joe_tau(lo) || tau > joe_tau(hi) {
                return Err(unattainable(family, tau));
            }
            Ok(vec![bisect(joe_tau, tau, lo, hi)])
        }
    }
}
