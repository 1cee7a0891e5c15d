//! Rosenblatt transform of an R-vine, the order-statistics transform and the
//! aggregation of PIT output into univariate test data.

use crate::data::{PitMatrix, SampleMatrix};
use crate::error::{Error, Result};
use crate::pair::{UMAX, UMIN};
use crate::rvine::{self, RVineSpec, VineEvaluator};
use crate::special::norm_quantile;

/// Rosenblatt transform: independent uniforms under the model.
pub fn rosenblatt(spec: &RVineSpec, data: &SampleMatrix) -> Result<PitMatrix> {
    let y = VineEvaluator::new(spec, data)?.pit();
    Ok(SampleMatrix::from_matrix_unchecked(y))
}

/// Inverse Rosenblatt transform of uniforms `w`.
pub fn inverse_rosenblatt(spec: &RVineSpec, w: &SampleMatrix) -> Result<SampleMatrix> {
    Ok(SampleMatrix::from_matrix_unchecked(rvine::inverse(spec, w)?))
}

/// Transform of the sorted row `y_(1) <= ... <= y_(d)` into independent uniforms:
/// `v_i = 1 - ((1 - y_(i)) / (1 - y_(i-1)))^(d - i + 1)` with `y_(0) = 0`.
///
/// Outputs are kept inside `[1e-10, 1 - 1e-10]` so that tied inputs stay usable.
pub fn order_stat_pit(y: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = y.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::domain(format!("order statistics transform needs entries in (0,1), got {x}")));
    }
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let d = s.len();
    let mut prev = 0.0_f64;
    let mut v = Vec::with_capacity(d);
    for (i, &x) in s.iter().enumerate() {
        let k = (d - i) as f64;
        let l = k * ((-x).ln_1p() - (-prev).ln_1p());
        v.push((-l.exp_m1()).clamp(UMIN, UMAX));
        prev = x;
    }
    Ok(v)
}

/// Weight applied to PIT values during aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gamma {
    One,
    /// `Phi^-1(x)^2`
    NormalQuantileSquared,
    /// `Phi^-1(x)`, the unsquared variant
    NormalQuantile,
    /// `|x - 0.5|`
    AbsCentered,
    /// `(x - 0.5)^alpha` for even `alpha`
    CenteredPower(u32),
}

impl Gamma {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Gamma::One => 1.0,
            Gamma::NormalQuantileSquared => norm_quantile(x).powi(2),
            Gamma::NormalQuantile => norm_quantile(x),
            Gamma::AbsCentered => (x - 0.5).abs(),
            Gamma::CenteredPower(a) => (x - 0.5).powi(a as i32),
        }
    }

    /// Supremum of the weight over (0, 1), if finite.
    fn sup(self) -> Option<f64> {
        match self {
            Gamma::One => Some(1.0),
            Gamma::AbsCentered => Some(0.5),
            Gamma::CenteredPower(a) => Some(0.5f64.powi(a as i32)),
            _ => None,
        }
    }
}

/// Pair of weights defining `s_t = sum_i Gamma_y(y_ti) * Gamma_v(v_ti)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AggregationRule {
    pub gamma_y: Gamma,
    pub gamma_v: Gamma,
}

impl AggregationRule {
    pub const BREYMANN: AggregationRule =
        AggregationRule { gamma_y: Gamma::NormalQuantileSquared, gamma_v: Gamma::One };
    pub const BERG: AggregationRule = AggregationRule { gamma_y: Gamma::One, gamma_v: Gamma::AbsCentered };
    pub const BERG2: AggregationRule = AggregationRule { gamma_y: Gamma::One, gamma_v: Gamma::CenteredPower(2) };

    pub fn new(gamma_y: Gamma, gamma_v: Gamma) -> Result<Self> {
        let rule = AggregationRule { gamma_y, gamma_v };
        rule.check()?;
        Ok(rule)
    }

    fn check(&self) -> Result<()> {
        if self.gamma_y == Gamma::One && self.gamma_v == Gamma::One {
            return Err(Error::domain("aggregation needs at least one weight other than One"));
        }
        for g in [self.gamma_y, self.gamma_v] {
            if let Gamma::CenteredPower(a) = g {
                if a != 2 && a != 4 {
                    return Err(Error::domain(format!("centered power must be 2 or 4, got {a}")));
                }
            }
        }
        Ok(())
    }

    /// Upper bound of `s_t` in dimension `d`, when the weights are bounded.
    pub fn range_max(&self, d: usize) -> Option<f64> {
        Some(d as f64 * self.gamma_y.sup()? * self.gamma_v.sup()?)
    }
}

/// Aggregate every PIT row into one number.
pub fn aggregate(y: &PitMatrix, rule: AggregationRule) -> Result<Vec<f64>> {
    rule.check()?;
    let (n, d) = (y.nrows(), y.ncols());
    let mut s = vec![0.0; n];
    for (t, st) in s.iter_mut().enumerate() {
        let row = y.row(t);
        let v = if rule.gamma_v == Gamma::One { vec![0.5; d] } else { order_stat_pit(&row)? };
        *st = row.iter().zip(&v).map(|(&a, &b)| rule.gamma_y.apply(a) * rule.gamma_v.apply(b)).sum();
    }
    Ok(s)
}
