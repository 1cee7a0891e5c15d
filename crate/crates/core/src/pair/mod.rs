//! Bivariate pair-copula families.
//!
//! A [`PairCopula`] bundles a family, a rotation and its parameters. The strict
//! methods (`pdf`, `cdf`, `hfunc`, `hinv`) reject arguments on the boundary of
//! the unit square; [`PairCopula::eval`] is the clamped hot path used by the vine
//! recursions.

mod families;
mod tau;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;

pub use tau::{frank_tau, joe_tau};

/// Lower clamp applied to copula arguments before evaluation.
pub const UMIN: f64 = 1e-10;
/// Upper clamp applied to copula arguments before evaluation.
pub const UMAX: f64 = 1.0 - 1e-10;

/// Degrees of freedom assigned to a Student-t pair when only τ is known.
pub const DEFAULT_NU: f64 = 8.0;

/// Bivariate copula family.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Independence,
    Gauss,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
    Joe,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Independence,
        Family::Gauss,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
        Family::Joe,
    ];

    /// Serialization code of the unrotated family.
    pub fn code(self) -> u32 {
        match self {
            Family::Independence => 0,
            Family::Gauss => 1,
            Family::StudentT => 2,
            Family::Clayton => 3,
            Family::Gumbel => 4,
            Family::Frank => 5,
            Family::Joe => 6,
        }
    }

    pub fn from_code(code: u32) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.code() == code)
    }

    /// Number of free parameters.
    pub fn nparams(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    /// Parameter domains in storage order.
    pub fn domains(self) -> Vec<ParamDomain> {
        let rho = ParamDomain::open(-1.0, 1.0);
        match self {
            Family::Independence => vec![],
            Family::Gauss => vec![rho],
            Family::StudentT => vec![
                rho,
                ParamDomain { lower: 2.0, upper: 30.0, lower_closed: false, upper_closed: true },
            ],
            Family::Clayton => vec![ParamDomain::open(0.0, f64::INFINITY)],
            Family::Gumbel => vec![ParamDomain {
                lower: 1.0,
                upper: f64::INFINITY,
                lower_closed: true,
                upper_closed: false,
            }],
            Family::Frank => vec![ParamDomain::open(f64::NEG_INFINITY, f64::INFINITY)],
            Family::Joe => vec![ParamDomain::open(1.0, f64::INFINITY)],
        }
    }

    /// Rotations other than 0 that the family admits.
    pub fn allows(self, rotation: Rotation) -> bool {
        match (self, rotation) {
            (_, Rotation::R0) => true,
            (Family::Clayton | Family::Gumbel | Family::Joe, _) => true,
            (Family::Frank, Rotation::R180) => true,
            _ => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Gauss => "gauss",
            Family::StudentT => "student-t",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::Joe => "joe",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counter-clockwise rotation of a copula density.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u32 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Rotation> {
        match deg {
            0 => Some(Rotation::R0),
            90 => Some(Rotation::R90),
            180 => Some(Rotation::R180),
            270 => Some(Rotation::R270),
            _ => None,
        }
    }
}

/// Interval of admissible values for one parameter.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ParamDomain {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl ParamDomain {
    pub fn open(lower: f64, upper: f64) -> Self {
        debug_assert!(lower < upper);
        ParamDomain { lower, upper, lower_closed: false, upper_closed: false }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let hi = if self.upper_closed { x <= self.upper } else { x < self.upper };
        lo && hi && x.is_finite()
    }
}

/// A fully specified pair copula.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairCopula {
    family: Family,
    rotation: Rotation,
    params: [f64; 2],
}

impl Default for PairCopula {
    fn default() -> Self {
        PairCopula::independence()
    }
}

impl PairCopula {
    /// Build a pair copula, checking rotation and parameter domains.
    pub fn new(family: Family, rotation: Rotation, params: &[f64]) -> Result<Self> {
        let rotation = if family == Family::Independence { Rotation::R0 } else { rotation };
        if !family.allows(rotation) {
            return Err(Error::domain(format!(
                "rotation {} not permitted for {family}",
                rotation.degrees()
            )));
        }
        if params.len() != family.nparams() {
            return Err(Error::domain(format!(
                "{family} takes {} parameter(s), got {}",
                family.nparams(),
                params.len()
            )));
        }
        let mut p = [0.0; 2];
        p[..params.len()].copy_from_slice(params);
        let pc = PairCopula { family, rotation, params: p };
        pc.check_params()?;
        Ok(pc)
    }

    pub fn independence() -> Self {
        PairCopula { family: Family::Independence, rotation: Rotation::R0, params: [0.0; 2] }
    }

    /// Decode from the integer family code and the two stored parameters.
    pub fn from_code(code: u32, par: f64, par2: f64) -> Result<Self> {
        let family = Family::from_code(code % 10)
            .ok_or_else(|| Error::domain(format!("unknown family code {code}")))?;
        let rotation = Rotation::from_degrees(90 * (code / 10))
            .ok_or_else(|| Error::domain(format!("unknown rotation in family code {code}")))?;
        let all = [par, par2];
        PairCopula::new(family, rotation, &all[..family.nparams()])
    }

    /// Integer code: family code plus `10 * rotation / 90`.
    pub fn code(&self) -> u32 {
        self.family.code() + 10 * (self.rotation.degrees() / 90)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn nparams(&self) -> usize {
        self.family.nparams()
    }

    pub fn params(&self) -> &[f64] {
        &self.params[..self.nparams()]
    }

    /// Same family and rotation with new parameters.
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        PairCopula::new(self.family, self.rotation, params)
    }

    /// Replace parameters without domain checks. Callers guarantee validity.
    pub(crate) fn with_params_unchecked(&self, params: &[f64]) -> Self {
        let mut out = *self;
        out.params[..params.len()].copy_from_slice(params);
        out
    }

    pub fn params_valid(family: Family, params: &[f64]) -> bool {
        params.len() == family.nparams()
            && family.domains().iter().zip(params).all(|(d, &x)| d.contains(x))
            && !(family == Family::Frank && params[0] == 0.0)
    }

    fn check_params(&self) -> Result<()> {
        if PairCopula::params_valid(self.family, self.params()) {
            Ok(())
        } else {
            Err(Error::domain(format!("parameters {:?} outside the {} domain", self.params(), self.family)))
        }
    }

    /// Clamped evaluation `(ln c(u,v), h(u|v), h(v|u))`.
    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let u = u.clamp(UMIN, UMAX);
        let v = v.clamp(UMIN, UMAX);
        let (f, p) = (self.family, self.params);
        match self.rotation {
            Rotation::R0 => families::eval3(f, p, u, v),
            Rotation::R90 => {
                let (lc, a, b) = families::eval3(f, p, 1.0 - u, v);
                (lc, 1.0 - a, b)
            }
            Rotation::R180 => {
                let (lc, a, b) = families::eval3(f, p, 1.0 - u, 1.0 - v);
                (lc, 1.0 - a, 1.0 - b)
            }
            Rotation::R270 => {
                let (lc, a, b) = families::eval3(f, p, u, 1.0 - v);
                (lc, a, 1.0 - b)
            }
        }
    }

    /// Clamped log density.
    #[inline]
    pub fn ln_pdf_clamped(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(UMIN, UMAX);
        let v = v.clamp(UMIN, UMAX);
        let (u, v) = self.rotate_args(u, v);
        families::ln_pdf(self.family, self.params, u, v)
    }

    /// Clamped `h(u|v)`.
    #[inline]
    pub fn h_clamped(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(UMIN, UMAX);
        let v = v.clamp(UMIN, UMAX);
        let (f, p) = (self.family, self.params);
        match self.rotation {
            Rotation::R0 => families::h_given(f, p, u, v),
            Rotation::R90 => 1.0 - families::h_given(f, p, 1.0 - u, v),
            Rotation::R180 => 1.0 - families::h_given(f, p, 1.0 - u, 1.0 - v),
            Rotation::R270 => families::h_given(f, p, u, 1.0 - v),
        }
    }

    /// Clamped inverse of `u -> h(u|v)`.
    pub fn hinv_clamped(&self, q: f64, v: f64) -> Result<f64> {
        let q = q.clamp(UMIN, UMAX);
        let v = v.clamp(UMIN, UMAX);
        let (f, p) = (self.family, self.params);
        let out = match self.rotation {
            Rotation::R0 => families::h_inverse(f, p, q, v),
            Rotation::R90 => families::h_inverse(f, p, 1.0 - q, v).map(|x| 1.0 - x),
            Rotation::R180 => families::h_inverse(f, p, 1.0 - q, 1.0 - v).map(|x| 1.0 - x),
            Rotation::R270 => families::h_inverse(f, p, q, 1.0 - v),
        };
        match out {
            Some(x) if x.is_finite() => Ok(x.clamp(UMIN, UMAX)),
            _ => Err(Error::Convergence(format!(
                "inverse h-function of {} {:?} did not converge at p={q}, v={v}",
                self.family,
                self.params()
            ))),
        }
    }

    #[inline]
    fn rotate_args(&self, u: f64, v: f64) -> (f64, f64) {
        match self.rotation {
            Rotation::R0 => (u, v),
            Rotation::R90 => (1.0 - u, v),
            Rotation::R180 => (1.0 - u, 1.0 - v),
            Rotation::R270 => (u, 1.0 - v),
        }
    }

    /// Copula density.
    pub fn pdf(&self, u: f64, v: f64) -> Result<f64> {
        interior(u, v)?;
        Ok(self.ln_pdf_clamped(u, v).exp())
    }

    /// Log copula density.
    pub fn ln_pdf(&self, u: f64, v: f64) -> Result<f64> {
        interior(u, v)?;
        Ok(self.ln_pdf_clamped(u, v))
    }

    /// Copula distribution function on the closed unit square.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("cdf arguments ({u}, {v}) outside [0,1]^2")));
        }
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(v);
        }
        if v == 1.0 {
            return Ok(u);
        }
        let (f, p) = (self.family, self.params);
        let c = match self.rotation {
            Rotation::R0 => families::cdf(f, p, u, v),
            Rotation::R90 => v - families::cdf(f, p, 1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + families::cdf(f, p, 1.0 - u, 1.0 - v),
            Rotation::R270 => u - families::cdf(f, p, u, 1.0 - v),
        };
        Ok(c.clamp(0.0, u.min(v)))
    }

    /// Conditional distribution `h(u|v) = dC(u,v)/dv`.
    pub fn hfunc(&self, u: f64, v: f64) -> Result<f64> {
        interior(u, v)?;
        Ok(self.h_clamped(u, v))
    }

    /// Conditional distribution `h(v|u) = dC(u,v)/du`.
    pub fn hfunc_first(&self, u: f64, v: f64) -> Result<f64> {
        interior(u, v)?;
        Ok(self.eval(u, v).2)
    }

    /// Inverse of `u -> h(u|v)`.
    pub fn hinv(&self, p: f64, v: f64) -> Result<f64> {
        interior(p, v)?;
        self.hinv_clamped(p, v)
    }

    /// Kendall's τ.
    pub fn tau(&self) -> f64 {
        let base = tau::base_tau(self.family, self.params[0]);
        match self.rotation {
            Rotation::R90 | Rotation::R270 => -base,
            _ => base,
        }
    }

    /// Parameters reproducing Kendall's τ for the given family and rotation.
    pub fn tau_to_param(family: Family, rotation: Rotation, tau: f64) -> Result<Vec<f64>> {
        let base_tau = match rotation {
            Rotation::R90 | Rotation::R270 => -tau,
            _ => tau,
        };
        if !family.allows(rotation) && family != Family::Independence {
            return Err(Error::domain(format!(
                "rotation {} not permitted for {family}",
                rotation.degrees()
            )));
        }
        tau::base_tau_to_param(family, base_tau)
    }

    /// Score and Hessian of `ln c(u, v; θ)` by central finite differences.
    pub fn loglik_derivs(&self, u: f64, v: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        interior(u, v)?;
        let theta = self.params().to_vec();
        let family = self.family;
        let f = |t: &[f64]| -> Result<f64> {
            if !PairCopula::params_valid(family, t) {
                return Err(Error::numerical(format!(
                    "finite-difference stencil {t:?} leaves the {family} domain"
                )));
            }
            Ok(self.with_params_unchecked(t).ln_pdf_clamped(u, v))
        };
        fd::score_hessian(&theta, f)
    }
}

impl fmt::Display for PairCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.rotation != Rotation::R0 {
            write!(f, "{}", self.rotation.degrees())?;
        }
        write!(f, "{:?}", self.params())
    }
}

fn interior(u: f64, v: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("arguments ({u}, {v}) not inside (0,1)^2")))
    }
}
