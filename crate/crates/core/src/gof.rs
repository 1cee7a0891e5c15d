//! Registry of the fifteen goodness-of-fit tests and their statistics.

use std::fmt;
use std::str::FromStr;

use crate::data::SampleMatrix;
use crate::error::{Error, Result};
use crate::infomatrix::{info_matrices, ir_statistic, white_statistic};
use crate::pair::{UMAX, UMIN};
use crate::rvine::{simulate, RVineSpec};
use crate::special::chi2_cdf;
use crate::statistics::{ecp2_stat, ecp_distance, uni_stat, EcpKind, UniKind};
use crate::transforms::{aggregate, rosenblatt, AggregationRule};

/// Registered test identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestId {
    Ir,
    White,
    Breymann(UniKindId),
    Berg(UniKindId),
    Berg2(UniKindId),
    Ecp(EcpKindId),
    Ecp2(EcpKindId),
}

/// Orderable mirror of [`UniKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UniKindId {
    Ad,
    Cvm,
    Ks,
}

/// Orderable mirror of [`EcpKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EcpKindId {
    Cvm,
    Ks,
}

impl From<UniKindId> for UniKind {
    fn from(k: UniKindId) -> Self {
        match k {
            UniKindId::Ad => UniKind::AD,
            UniKindId::Cvm => UniKind::CvM,
            UniKindId::Ks => UniKind::KS,
        }
    }
}

impl From<EcpKindId> for EcpKind {
    fn from(k: EcpKindId) -> Self {
        match k {
            EcpKindId::Cvm => EcpKind::Cvm,
            EcpKindId::Ks => EcpKind::Ks,
        }
    }
}

impl TestId {
    pub const ALL: [TestId; 15] = [
        TestId::Ir,
        TestId::White,
        TestId::Breymann(UniKindId::Ad),
        TestId::Breymann(UniKindId::Cvm),
        TestId::Breymann(UniKindId::Ks),
        TestId::Berg(UniKindId::Ad),
        TestId::Berg(UniKindId::Cvm),
        TestId::Berg(UniKindId::Ks),
        TestId::Berg2(UniKindId::Ad),
        TestId::Berg2(UniKindId::Cvm),
        TestId::Berg2(UniKindId::Ks),
        TestId::Ecp(EcpKindId::Cvm),
        TestId::Ecp(EcpKindId::Ks),
        TestId::Ecp2(EcpKindId::Cvm),
        TestId::Ecp2(EcpKindId::Ks),
    ];

    pub fn name(self) -> String {
        let uni = |k: UniKindId| match k {
            UniKindId::Ad => "ad",
            UniKindId::Cvm => "cvm",
            UniKindId::Ks => "ks",
        };
        let ecp = |k: EcpKindId| match k {
            EcpKindId::Cvm => "cvm",
            EcpKindId::Ks => "ks",
        };
        match self {
            TestId::Ir => "ir".into(),
            TestId::White => "white".into(),
            TestId::Breymann(k) => format!("breymann-{}", uni(k)),
            TestId::Berg(k) => format!("berg-{}", uni(k)),
            TestId::Berg2(k) => format!("berg2-{}", uni(k)),
            TestId::Ecp(k) => format!("ecp-{}", ecp(k)),
            TestId::Ecp2(k) => format!("ecp2-{}", ecp(k)),
        }
    }

    /// All registered names, comma separated.
    pub fn registered_names() -> String {
        TestId::ALL.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")
    }

    fn needs_pit(self) -> bool {
        matches!(self, TestId::Breymann(_) | TestId::Berg(_) | TestId::Berg2(_) | TestId::Ecp2(_))
    }

    fn needs_info(self) -> bool {
        matches!(self, TestId::Ir | TestId::White)
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestId::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            Error::domain(format!("unknown test '{s}'; registered tests: {}", TestId::registered_names()))
        })
    }
}

/// Tuning of the statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GofOptions {
    /// Size of the surrogate sample standing in for the fitted copula in ECP;
    /// `None` means ten times the sample size.
    pub approx_n: Option<usize>,
}

impl Default for GofOptions {
    fn default() -> Self {
        GofOptions { approx_n: None }
    }
}

fn uni_from_aggregate(kind: UniKindId, y: &SampleMatrix, rule: AggregationRule) -> Result<f64> {
    let s = aggregate(y, rule)?;
    let d = y.ncols() as f64;
    let value = if rule == AggregationRule::BREYMANN {
        uni_stat(kind.into(), &s, |x| chi2_cdf(x, d).clamp(UMIN, UMAX))?
    } else {
        let top = rule.range_max(y.ncols()).ok_or_else(|| Error::domain("aggregation rule without a bounded range"))?;
        uni_stat(kind.into(), &s, |x| (x / top).clamp(UMIN, UMAX))?
    };
    Ok(value.value)
}

/// Statistics of several tests on one fitted model, sharing the PIT, the
/// information matrices and the ECP surrogate sample. Each entry fails separately.
pub fn statistics(
    tests: &[TestId],
    fitted: &RVineSpec,
    data: &SampleMatrix,
    seed: u64,
    opts: GofOptions,
) -> Vec<Result<f64>> {
    let pit = if tests.iter().any(|t| t.needs_pit()) { Some(rosenblatt(fitted, data)) } else { None };
    let info = if tests.iter().any(|t| t.needs_info()) { Some(info_matrices(fitted, data)) } else { None };
    let surrogate = if tests.iter().any(|t| matches!(t, TestId::Ecp(_))) {
        Some(simulate(fitted, opts.approx_n.unwrap_or(10 * data.nrows()), seed))
    } else {
        None
    };
    let shared_err = |e: &Error| Error::numerical(e.to_string());
    tests
        .iter()
        .map(|&test| match test {
            TestId::Ir => match info.as_ref().expect("computed above") {
                Ok(im) => ir_statistic(im).map(|r| r.ir),
                Err(e) => Err(shared_err(e)),
            },
            TestId::White => match info.as_ref().expect("computed above") {
                Ok(im) => white_statistic(im, fitted, data).map(|w| w.t_n),
                Err(e) => Err(shared_err(e)),
            },
            TestId::Ecp(k) => match surrogate.as_ref().expect("computed above") {
                Ok(r) => ecp_distance(k.into(), data, r).map(|s| s.value),
                Err(e) => Err(shared_err(e)),
            },
            _ => match pit.as_ref().expect("computed above") {
                Ok(y) => match test {
                    TestId::Breymann(k) => uni_from_aggregate(k, y, AggregationRule::BREYMANN),
                    TestId::Berg(k) => uni_from_aggregate(k, y, AggregationRule::BERG),
                    TestId::Berg2(k) => uni_from_aggregate(k, y, AggregationRule::BERG2),
                    TestId::Ecp2(k) => Ok(ecp2_stat(k.into(), y).value),
                    _ => unreachable!("information and ECP tests handled above"),
                },
                Err(e) => Err(shared_err(e)),
            },
        })
        .collect()
}

/// Statistic of a single test.
pub fn statistic(test: TestId, fitted: &RVineSpec, data: &SampleMatrix, seed: u64) -> Result<f64> {
    statistics(&[test], fitted, data, seed, GofOptions::default()).pop().expect("one test requested")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        assert_eq!(TestId::ALL.len(), 15);
        for t in TestId::ALL {
            assert_eq!(t.name().parse::<TestId>().unwrap(), t);
        }
        let err = "nope".parse::<TestId>().unwrap_err().to_string();
        assert!(err.contains("ecp2-ks") && err.contains("ir"));
    }
}
