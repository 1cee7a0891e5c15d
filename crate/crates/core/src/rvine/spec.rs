//! Full R-vine model: structure matrix plus one pair copula per edge.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{check_matrix, RVineMatrix, Violation};
use crate::error::{Error, Result};
use crate::pair::PairCopula;

/// Model `RV = (V, B(V), theta)`.
///
/// Pair copulas are stored on the cells of the structure matrix: the pair at
/// 0-based cell `(r, c)`, `r > c`, joins the diagonal variable of column `c`
/// with the variable `m[r][c]` given the entries of column `c` below row `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct RVineSpec {
    matrix: RVineMatrix,
    pairs: Vec<PairCopula>,
    /// `(cell, parameter slot)` for every free parameter, in tree order.
    index: Vec<(usize, usize)>,
}

/// Serialized model layout: full square matrices, cells outside the strict
/// lower triangle `null` (the structure matrix keeps its diagonal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub d: usize,
    pub matrix: Vec<Vec<Option<usize>>>,
    pub families: Vec<Vec<Option<u32>>>,
    pub params: Vec<Vec<Option<f64>>>,
    pub params2: Vec<Vec<Option<f64>>>,
}

fn build_index(d: usize, pairs: &[PairCopula]) -> Vec<(usize, usize)> {
    let mut index = Vec::new();
    for r in (1..d).rev() {
        for c in 0..r {
            let cell = r * d + c;
            for k in 0..pairs[cell].nparams() {
                index.push((cell, k));
            }
        }
    }
    index
}

impl RVineSpec {
    /// Assemble a model; `pair_at(r, c)` is called for every strict lower cell.
    pub fn from_fn(matrix: RVineMatrix, mut pair_at: impl FnMut(usize, usize) -> PairCopula) -> Self {
        let d = matrix.dim();
        let mut pairs = vec![PairCopula::independence(); d * d];
        for r in 1..d {
            for c in 0..r {
                pairs[r * d + c] = pair_at(r, c);
            }
        }
        let index = build_index(d, &pairs);
        RVineSpec { matrix, pairs, index }
    }

    /// Build from a `d x d` grid of pair copulas (only strict lower cells are read).
    pub fn new(matrix: RVineMatrix, grid: &[Vec<PairCopula>]) -> Result<Self> {
        let d = matrix.dim();
        if grid.len() != d || grid.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidModel(format!("pair grid must be {d}x{d}")));
        }
        Ok(RVineSpec::from_fn(matrix, |r, c| grid[r][c]))
    }

    /// All pairs independent.
    pub fn independence(matrix: RVineMatrix) -> Self {
        RVineSpec::from_fn(matrix, |_, _| PairCopula::independence())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &RVineMatrix {
        &self.matrix
    }

    /// Pair at 0-based cell `(r, c)`, `r > c`.
    pub fn pair(&self, r: usize, c: usize) -> &PairCopula {
        &self.pairs[r * self.dim() + c]
    }

    pub(crate) fn pairs(&self) -> &[PairCopula] {
        &self.pairs
    }

    /// Copy with the pair at `(r, c)` replaced.
    pub fn with_pair(&self, r: usize, c: usize, pc: PairCopula) -> Self {
        let d = self.dim();
        let mut pairs = self.pairs.clone();
        pairs[r * d + c] = pc;
        let index = build_index(d, &pairs);
        RVineSpec { matrix: self.matrix.clone(), pairs, index }
    }

    /// Number of free parameters `p`.
    pub fn nparams(&self) -> usize {
        self.index.len()
    }

    /// `(row, col, slot)` of every free parameter in vector order.
    pub fn param_cells(&self) -> Vec<(usize, usize, usize)> {
        let d = self.dim();
        self.index.iter().map(|&(cell, k)| (cell / d, cell % d, k)).collect()
    }

    pub(crate) fn param_index(&self) -> &[(usize, usize)] {
        &self.index
    }

    /// Free parameters, tree by tree (tree 1 first), columns left to right.
    pub fn params(&self) -> Vec<f64> {
        self.index.iter().map(|&(cell, k)| self.pairs[cell].params()[k]).collect()
    }

    /// Copy with a new parameter vector, each pair checked against its domain.
    pub fn with_params(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.nparams() {
            return Err(Error::domain(format!("expected {} parameters, got {}", self.nparams(), theta.len())));
        }
        let mut pairs = self.pairs.clone();
        let mut buf: Vec<[f64; 2]> = pairs.iter().map(|p| {
            let mut a = [0.0; 2];
            a[..p.nparams()].copy_from_slice(p.params());
            a
        }).collect();
        for (&(cell, k), &x) in self.index.iter().zip(theta) {
            buf[cell][k] = x;
        }
        for (cell, pc) in pairs.iter_mut().enumerate() {
            if pc.nparams() > 0 {
                *pc = pc.with_params(&buf[cell][..pc.nparams()])?;
            }
        }
        Ok(RVineSpec { matrix: self.matrix.clone(), pairs, index: self.index.clone() })
    }

    /// Structural and parameter diagnostics.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = check_matrix(self.matrix.rows());
        let d = self.dim();
        for r in 1..d {
            for c in 0..r {
                let pc = self.pair(r, c);
                if !PairCopula::params_valid(pc.family(), pc.params()) {
                    v.push(Violation {
                        row: Some(r + 1),
                        col: Some(c + 1),
                        message: format!("parameters {:?} outside the {} domain", pc.params(), pc.family()),
                    });
                }
            }
        }
        v
    }

    pub fn to_json(&self) -> ModelJson {
        let d = self.dim();
        let lower = |f: &dyn Fn(usize, usize) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
            (0..d).map(|r| (0..d).map(|c| if c < r { f(r, c) } else { None }).collect()).collect()
        };
        ModelJson {
            d,
            matrix: (0..d)
                .map(|r| (0..d).map(|c| if c <= r { Some(self.matrix.get(r, c)) } else { None }).collect())
                .collect(),
            families: (0..d)
                .map(|r| (0..d).map(|c| if c < r { Some(self.pair(r, c).code()) } else { None }).collect())
                .collect(),
            params: lower(&|r, c| Some(self.pair(r, c).params().first().copied().unwrap_or(0.0))),
            params2: lower(&|r, c| Some(self.pair(r, c).params().get(1).copied().unwrap_or(0.0))),
        }
    }

    /// Collect every structural and parameter problem of a serialized model.
    pub fn diagnose_json(j: &ModelJson) -> Vec<Violation> {
        let d = j.d;
        let shape_ok = |name: &str, rows: usize, cols: &dyn Fn(usize) -> usize| -> Option<Violation> {
            if rows != d || (0..rows).any(|r| cols(r) != d) {
                Some(Violation { row: None, col: None, message: format!("{name} must be {d}x{d}") })
            } else {
                None
            }
        };
        let mut out: Vec<Violation> = [
            shape_ok("matrix", j.matrix.len(), &|r| j.matrix[r].len()),
            shape_ok("families", j.families.len(), &|r| j.families[r].len()),
            shape_ok("params", j.params.len(), &|r| j.params[r].len()),
            shape_ok("params2", j.params2.len(), &|r| j.params2[r].len()),
        ]
        .into_iter()
        .flatten()
        .collect();
        if d < 2 {
            out.insert(0, Violation { row: None, col: None, message: "dimension < 2".into() });
        }
        if !out.is_empty() {
            return out;
        }
        let m: Vec<Vec<usize>> = (0..d)
            .map(|r| (0..d).map(|c| j.matrix[r][c].unwrap_or(0)).collect())
            .collect();
        out.extend(check_matrix(&m));
        for r in 1..d {
            for c in 0..r {
                let code = j.families[r][c].unwrap_or(0);
                let p1 = j.params[r][c].unwrap_or(0.0);
                let p2 = j.params2[r][c].unwrap_or(0.0);
                if let Err(e) = PairCopula::from_code(code, p1, p2) {
                    out.push(Violation { row: Some(r + 1), col: Some(c + 1), message: e.to_string() });
                }
            }
        }
        out
    }

    pub fn from_json(j: &ModelJson) -> Result<Self> {
        let v = RVineSpec::diagnose_json(j);
        if !v.is_empty() {
            let msg: Vec<String> = v.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidModel(msg.join("; ")));
        }
        let d = j.d;
        let m: Vec<Vec<usize>> =
            (0..d).map(|r| (0..d).map(|c| if c <= r { j.matrix[r][c].unwrap_or(0) } else { 0 }).collect()).collect();
        let matrix = RVineMatrix::new(m)?;
        let mut err = None;
        let spec = RVineSpec::from_fn(matrix, |r, c| {
            let pc = PairCopula::from_code(
                j.families[r][c].unwrap_or(0),
                j.params[r][c].unwrap_or(0.0),
                j.params2[r][c].unwrap_or(0.0),
            );
            pc.unwrap_or_else(|e| {
                err.get_or_insert(e);
                PairCopula::independence()
            })
        });
        match err {
            Some(e) => Err(e),
            None => Ok(spec),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("model serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: ModelJson = serde_json::from_str(s).map_err(|e| Error::Format(format!("model JSON: {e}")))?;
        RVineSpec::from_json(&j)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        RVineSpec::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    /// Kendall's τ of every pair as a `d x d` lower-triangular grid.
    pub fn taus(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| if c < r { self.pair(r, c).tau() } else { 0.0 }).collect()).collect()
    }
}
