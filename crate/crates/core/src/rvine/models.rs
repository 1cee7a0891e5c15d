//! Benchmark models used in the simulation studies.
//!
//! Edge tables list conditioned pair, conditioning set, family and Kendall's τ.
//! The 5-dimensional table is written in the labels of its tree figure and
//! relabelled onto the columns of the structure matrix by [`LABEL_MAP_5D`].

use super::matrix::RVineMatrix;
use super::spec::RVineSpec;
use crate::error::{Error, Result};
use crate::pair::{Family, PairCopula, Rotation};

/// One vine edge `c_{a,b|cond}`.
#[derive(Clone, Copy, Debug)]
pub struct EdgeSpec {
    pub a: usize,
    pub b: usize,
    pub cond: &'static [usize],
    pub family: Family,
    pub tau: f64,
}

const fn e(a: usize, b: usize, cond: &'static [usize], family: Family, tau: f64) -> EdgeSpec {
    EdgeSpec { a, b, cond, family, tau }
}

/// Figure label `i` corresponds to data column `LABEL_MAP_5D[i - 1]`.
pub const LABEL_MAP_5D: [usize; 5] = [1, 4, 3, 2, 5];

use Family::{Clayton, Frank, Gauss, Gumbel, Joe};

pub const EDGES_5D: [EdgeSpec; 10] = [
    e(1, 2, &[], Gauss, 0.71),
    e(1, 3, &[], Gauss, 0.33),
    e(1, 4, &[], Clayton, 0.71),
    e(4, 5, &[], Gumbel, 0.74),
    e(2, 4, &[1], Gumbel, 0.38),
    e(3, 4, &[1], Gumbel, 0.47),
    e(1, 5, &[4], Gumbel, 0.33),
    e(2, 3, &[1, 4], Clayton, 0.35),
    e(3, 5, &[1, 4], Clayton, 0.31),
    e(2, 5, &[1, 3, 4], Gauss, 0.13),
];

pub const EDGES_8D: [EdgeSpec; 28] = [
    e(1, 2, &[], Joe, 0.41),
    e(1, 4, &[], Gauss, 0.59),
    e(1, 5, &[], Gauss, 0.59),
    e(1, 6, &[], Frank, 0.23),
    e(3, 6, &[], Frank, 0.19),
    e(4, 7, &[], Clayton, 0.44),
    e(7, 8, &[], Gumbel, 0.64),
    e(2, 6, &[1], Clayton, 0.58),
    e(1, 3, &[6], Gumbel, 0.44),
    e(4, 6, &[1], Frank, 0.11),
    e(4, 5, &[1], Clayton, 0.53),
    e(1, 7, &[4], Clayton, 0.29),
    e(4, 8, &[7], Gauss, 0.53),
    e(5, 6, &[1, 4], Gauss, 0.19),
    e(6, 7, &[1, 4], Frank, 0.07),
    e(1, 8, &[4, 7], Gumbel, 0.22),
    e(3, 4, &[1, 6], Gauss, 0.41),
    e(2, 3, &[1, 6], Gumbel, 0.68),
    e(6, 8, &[1, 4, 7], Clayton, 0.17),
    e(5, 7, &[1, 4, 6], Gauss, 0.09),
    e(3, 5, &[1, 4, 6], Frank, 0.21),
    e(2, 4, &[1, 3, 6], Gumbel, 0.57),
    e(2, 5, &[1, 3, 4, 6], Joe, 0.25),
    e(3, 7, &[1, 4, 5, 6], Gumbel, 0.17),
    e(5, 8, &[1, 4, 6, 7], Frank, 0.02),
    e(2, 7, &[1, 3, 4, 5, 6], Gumbel, 0.31),
    e(3, 8, &[1, 4, 5, 6, 7], Clayton, 0.20),
    e(2, 8, &[1, 3, 4, 5, 6, 7], Frank, 0.03),
];

/// Attach the edges of `table` (after relabelling by `label`) to the cells of `matrix`.
pub fn spec_from_edges(matrix: RVineMatrix, table: &[EdgeSpec], label: impl Fn(usize) -> usize) -> Result<RVineSpec> {
    let d = matrix.dim();
    let mut grid = vec![vec![PairCopula::independence(); d]; d];
    let mut used = vec![false; table.len()];
    for r in 1..d {
        for c in 0..r {
            let (x, y, mut cond) = matrix.edge(r, c);
            cond.sort_unstable();
            let found = table.iter().enumerate().find(|(_, t)| {
                let (a, b) = (label(t.a), label(t.b));
                let mut tc: Vec<usize> = t.cond.iter().map(|&v| label(v)).collect();
                tc.sort_unstable();
                ((a, b) == (x, y) || (a, b) == (y, x)) && tc == cond
            });
            let (i, t) = found.ok_or_else(|| {
                Error::InvalidModel(format!("no edge for cell ({r}, {c}): {}", matrix.edge_label(r, c)))
            })?;
            used[i] = true;
            let theta = PairCopula::tau_to_param(t.family, Rotation::R0, t.tau)?;
            grid[r][c] = PairCopula::new(t.family, Rotation::R0, &theta)?;
        }
    }
    if used.iter().any(|u| !u) {
        return Err(Error::InvalidModel("edge table does not match the structure".into()));
    }
    RVineSpec::new(matrix, &grid)
}

fn matrix_of(rows: &[&[usize]]) -> RVineMatrix {
    RVineMatrix::from_lower(rows).expect("benchmark structure matrices are valid")
}

/// Structure matrix of the 5-dimensional R-vine as printed.
pub fn rvine_5d_matrix() -> RVineMatrix {
    matrix_of(&[&[5], &[4, 4], &[3, 3, 3], &[1, 2, 2, 2], &[2, 1, 1, 1, 1]])
}

/// The same 5-dimensional vine written with a different diagonal.
pub fn rvine_5d_matrix_alt() -> RVineMatrix {
    matrix_of(&[&[4], &[5, 3], &[3, 5, 1], &[2, 2, 5, 2], &[1, 1, 2, 5, 5]])
}

/// 5-dimensional C-vine alternative structure.
pub fn cvine_5d_matrix() -> RVineMatrix {
    matrix_of(&[&[3], &[5, 2], &[2, 5, 1], &[1, 1, 5, 4], &[4, 4, 4, 5, 5]])
}

/// 5-dimensional D-vine alternative structure.
pub fn dvine_5d_matrix() -> RVineMatrix {
    matrix_of(&[&[3], &[4, 2], &[1, 4, 4], &[5, 1, 5, 1], &[2, 5, 1, 5, 5]])
}

/// 8-dimensional R-vine structure.
pub fn rvine_8d_matrix() -> RVineMatrix {
    matrix_of(&[
        &[2],
        &[8, 3],
        &[7, 8, 5],
        &[5, 7, 8, 6],
        &[4, 5, 7, 8, 1],
        &[3, 4, 6, 7, 8, 4],
        &[6, 1, 4, 4, 7, 8, 7],
        &[1, 6, 1, 1, 4, 7, 8, 8],
    ])
}

/// True 5-dimensional model of the power study.
pub fn true_model_5d() -> RVineSpec {
    spec_from_edges(rvine_5d_matrix(), &EDGES_5D, |i| LABEL_MAP_5D[i - 1]).expect("5-dimensional table is consistent")
}

/// True 8-dimensional model of the power study.
pub fn true_model_8d() -> RVineSpec {
    spec_from_edges(rvine_8d_matrix(), &EDGES_8D, |i| i).expect("8-dimensional table is consistent")
}

/// All-Gauss vine on `matrix`: a multivariate Gauss copula once fitted.
pub fn gauss_vine(matrix: RVineMatrix) -> RVineSpec {
    let gauss = PairCopula::new(Gauss, Rotation::R0, &[0.0]).expect("rho = 0 is valid");
    RVineSpec::from_fn(matrix, |_, _| gauss)
}

/// Candidate families for selecting the alternatives' pair copulas.
pub const SELECTION_FAMILIES: [Family; 7] =
    [Family::Independence, Gauss, Family::StudentT, Clayton, Gumbel, Frank, Joe];
