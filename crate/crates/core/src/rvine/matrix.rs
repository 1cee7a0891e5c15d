//! Lower-triangular R-vine structure matrices.

use std::fmt;

use crate::error::{Error, Result};

/// One violated structural requirement, with 1-based cell coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub message: String,
}

impl Violation {
    fn global(msg: &str) -> Self {
        Violation { row: None, col: None, message: msg.to_string() }
    }

    fn at(r: usize, c: usize, msg: &str) -> Self {
        Violation { row: Some(r + 1), col: Some(c + 1), message: msg.to_string() }
    }

    fn col(c: usize, msg: &str) -> Self {
        Violation { row: None, col: Some(c + 1), message: msg.to_string() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.row, self.col) {
            (Some(r), Some(c)) => write!(f, "cell ({r},{c}): {}", self.message),
            (None, Some(c)) => write!(f, "column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

/// Validated R-vine matrix. Labels are 1-based variable indices; cells above the
/// diagonal are zero. The diagonal may be any permutation; evaluation uses the
/// normalized relabeling with diagonal `d, d-1, ..., 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RVineMatrix {
    d: usize,
    m: Vec<Vec<usize>>,
}

/// Structural diagnostics for a square matrix given row by row.
pub fn check_matrix(m: &[Vec<usize>]) -> Vec<Violation> {
    let d = m.len();
    if d < 2 {
        return vec![Violation::global("dimension < 2")];
    }
    let mut out = Vec::new();
    for (r, row) in m.iter().enumerate() {
        if row.len() != d {
            out.push(Violation { row: Some(r + 1), col: None, message: format!("row has {} entries, expected {d}", row.len()) });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for r in 0..d {
        for c in 0..=r {
            if m[r][c] < 1 || m[r][c] > d {
                out.push(Violation::at(r, c, &format!("entry {} outside 1..{d}", m[r][c])));
            }
        }
        for c in r + 1..d {
            if m[r][c] != 0 {
                out.push(Violation::at(r, c, "entry above the diagonal must be empty"));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut seen = vec![false; d + 1];
    for c in 0..d {
        if std::mem::replace(&mut seen[m[c][c]], true) {
            out.push(Violation::at(c, c, "diagonal not a permutation"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let n = normalize(m);
    for c in 0..d - 1 {
        let mut present = vec![false; d + 1];
        let mut is_set = true;
        for r in c..d {
            if std::mem::replace(&mut present[n[r][c]], true) {
                is_set = false;
            }
        }
        if !is_set {
            out.push(Violation::col(c, "column not a set"));
            continue;
        }
        // normalized column c holds label d-c; entries below must be labels of later diagonals
        if (c + 1..d).any(|r| n[r][c] >= d - c) {
            out.push(Violation::col(c, "column entries not among the labels of later diagonal cells"));
        }
    }
    if !out.is_empty() {
        return out;
    }
    for c in 0..d.saturating_sub(2) {
        for r in c + 1..d - 1 {
            if !argument_available(&n, r, c) {
                out.push(Violation::at(r, c, "proximity condition fails: conditional argument not produced by any earlier tree"));
            }
        }
    }
    out
}

/// Relabel so that the diagonal reads `d, d-1, ..., 1`.
fn normalize(m: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let d = m.len();
    let mut map = vec![0; d + 1];
    for c in 0..d {
        map[m[c][c]] = d - c;
    }
    (0..d).map(|r| (0..d).map(|c| if c <= r { map[m[r][c]] } else { 0 }).collect()).collect()
}

/// Max of column `c` from row `r` downward in a normalized matrix.
fn col_max(n: &[Vec<usize>], r: usize, c: usize) -> usize {
    (r..n.len()).map(|k| n[k][c]).max().unwrap_or(0)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Whether the second argument of the pair in cell `(r, c)` is produced by the
/// column picked by the max-matrix rule.
fn argument_available(n: &[Vec<usize>], r: usize, c: usize) -> bool {
    let d = n.len();
    let mt = col_max(n, r, c);
    let cj = d - mt;
    if cj <= c || cj >= d {
        return false;
    }
    let cond = sorted((r + 1..d).map(|k| n[k][c]).collect());
    if mt == n[r][c] {
        // direct: C(n[cj][cj] | column cj below row r)
        r >= cj && sorted((r + 1..d).map(|k| n[k][cj]).collect()) == cond
    } else {
        // indirect: C(n[r+1][cj] | n[cj][cj], column cj below row r+1)
        if r + 1 <= cj || r + 1 >= d || n[r + 1][cj] != n[r][c] {
            return false;
        }
        let mut other: Vec<usize> = (r + 2..d).map(|k| n[k][cj]).collect();
        other.push(n[cj][cj]);
        sorted(other) == cond
    }
}

impl RVineMatrix {
    /// Build from a full square matrix (zeros above the diagonal).
    pub fn new(m: Vec<Vec<usize>>) -> Result<Self> {
        let v = check_matrix(&m);
        if !v.is_empty() {
            let msg: Vec<String> = v.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidModel(msg.join("; ")));
        }
        Ok(RVineMatrix { d: m.len(), m })
    }

    /// Build from the lower triangle given row by row (row `k` has `k` entries).
    pub fn from_lower(rows: &[&[usize]]) -> Result<Self> {
        let d = rows.len();
        let mut m = vec![vec![0; d]; d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r + 1 {
                return Err(Error::InvalidModel(format!("row {} must have {} entries", r + 1, r + 1)));
            }
            m[r][..=r].copy_from_slice(row);
        }
        RVineMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, r: usize, c: usize) -> usize {
        self.m[r][c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.m
    }

    /// Matrix relabeled to the normalized diagonal `d, ..., 1`.
    pub fn normalized(&self) -> Vec<Vec<usize>> {
        normalize(&self.m)
    }

    /// Max-matrix of the normalized form: entry `(r, c)` is the max of column `c` from row `r` down.
    pub fn max_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.normalized();
        (0..self.d).map(|r| (0..self.d).map(|c| if c <= r { col_max(&n, r, c) } else { 0 }).collect()).collect()
    }

    /// Tree level (1-based) of the pair stored at 0-based cell `(r, c)`, `r > c`.
    pub fn tree_of(&self, r: usize) -> usize {
        self.d - r
    }

    /// Conditioned pair and conditioning set of the edge in cell `(r, c)`, original labels.
    pub fn edge(&self, r: usize, c: usize) -> (usize, usize, Vec<usize>) {
        (self.m[c][c], self.m[r][c], sorted((r + 1..self.d).map(|k| self.m[k][c]).collect()))
    }

    /// Human-readable edge label such as `2,5|1,3`.
    pub fn edge_label(&self, r: usize, c: usize) -> String {
        let (a, b, cond) = self.edge(r, c);
        if cond.is_empty() {
            format!("{a},{b}")
        } else {
            let cs: Vec<String> = cond.iter().map(ToString::to_string).collect();
            format!("{a},{b}|{}", cs.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lower(rows: &[&[usize]]) -> Vec<Vec<usize>> {
        let d = rows.len();
        rows.iter()
            .map(|r| {
                let mut v = r.to_vec();
                v.resize(d, 0);
                v
            })
            .collect()
    }

    #[test]
    fn printed_five_dim_matrix_is_valid() {
        let m = lower(&[&[5], &[4, 4], &[3, 3, 3], &[1, 2, 2, 2], &[2, 1, 1, 1, 1]]);
        assert!(check_matrix(&m).is_empty());
    }

    #[test]
    fn duplicate_entry_is_reported() {
        let m = lower(&[&[5], &[4, 4], &[3, 3, 3], &[1, 2, 2, 2], &[1, 1, 1, 1, 1]]);
        let v = check_matrix(&m);
        assert!(v.iter().any(|x| x.message == "column not a set" && x.col == Some(1)), "{v:?}");
    }

    #[test]
    fn one_by_one_is_rejected() {
        let v = check_matrix(&[vec![1]]);
        assert_eq!(v[0].message, "dimension < 2");
    }

    #[test]
    fn proximity_violation_is_detected() {
        // tree 1 edges 4-3, 3-1, 2-1; the tree-2 edge 4,2|3 would need 3-2
        let m = lower(&[&[4], &[1, 3], &[2, 2, 2], &[3, 1, 1, 1]]);
        let v = check_matrix(&m);
        assert!(v.iter().any(|x| x.message.starts_with("proximity")), "{v:?}");
    }

    #[test]
    fn general_diagonal_is_accepted() {
        // C-vine with root 3 in labels where the diagonal is not d..1
        let m = RVineMatrix::from_lower(&[&[3], &[5, 2], &[2, 5, 1], &[1, 1, 5, 4], &[4, 4, 4, 5, 5]]).unwrap();
        assert_eq!(m.normalized()[0][0], 5);
        assert_eq!(m.edge_label(3, 0), "3,1|4");
    }

    #[test]
    fn edges_of_printed_matrix() {
        let m = RVineMatrix::from_lower(&[&[5], &[4, 4], &[3, 3, 3], &[1, 2, 2, 2], &[2, 1, 1, 1, 1]]).unwrap();
        assert_eq!(m.edge_label(4, 0), "5,2");
        assert_eq!(m.edge_label(1, 0), "5,4|1,2,3");
        assert_eq!(m.tree_of(4), 1);
        assert_eq!(m.max_matrix()[3][0], 2);
    }
}
