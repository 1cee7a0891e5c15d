//! Copula observation matrices and their CSV representation.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `n x d` matrix of copula observations, every entry strictly inside (0, 1).
///
/// Storage is column-major so each variable is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
}

/// Output of the Rosenblatt transform; same layout and file format as a sample.
pub type PitMatrix = SampleMatrix;

impl SampleMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::Format("sample must have at least one row and one column".into()));
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                let x = data[(i, j)];
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::Format(format!(
                        "entry ({}, {}) = {x} is not strictly inside (0,1)",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SampleMatrix { data })
    }

    /// Build from `d` columns of equal length.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let d = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Format("columns differ in length".into()));
        }
        SampleMatrix::new(DMatrix::from_fn(n, d, |i, j| cols[j][i]))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Format("rows differ in length".into()));
        }
        SampleMatrix::new(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
    }

    pub(crate) fn from_matrix_unchecked(data: DMatrix<f64>) -> Self {
        SampleMatrix { data }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.nrows();
        &self.data.as_slice()[j * n..(j + 1) * n]
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.data.row(t).iter().copied().collect()
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[(t, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> SampleMatrix {
        SampleMatrix { data: self.data.select_rows(idx) }
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Format(format!("CSV line {}: {e}", line + 1)))?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(r) => rows.push(r),
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Format(format!("CSV line {}: {e}", line + 1))),
            }
        }
        SampleMatrix::from_rows(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())?;
        SampleMatrix::from_csv_reader(std::io::BufReader::new(f))
    }

    /// Comma-separated rows without header, shortest round-trip float formatting.
    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let mut buf = Vec::with_capacity(self.ncols());
        for t in 0..self.nrows() {
            buf.clear();
            buf.extend(self.data.row(t).iter().map(|x| x.to_string()));
            wtr.write_record(&buf).map_err(|e| Error::Format(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref())?;
        self.write_csv_to(std::io::BufWriter::new(f))
    }
}
