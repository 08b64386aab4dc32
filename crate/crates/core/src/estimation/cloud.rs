use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::spectral::Portfolio;

/// `n` i.i.d. loss vectors of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCloud {
    #[serde(skip)]
    data: Vec<f64>,
    n: usize,
    d: usize,
    model: String,
    seed: u64,
}

impl SampleCloud {
    pub fn new(data: Vec<f64>, d: usize, model: impl Into<String>, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("cloud dimension must be positive"));
        }
        if data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "cloud data length {} is not a positive multiple of d = {d}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cloud entries must be finite"));
        }
        Ok(Self { n: data.len() / d, data, d, model: model.into(), seed })
    }

    pub fn from_rows(rows: &[Vec<f64>], model: impl Into<String>, seed: u64) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            check_dim(d, r.len())?;
            data.extend_from_slice(r);
        }
        Self::new(data, d, model, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.d)
    }

    /// `‖X_i‖_1` per row.
    pub fn norms(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().map(|x| x.abs()).sum()).collect()
    }

    /// Portfolio losses `ξᵀX_i` per row.
    pub fn losses(&self, xi: &Portfolio) -> Result<Vec<f64>> {
        check_dim(self.d, xi.dim())?;
        Ok(self.rows().map(|r| dot(xi.weights(), r)).collect())
    }

    /// Column `j` (0-based).
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.d {
            return Err(Error::invalid(format!("column {j} out of range for d = {}", self.d)));
        }
        Ok(self.rows().map(|r| r[j]).collect())
    }

    /// CSV with header `x1,...,xd`; values use the shortest round-trip representation.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((1..=self.d).map(|j| format!("x{j}")))?;
        for r in self.rows() {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, model: impl Into<String>, seed: u64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let d = rdr.headers()?.len();
        let mut data = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            check_dim(d, rec.len())?;
            for field in rec.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("cannot parse '{field}' as a number")))?;
                data.push(v);
            }
        }
        Self::new(data, d, model, seed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    pub fn load(path: &Path, model: impl Into<String>, seed: u64) -> Result<Self> {
        Self::read_csv(File::open(path)?, model, seed)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
