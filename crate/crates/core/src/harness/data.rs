//! Datasets: CSV ingestion, standardization and synthetic block data.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Partition;
use crate::pdcore::{scatter_of, shape, Cholesky, SampleStats, SymMatrix};

/// An `N × D` table of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub names: Vec<String>,
    /// Where the data came from (a path or a generator description).
    pub provenance: String,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, names: Option<Vec<String>>, provenance: impl Into<String>) -> Result<Self> {
        let (n, d) = shape(&rows)?;
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 rows, got {n}")));
        }
        let names = match names {
            Some(names) if names.len() != d => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: names.len(),
                })
            }
            Some(names) => names,
            None => (1..=d).map(|j| format!("x{j}")).collect(),
        };
        Ok(Self {
            rows,
            names,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Rows selected by index, keeping names.
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        let rows = idx.iter().map(|&i| self.rows[i].clone()).collect();
        Dataset::new(rows, Some(self.names.clone()), self.provenance.clone())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_csv_to(File::create(path)?)
    }

    /// Header row of names, then one row per sample.
    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names).map_err(csv_io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads a rectangular numeric CSV. Line numbers in errors are 1-based file
/// lines.
pub fn ingest_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_io)?;
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(k + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if let Some(w) = width {
            if rec.len() != w {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", rec.len()),
                });
            }
        } else {
            width = Some(rec.len());
        }
        if has_header && names.is_none() {
            names = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{cell}` is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: non-finite value `{cell}`", col + 1),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Dataset::new(rows, names, path.display().to_string())
}

/// Centers and scales each column to unit variance (1/N), returning the
/// transformed data and the statistics that reproduce the transform.
pub fn standardize(d: &Dataset) -> Result<(Dataset, SampleStats)> {
    let n = d.n() as f64;
    let dim = d.dim();
    let mut mean = vec![0.0; dim];
    for r in &d.rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; dim];
    for r in &d.rows {
        for j in 0..dim {
            var[j] += (r[j] - mean[j]).powi(2) / n;
        }
    }
    let degenerate: Vec<String> = (0..dim)
        .filter(|&j| var[j] == 0.0 || var[j].sqrt() <= 1e-12 * mean[j].abs())
        .map(|j| d.names[j].clone())
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateColumns(degenerate));
    }
    let scale: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    let scatter = scatter_of(&d.rows, &mean, &scale);
    let stats = SampleStats {
        n: d.n(),
        dim,
        scatter,
        mean,
        scale,
        standardized: true,
    };
    let rows = stats.transform_rows(&d.rows)?;
    let out = Dataset::new(rows, Some(d.names.clone()), d.provenance.clone())?;
    Ok((out, stats))
}

/// Settings for [`synth_blocks`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Group sizes.
    pub groups: Vec<usize>,
    pub n: usize,
    /// Within-group off-diagonal precision is `-within_strength`.
    pub within_strength: f64,
    /// Between-group precision entries are uniform on `(-noise, noise)`.
    pub noise: f64,
    pub seed: u64,
}

/// Precision with unit diagonal, `-within_strength` inside groups and
/// uniform noise between groups. Must be strictly diagonally dominant.
pub fn planted_precision(spec: &SynthSpec) -> Result<(SymMatrix, Partition)> {
    if spec.groups.is_empty() || spec.groups.contains(&0) {
        return Err(Error::InvalidInput("group sizes must be positive".into()));
    }
    if !(spec.within_strength >= 0.0 && spec.noise >= 0.0 && spec.within_strength.is_finite() && spec.noise.is_finite())
    {
        return Err(Error::InvalidInput("strength and noise must be finite and non-negative".into()));
    }
    let labels: Vec<usize> = spec.groups.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
    let p = Partition::from_labels(&labels)?;
    let d = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise > 0.0 {
        Some(Uniform::new(-spec.noise, spec.noise).map_err(|e| Error::InvalidInput(e.to_string()))?)
    } else {
        None
    };
    let mut omega = SymMatrix::identity(d);
    for i in 0..d {
        for j in (i + 1)..d {
            let v = if p.same_group(i, j) {
                -spec.within_strength
            } else {
                noise.map_or(0.0, |u| u.sample(&mut rng))
            };
            omega.set(i, j, v);
        }
    }
    for i in 0..d {
        let off: f64 = (0..d).filter(|&j| j != i).map(|j| omega.get(i, j).abs()).sum();
        if off >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "construction is not diagonally dominant: row {i} has off-diagonal mass {off:.4} >= 1"
            )));
        }
    }
    Ok((omega, p))
}

/// Draws `n` rows from `N(0, Ω^{-1})` with the planted block precision.
pub fn synth_blocks(spec: &SynthSpec) -> Result<(Dataset, Partition, SymMatrix)> {
    let (omega, p) = planted_precision(spec)?;
    let d = omega.dim();
    let chol = Cholesky::factor(&omega).ok_or_else(|| Error::Invariant("planted precision is not PD".into()))?;
    // x = L^{-T} e has covariance (L L^T)^{-1}
    let linv = chol.factor_matrix().clone().try_inverse().ok_or_else(|| Error::Singularity("factor".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rows = Vec::with_capacity(spec.n);
    let mut e = vec![0.0; d];
    for _ in 0..spec.n {
        for v in &mut e {
            *v = StandardNormal.sample(&mut rng);
        }
        let x: Vec<f64> = (0..d).map(|i| (i..d).map(|k| linv[(k, i)] * e[k]).sum()).collect();
        rows.push(x);
    }
    let desc = format!(
        "synth_blocks(groups={:?}, n={}, within={}, noise={}, seed={})",
        spec.groups, spec.n, spec.within_strength, spec.noise, spec.seed
    );
    Ok((Dataset::new(rows, None, desc)?, p, omega))
}

/// Writes a matrix as full symmetric CSV, row-major.
pub fn write_matrix_csv<W: Write>(m: &SymMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in m.to_rows() {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}
