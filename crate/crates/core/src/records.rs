//! On-disk formats: coefficient records and matrices as JSON, Pareto fronts
//! and demo reports as CSV.
//!
//! Coefficients are written as `{:.16e}` decimal strings (17 significant
//! digits), which parse back to the identical double. CSV output uses `,`,
//! a header row and LF line endings.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::{CoefficientSet, Provenance};
use crate::lindblad::DemoReport;
use crate::regularized::ParetoFront;
use crate::{CMatrix, C64};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record: {0}")]
    Malformed(String),
}

/// Serialised coefficient set with its error and subnormalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub m: usize,
    pub eta: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub coefficients: Vec<String>,
    /// Subnormalisation at unit operator scale.
    pub alpha: f64,
    pub epsilon: f64,
}

pub fn format_coefficient(x: f64) -> String {
    format!("{x:.16e}")
}

impl CoefficientRecord {
    pub fn new(set: &CoefficientSet, alpha: f64, epsilon: f64) -> Self {
        Self {
            m: set.m,
            eta: set.eta,
            provenance: set.provenance,
            lambda: set.provenance.lambda(),
            coefficients: set.coefficients.iter().map(|&x| format_coefficient(x)).collect(),
            alpha,
            epsilon,
        }
    }

    pub fn coefficient_set(&self) -> Result<CoefficientSet, RecordError> {
        let values = self
            .coefficients
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| RecordError::Malformed(format!("coefficient {s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != self.m {
            return Err(RecordError::Malformed(format!("m = {} but {} coefficients", self.m, values.len())));
        }
        Ok(CoefficientSet { m: self.m, eta: self.eta, coefficients: values, provenance: self.provenance })
    }

    pub fn to_json(&self) -> Result<String, RecordError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Square complex matrix as `{dim, entries: [[re, im], …]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    /// Vectorisation convention for superoperators, e.g. `"column"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectorization: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Result<Self, RecordError> {
        if m.nrows() != m.ncols() {
            return Err(RecordError::Malformed(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        let dim = m.nrows();
        let entries = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]);
        Ok(Self { dim, entries: entries.collect(), vectorization: None })
    }

    pub fn to_matrix(&self) -> Result<CMatrix, RecordError> {
        if self.dim == 0 {
            return Err(RecordError::Malformed("dim must be positive".into()));
        }
        if self.entries.len() != self.dim * self.dim {
            return Err(RecordError::Malformed(format!(
                "dim {} needs {} entries, found {}",
                self.dim,
                self.dim * self.dim,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(RecordError::Malformed("entries must be finite".into()));
        }
        Ok(CMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(|[re, im]| C64::new(*re, *im))))
    }

    pub fn to_json(&self) -> Result<String, RecordError> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

#[derive(Serialize)]
struct ParetoRow {
    lambda: f64,
    epsilon: f64,
    alpha: f64,
}

/// `lambda,epsilon,alpha`, rows by descending `λ`.
pub fn write_pareto_csv<W: Write>(front: &ParetoFront, out: W) -> Result<(), RecordError> {
    let mut rows: Vec<ParetoRow> =
        front.points.iter().map(|p| ParetoRow { lambda: p.lambda, epsilon: p.epsilon, alpha: p.alpha }).collect();
    rows.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    let mut w = csv_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DemoRow<'a> {
    m: usize,
    strategy: &'a str,
    error: f64,
    alpha: f64,
    cost: f64,
    delta_u: f64,
}

/// `m,strategy,error,alpha,cost,delta_u`.
pub fn write_demo_csv<W: Write>(reports: &[DemoReport], out: W) -> Result<(), RecordError> {
    let mut w = csv_writer(out);
    for r in reports {
        w.serialize(DemoRow {
            m: r.m,
            strategy: r.strategy.label(),
            error: r.statevector_error,
            alpha: r.alpha,
            cost: r.cost,
            delta_u: r.unitarity_defect,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a finite-difference error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineRow {
    pub tau: f64,
    pub order: usize,
    pub error: f64,
}

/// `tau,order,error`.
pub fn write_baseline_csv<W: Write>(rows: &[BaselineRow], out: W) -> Result<(), RecordError> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
