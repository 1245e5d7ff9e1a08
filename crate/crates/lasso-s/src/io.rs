//! CSV data files, report emission and atomic writes.
//!
//! Numeric cells are written with 17 significant digits so that every
//! double round-trips.

use std::io::{Read, Write};
use std::path::Path;

use lasso_s_core::path::PathEvent;
use lasso_s_core::sim::{MeanSe, StepSummary};
use lasso_s_core::{DesignMatrix, LassoPath, Matrix, TrialReport};

use crate::error::{AppError, AppResult};

/// `{:.16e}`: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write to a temporary file in the target directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| AppError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

/// Rectangular numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub names: Vec<String>,
    /// row-major
    pub rows: Vec<Vec<f64>>,
}

impl DataFile {
    pub fn read(path: &Path) -> AppResult<Self> {
        let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(file)
    }

    pub fn parse(reader: impl Read) -> AppResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| AppError::Parse(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(AppError::Parse("missing header row".into()));
        }
        if let Some(dup) = names
            .iter()
            .enumerate()
            .find(|(i, n)| names[..*i].contains(n))
        {
            return Err(AppError::Parse(format!(
                "duplicate column name {:?}",
                dup.1
            )));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| AppError::Parse(e.to_string()))?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, cell)| match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(AppError::Parse(format!(
                        "row {}, column {:?}: {cell:?} is not a finite number",
                        line + 1,
                        names[j]
                    ))),
                })
                .collect::<AppResult<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(AppError::Parse("no data rows".into()));
        }
        Ok(Self { names, rows })
    }

    /// Predictor matrix, response vector and predictor names. Without a
    /// response name the last column is the response.
    pub fn split(&self, response: Option<&str>) -> AppResult<(Matrix, Vec<f64>, Vec<String>)> {
        let r =
            match response {
                Some(name) => self.names.iter().position(|n| n == name).ok_or_else(|| {
                    AppError::Parse(format!("response column {name:?} not found"))
                })?,
                None => self.names.len() - 1,
            };
        if self.names.len() < 2 {
            return Err(AppError::Parse("need at least one predictor column".into()));
        }
        let predictors: Vec<usize> = (0..self.names.len()).filter(|&j| j != r).collect();
        let x = Matrix::from_fn(self.rows.len(), predictors.len(), |i, j| {
            self.rows[i][predictors[j]]
        });
        let y = self.rows.iter().map(|row| row[r]).collect();
        let names = predictors.iter().map(|&j| self.names[j].clone()).collect();
        Ok((x, y, names))
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> AppResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::Parse(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| AppError::Parse(e.to_string()))
}

fn column_label(design: &DesignMatrix, names: &[String], j: usize) -> String {
    match design.raw_index(j) {
        Some(r) => names[r].clone(),
        None => "(intercept)".to_string(),
    }
}

/// One row per transition point: the event there and the active-set size after it.
pub fn path_csv(
    path: &LassoPath,
    design: &DesignMatrix,
    names: &[String],
    lambda_factor: f64,
) -> AppResult<Vec<u8>> {
    let header: Vec<String> = ["step", "lambda", "event", "column", "name", "k_active"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for (s, seg) in path.segments.iter().enumerate() {
        let (ev, j) = match seg.event {
            PathEvent::Enter(j) => ("enter", j),
            PathEvent::Leave(j) => ("leave", j),
        };
        rows.push(vec![
            s.to_string(),
            fmt_num(seg.lambda_hi * lambda_factor),
            ev.to_string(),
            j.to_string(),
            column_label(design, names, j),
            seg.k_active().to_string(),
        ]);
    }
    rows.push(vec![
        path.segments.len().to_string(),
        fmt_num(0.0),
        "end".to_string(),
        String::new(),
        String::new(),
        path.segments.last().map_or(0, |s| s.k_active()).to_string(),
    ]);
    csv_bytes(&header, rows)
}

/// Coefficients on the original data scale at every transition point.
pub fn coefficients_csv(
    path: &LassoPath,
    design: &DesignMatrix,
    names: &[String],
    lambda_factor: f64,
) -> AppResult<Vec<u8>> {
    let mut header = vec!["lambda".to_string(), "intercept".to_string()];
    header.extend(names.iter().cloned());
    let rows = path.transition_lambdas.iter().map(|&lam| {
        let (offset, coefs) = design.original_coefficients(&path.beta_at(lam, design.m()));
        let mut row = vec![fmt_num(lam * lambda_factor), fmt_num(offset)];
        row.extend(coefs.into_iter().map(fmt_num));
        row
    });
    csv_bytes(&header, rows)
}

const STAT_COLUMNS: [&str; 11] = [
    "alpha",
    "risk_plain",
    "risk_scaled",
    "sure_plain",
    "sure_scaled",
    "sure_plain_true",
    "sure_scaled_true",
    "diff_plain",
    "diff_scaled",
    "diff_plain_true",
    "diff_scaled_true",
];

fn stats(s: &StepSummary) -> [MeanSe; 11] {
    [
        s.alpha,
        s.risk_plain,
        s.risk_scaled,
        s.sure_plain,
        s.sure_scaled,
        s.sure_plain_true,
        s.sure_scaled_true,
        s.diff_plain,
        s.diff_scaled,
        s.diff_plain_true,
        s.diff_scaled_true,
    ]
}

/// One row per recorded step, each statistic as a mean and an SE column.
pub fn report_csv(report: &TrialReport) -> AppResult<Vec<u8>> {
    let mut header: Vec<String> = ["step", "trials", "mean_lambda", "mean_k"]
        .map(String::from)
        .to_vec();
    for c in STAT_COLUMNS {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_se"));
    }
    let rows = report.steps.iter().map(|s| {
        let mut row = vec![
            s.step.to_string(),
            s.trials.to_string(),
            fmt_num(s.mean_lambda),
            fmt_num(s.mean_k),
        ];
        for m in stats(s) {
            row.push(fmt_num(m.mean));
            row.push(fmt_num(m.se));
        }
        row
    });
    csv_bytes(&header, rows)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> AppResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| AppError::Parse(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}
