//! Headered-CSV ingestion with explicit column-role binding.

use super::{Dataset, OutcomeKind};
use crate::error::{Error, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Binds file columns to dataset roles. Covariates are taken either from an
/// explicit list or from every column whose name starts with `x_prefix`,
/// in file order. Optional roles left as `None` are simply not loaded.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub t: String,
    pub yf: String,
    #[serde(default)]
    pub ycf: Option<String>,
    #[serde(default)]
    pub mu0: Option<String>,
    #[serde(default)]
    pub mu1: Option<String>,
    #[serde(default)]
    pub exp_flag: Option<String>,
    #[serde(default)]
    pub x_columns: Option<Vec<String>>,
    #[serde(default = "default_x_prefix")]
    pub x_prefix: String,
    #[serde(default = "default_outcome")]
    pub outcome: OutcomeKind,
}

fn default_x_prefix() -> String {
    "x".to_string()
}

fn default_outcome() -> OutcomeKind {
    OutcomeKind::Continuous
}

impl Default for CsvSchema {
    /// IHDP-style layout: `t,yf,ycf,mu0,mu1,x1..xd`.
    fn default() -> Self {
        CsvSchema {
            t: "t".into(),
            yf: "yf".into(),
            ycf: Some("ycf".into()),
            mu0: Some("mu0".into()),
            mu1: Some("mu1".into()),
            exp_flag: None,
            x_columns: None,
            x_prefix: "x".into(),
            outcome: OutcomeKind::Continuous,
        }
    }
}

fn find_column(header: &[String], name: &str, path: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        Error::invalid(format!("missing required column '{name}' in {path}"))
    })
}

fn find_optional(header: &[String], name: &Option<String>, path: &str) -> Result<Option<usize>> {
    match name {
        None => Ok(None),
        Some(n) => Ok(Some(find_column(header, n, path)?)),
    }
}

/// Loads a headered CSV into a [`Dataset`] with roles bound by `schema`.
/// Rows keep file order. Errors carry the offending row and column.
pub fn load_csv_dataset(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path_str = path.as_ref().display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(|e| Error::invalid(format!("cannot open {path_str}: {e}")))?;

    let header: Vec<String> =
        reader.headers().map_err(|e| Error::invalid(format!("bad header in {path_str}: {e}")))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();

    let t_col = find_column(&header, &schema.t, &path_str)?;
    let yf_col = find_column(&header, &schema.yf, &path_str)?;
    let ycf_col = find_optional(&header, &schema.ycf, &path_str)?;
    let mu0_col = find_optional(&header, &schema.mu0, &path_str)?;
    let mu1_col = find_optional(&header, &schema.mu1, &path_str)?;
    let exp_col = find_optional(&header, &schema.exp_flag, &path_str)?;

    let x_cols: Vec<usize> = match &schema.x_columns {
        Some(names) => {
            let mut cols = Vec::with_capacity(names.len());
            for n in names {
                cols.push(find_column(&header, n, &path_str)?);
            }
            cols
        }
        None => {
            let special: Vec<usize> = [Some(t_col), Some(yf_col), ycf_col, mu0_col, mu1_col, exp_col]
                .into_iter()
                .flatten()
                .collect();
            (0..header.len())
                .filter(|i| !special.contains(i) && header[*i].starts_with(&schema.x_prefix))
                .collect()
        }
    };
    if x_cols.is_empty() {
        return Err(Error::invalid(format!(
            "no covariate columns found in {path_str} (prefix '{}')",
            schema.x_prefix
        )));
    }

    let parse_cell = |raw: &str, row: usize, col: usize| -> Result<f64> {
        raw.trim().parse::<f64>().map_err(|_| Error::Parse {
            path: path_str.clone(),
            row,
            column: header[col].clone(),
            message: format!("non-numeric cell '{raw}'"),
        })
    };

    let mut x_data: Vec<f64> = Vec::new();
    let mut t = Vec::new();
    let mut yf = Vec::new();
    let mut ycf = ycf_col.map(|_| Vec::new());
    let mut mu0 = mu0_col.map(|_| Vec::new());
    let mut mu1 = mu1_col.map(|_| Vec::new());
    let mut exp_flag = exp_col.map(|_| Vec::new());

    for (ridx, record) in reader.records().enumerate() {
        let row = ridx + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path_str.clone(),
            row,
            column: "<record>".into(),
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: path_str.clone(),
                row,
                column: "<record>".into(),
                message: format!("ragged row: {} fields, header has {}", record.len(), header.len()),
            });
        }
        let get = |col: usize| -> &str { record.get(col).unwrap_or("") };

        let t_raw = parse_cell(get(t_col), row, t_col)?;
        if t_raw != 0.0 && t_raw != 1.0 {
            return Err(Error::Parse {
                path: path_str.clone(),
                row,
                column: header[t_col].clone(),
                message: format!("treatment not binary at row {row} (value {t_raw})"),
            });
        }
        t.push(t_raw as u8);
        yf.push(parse_cell(get(yf_col), row, yf_col)?);
        if let (Some(c), Some(v)) = (ycf_col, ycf.as_mut()) {
            v.push(parse_cell(get(c), row, c)?);
        }
        if let (Some(c), Some(v)) = (mu0_col, mu0.as_mut()) {
            v.push(parse_cell(get(c), row, c)?);
        }
        if let (Some(c), Some(v)) = (mu1_col, mu1.as_mut()) {
            v.push(parse_cell(get(c), row, c)?);
        }
        if let (Some(c), Some(v)) = (exp_col, exp_flag.as_mut()) {
            let raw = parse_cell(get(c), row, c)?;
            if raw != 0.0 && raw != 1.0 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    row,
                    column: header[c].clone(),
                    message: format!("exp_flag not binary at row {row}"),
                });
            }
            v.push(raw as u8);
        }
        for &c in &x_cols {
            x_data.push(parse_cell(get(c), row, c)?);
        }
    }

    let n = t.len();
    if n == 0 {
        return Err(Error::invalid(format!("{path_str} contains no data rows")));
    }
    let x = Array2::from_shape_vec((n, x_cols.len()), x_data)
        .expect("row-major covariate buffer matches (n, d)");
    Dataset::new(x, t, yf, ycf, mu0, mu1, exp_flag, schema.outcome)
}
