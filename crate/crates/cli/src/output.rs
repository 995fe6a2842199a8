//! Tabular output. Every table has one row per grid point; complex values
//! are split into `re`/`im` columns and floats use Rust's shortest
//! round-trip formatting, so identical inputs give identical bytes.

use serde::{Deserialize, Serialize};
use spincorr::experiment::{DiagnoseReport, ExactRow, ExperimentSpec, ProtocolRow, SampleRow};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    /// Appends another table's rows; the column sets must agree.
    pub fn extend(&mut self, other: Table) -> Result<(), CliError> {
        if self.columns.is_empty() {
            *self = other;
            return Ok(());
        }
        if self.columns != other.columns {
            return Err(CliError::Config("runs produce incompatible tables".into()));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |k| format!("{prefix}_{k}"))
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn exact_table(spec: &ExperimentSpec, rows: &[ExactRow]) -> Table {
    let mut t = Table::new(cols(&["l", "t2", "re_c", "im_c"]));
    let l = spec.l.value();
    t.rows = rows.iter().map(|r| vec![l.into(), r.t2.into(), r.re_c.into(), r.im_c.into()]).collect();
    t
}

pub fn protocol_table(spec: &ExperimentSpec, rows: &[ProtocolRow]) -> Table {
    let n = spec.lambda_l.len();
    let mut columns = cols(&["l", "t2"]);
    columns.extend(indexed("script_c", n));
    columns.extend(cols(&["re_c", "im_c", "exact_re_c", "exact_im_c", "abs_dev_re_c"]));
    let mut t = Table::new(columns);
    let l = spec.l.value();
    for r in rows {
        let mut row: Vec<Cell> = vec![l.into(), r.t2.into()];
        row.extend(r.script_c.iter().map(|&c| Cell::from(c)));
        row.extend([r.re_c, r.im_c, r.exact_re_c, r.exact_im_c, (r.re_c - r.exact_re_c).abs()].map(Cell::from));
        t.rows.push(row);
    }
    t
}

pub fn sample_table(spec: &ExperimentSpec, rows: &[SampleRow]) -> Table {
    let n = spec.lambda_l.len();
    let mut columns = cols(&["l", "t2"]);
    columns.extend(indexed("mean_script_c", n));
    columns.extend(indexed("std_script_c", n));
    columns.extend(cols(&[
        "re_c_mean",
        "re_c_std",
        "im_c_mean",
        "im_c_std",
        "re_c_limit",
        "exact_re_c",
        "exact_im_c",
        "systematic_re_c",
    ]));
    let mut t = Table::new(columns);
    let l = spec.l.value();
    for r in rows {
        let mut row: Vec<Cell> = vec![l.into(), r.t2.into()];
        row.extend(r.mean_script_c.iter().chain(&r.std_script_c).map(|&c| Cell::from(c)));
        row.extend(
            [
                r.re_c_mean,
                r.re_c_std,
                r.im_c_mean,
                r.im_c_std,
                r.re_c_limit,
                r.exact_re_c,
                r.exact_im_c,
                r.systematic(),
            ]
            .map(Cell::from),
        );
        t.rows.push(row);
    }
    t
}

pub fn diagnose_table(report: &DiagnoseReport) -> Table {
    let mut t = Table::new(cols(&[
        "l",
        "state",
        "site",
        "metric_full",
        "metric_interior",
        "completeness",
        "ancilla_symmetry_deviation",
    ]));
    t.rows.push(vec![
        report.l.value().into(),
        Cell::Text(report.state.name().into()),
        (report.site as f64).into(),
        report.metric_full.into(),
        report.metric_interior.into(),
        report.completeness.into(),
        report.ancilla_symmetry_deviation.into(),
    ]);
    t
}

/// Columns of the γ profile, used in JSON output of `diagnose`.
pub fn profile_table(report: &DiagnoseReport) -> Table {
    let mut t = Table::new(cols(&["m", "gamma_plus_norm", "gamma_minus_norm"]));
    t.rows = report.profile.iter().map(|&(m, p, q)| vec![m.into(), p.into(), q.into()]).collect();
    t
}
