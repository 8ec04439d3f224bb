use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::integrate::Trajectory;

/// Column-major numeric table written as CSV or JSON.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_number(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        s.push('\n');
        Ok(s)
    }

    /// Write `<dir>/<stem>.<ext>` and return the file name.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<String> {
        let name = format!("{stem}.{}", format.extension());
        let body = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json()?,
        };
        let mut f = fs::File::create(dir.join(&name))?;
        f.write_all(body.as_bytes())?;
        Ok(name)
    }
}

/// Column names `t,w0..w{n-1},v0..v{n-1},inertia` followed by `extras`.
pub fn trajectory_columns(time_column: &str, dim: usize, extras: &[&str]) -> Vec<String> {
    let mut cols = vec![time_column.to_string()];
    cols.extend((0..dim).map(|i| format!("w{i}")));
    cols.extend((0..dim).map(|i| format!("v{i}")));
    cols.push("inertia".into());
    cols.extend(extras.iter().map(|s| s.to_string()));
    cols
}

/// Append every sample of `traj`, followed by the constant `extras`.
pub fn push_trajectory(table: &mut Table, traj: &Trajectory, extras: &[f64]) {
    for (state, inertia) in traj.states.iter().zip(&traj.inertia) {
        let mut row = Vec::with_capacity(table.columns.len());
        row.push(state.t);
        row.extend(state.w.iter());
        row.extend(state.v.iter());
        row.push(*inertia);
        row.extend_from_slice(extras);
        table.push(row);
    }
}
