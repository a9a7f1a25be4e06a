use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::SusceptibilityResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
    pub axis_in: String,
    pub axis_out: String,
    pub order: usize,
    pub pathway: String,
}

/// One row per grid point; `omega` is the last (first-applied) frequency.
pub fn result_rows(r: &SusceptibilityResult, axis_in: &str, axis_out: &str, pathway: &str) -> Vec<CsvRow> {
    r.frequencies
        .iter()
        .zip(&r.values)
        .map(|(f, v)| CsvRow {
            omega: *f.last().unwrap_or(&0.0),
            re: v.re,
            im: v.im,
            axis_in: axis_in.into(),
            axis_out: axis_out.into(),
            order: r.order,
            pathway: pathway.into(),
        })
        .collect()
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes rows with 17 significant digits, enough to reproduce every double.
pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega", "re", "im", "axis_in", "axis_out", "order", "pathway"])?;
    for r in rows {
        w.write_record([
            fmt(r.omega),
            fmt(r.re),
            fmt(r.im),
            r.axis_in.clone(),
            r.axis_out.clone(),
            r.order.to_string(),
            r.pathway.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
