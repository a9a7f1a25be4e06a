//! Assembly of susceptibilities from windowed amplitudes, query-cost
//! formulas, file output and the end-to-end pipeline.

mod cost;
mod io;
mod pipeline;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cost::{cost_report, qpe_baseline_report, CostInputs, CostLine, CostReport, QpeReport};
pub use io::{read_csv, result_rows, write_csv, CsvRow};
pub use pipeline::{
    parse_axes, parse_grid, parse_toy, run_pipeline, Grid, Mode, ModelSource, PipelineArgs, PipelineOutput,
    WINDOW_FREQUENCY_NOTE,
};

use crate::error::{Error, Result};
use crate::estimation::{Window, WindowEstimate};
use crate::oracle::SusceptibilityResult;

const ZETA_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    /// Innermost window first. Windows may be padded by `margin` on each side.
    pub windows: Vec<Window>,
    pub margin: f64,
    /// First-acting axis first.
    pub axes: Vec<usize>,
    pub value: Complex64,
    pub eps_filter: f64,
    pub eps_stat: f64,
    pub zeta: f64,
}

impl TableEntry {
    pub fn centers(&self) -> Vec<f64> {
        self.windows.iter().map(|w| 0.5 * (w.0 + w.1)).collect()
    }

    pub fn from_estimate(e: &WindowEstimate, margin: f64) -> Self {
        Self {
            windows: e.windows.clone(),
            margin,
            axes: e.axes.clone(),
            value: e.value,
            eps_filter: e.eps_filter,
            eps_stat: e.eps_stat,
            zeta: e.zeta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub order: usize,
    pub gamma: f64,
    pub entries: Vec<TableEntry>,
}

impl ResponseTable {
    pub fn new(order: usize, gamma: f64) -> Self {
        Self { order, gamma, entries: vec![] }
    }

    pub fn push(&mut self, e: TableEntry) -> Result<()> {
        if e.windows.len() != self.order || e.axes.len() != self.order + 1 {
            return Err(Error::input("entry shape does not match the table order"));
        }
        // Estimates may exceed zeta by at most their own error budget.
        if e.value.norm() > e.zeta + e.eps_filter + e.eps_stat + ZETA_SLACK {
            return Err(Error::input(format!("|d| = {} exceeds zeta = {}", e.value.norm(), e.zeta)));
        }
        self.entries.push(e);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn with_axes(&self, axes: &[usize]) -> Vec<&TableEntry> {
        self.entries.iter().filter(|e| e.axes == axes).collect()
    }
}

fn check_disjoint(entries: &[&TableEntry]) -> Result<()> {
    let mut order: Vec<&&TableEntry> = entries.iter().collect();
    order.sort_by(|a, b| a.windows[0].0.total_cmp(&b.windows[0].0));
    for pair in order.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let overlap = p.windows[0].1 - q.windows[0].0;
        if overlap > p.margin + q.margin + 1e-12 {
            return Err(Error::input(format!(
                "windows [{}, {}) and [{}, {}) overlap beyond their margins",
                p.windows[0].0, p.windows[0].1, q.windows[0].0, q.windows[0].1
            )));
        }
    }
    Ok(())
}

/// Binned linear polarizability `alpha_ij`, window frequencies at midpoints.
///
/// Needs entries with axes `[j, i]`; entries with `[i, j]` supply the
/// counter-rotating term and default to the conjugate when absent.
pub fn assemble_alpha1(table: &ResponseTable, i: usize, j: usize, grid: &[f64], gamma: f64) -> Result<SusceptibilityResult> {
    if !(gamma > 0.0) {
        return Err(Error::input("gamma must be positive"));
    }
    if table.order != 1 {
        return Err(Error::input("alpha1 assembly needs an order-1 table"));
    }
    let fwd = table.with_axes(&[j, i]);
    let bwd = table.with_axes(&[i, j]);
    check_disjoint(&fwd)?;
    let terms: Vec<(f64, Complex64, Complex64)> = fwd
        .iter()
        .map(|e| {
            let c = e.centers()[0];
            let back = bwd
                .iter()
                .find(|b| b.windows == e.windows)
                .map(|b| b.value)
                .unwrap_or_else(|| e.value.conj());
            (c, e.value, back)
        })
        .collect();
    let values = grid
        .iter()
        .map(|&w| {
            terms
                .iter()
                .map(|&(c, a, b)| a / Complex64::new(c - w, -gamma) + b / Complex64::new(c + w, gamma))
                .sum()
        })
        .collect();
    Ok(SusceptibilityResult {
        order: 1,
        frequencies: grid.iter().map(|&w| vec![w]).collect(),
        values,
        gamma,
        axes: vec![i, j],
    })
}

/// First-pathway third-order term from nested box amplitudes.
///
/// `axes` is `(i, i3, i2, i1)`. Entries must carry axes `[i1, i, i3, i2]`
/// (first-acting first) and three windows: the first excitation, then the
/// states reached by the detection and third dipoles. Grid points are
/// `(w3, w2, w1)`.
pub fn assemble_alpha3(table: &ResponseTable, axes: [usize; 4], grid: &[[f64; 3]], gamma: f64) -> Result<SusceptibilityResult> {
    if !(gamma > 0.0) {
        return Err(Error::input("gamma must be positive"));
    }
    if table.order != 3 {
        return Err(Error::input("alpha3 assembly needs an order-3 table of nested estimates"));
    }
    let [i, i3, i2, i1] = axes;
    let boxes = table.with_axes(&[i1, i, i3, i2]);
    let values = grid
        .iter()
        .map(|&[w3, w2, w1]| {
            let (o1, o2, o3) = (w1, w1 + w2, w1 + w2 + w3);
            boxes
                .iter()
                .map(|e| {
                    let c = e.centers();
                    e.value
                        / (Complex64::new(c[0] - o1, -gamma)
                            * Complex64::new(c[0] - c[2] - o2, -gamma)
                            * Complex64::new(c[0] - c[1] - o3, -gamma))
                })
                .sum()
        })
        .collect();
    Ok(SusceptibilityResult {
        order: 3,
        frequencies: grid.iter().map(|g| g.to_vec()).collect(),
        values,
        gamma,
        axes: axes.to_vec(),
    })
}

/// `max |a - b| / max |b|` over paired values.
pub fn sup_relative_deviation(approx: &[Complex64], reference: &[Complex64]) -> f64 {
    let scale = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let worst = approx.iter().zip(reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}
