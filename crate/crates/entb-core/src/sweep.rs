//! Parameter sweeps over the example families, producing per-point clamped
//! bounds in a byte-stable CSV form.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bounds::{best_bound, BoundReport, PairStrategy};
use crate::error::{Error, Result};
use crate::qstate::{family_sweep_param, make_family};

/// One sweep grid point: the parameter value and the clamped bounds.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub param: f64,
    pub ccnr_bound: f64,
    pub ppt_bound: f64,
    pub lurs_bound: f64,
    pub cm_bound: f64,
    /// `max` of the other four columns.
    pub best: f64,
}

impl From<(f64, &BoundReport)> for SweepRow {
    fn from((param, report): (f64, &BoundReport)) -> Self {
        let best = report.ccnr.max(report.ppt).max(report.lur).max(report.cm);
        SweepRow {
            param,
            ccnr_bound: report.ccnr,
            ppt_bound: report.ppt,
            lurs_bound: report.lur,
            cm_bound: report.cm,
            best,
        }
    }
}

/// Uniform inclusive grid of `steps >= 2` points over `[from, to]`.
pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::BadRange(format!("need at least 2 grid points, got {steps}")));
    }
    if !from.is_finite() || !to.is_finite() || from >= to {
        return Err(Error::BadRange(format!("bad interval [{from}, {to}]")));
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// Sweeps `param` of a family over a uniform grid, evaluating all bounds at
/// each point with the given pair strategy. Rows are ordered by parameter
/// value; points are evaluated concurrently.
pub fn sweep_rows(
    family: &str,
    base_params: &BTreeMap<String, String>,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    strategy: &PairStrategy,
) -> Result<Vec<SweepRow>> {
    let natural = family_sweep_param(family)
        .ok_or_else(|| Error::UnknownParam(format!("{param} (family `{family}` has none)")))?;
    if param != natural {
        return Err(Error::UnknownParam(param.to_string()));
    }
    let values = grid(from, to, steps)?;
    values
        .par_iter()
        .map(|&value| {
            let mut params = base_params.clone();
            params.insert(param.to_string(), format!("{value:.17e}"));
            let rho = make_family(family, &params)?;
            let report = best_bound(&rho, strategy)?;
            Ok(SweepRow::from((value, &report)))
        })
        .collect()
}

/// Nine-significant-digit scientific form used for every CSV number.
fn csv_number(x: f64) -> String {
    format!("{x:.8e}")
}

/// The exact CSV header.
pub const CSV_HEADER: &str = "param,ccnr_bound,ppt_bound,lurs_bound,cm_bound,best";

/// Renders rows as CSV with LF line endings; byte-stable for fixed inputs.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_number(row.param));
        for value in [row.ccnr_bound, row.ppt_bound, row.lurs_bound, row.cm_bound, row.best] {
            out.push(',');
            out.push_str(&csv_number(value));
        }
        out.push('\n');
    }
    out
}

/// Parses CSV text produced by [`rows_to_csv`] (used by the test suites).
pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("bad CSV header: {other:?}"))),
    }
    lines
        .map(|line| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{e}: `{f}`"))))
                .collect::<Result<_>>()?;
            if fields.len() != 6 {
                return Err(Error::Parse(format!("row has {} fields", fields.len())));
            }
            Ok(SweepRow {
                param: fields[0],
                ccnr_bound: fields[1],
                ppt_bound: fields[2],
                lurs_bound: fields[3],
                cm_bound: fields[4],
                best: fields[5],
            })
        })
        .collect()
}
