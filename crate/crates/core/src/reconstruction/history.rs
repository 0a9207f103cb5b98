use std::fmt::Write as _;

use crate::geometry::Vec2;
use crate::pde::CostReport;
use crate::{Error, Result};

pub const HISTORY_HEADER: &str = "iter,cost,misfit,penalty,multiplier,perimeter,grad_norm,step,hausdorff";

/// One outer iteration: the cost and gradient at the start of the
/// iteration and the step then taken.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub iter: usize,
    pub cost: CostReport,
    pub grad_norm: f64,
    pub step: f64,
    /// Distance to the true Γ, when known.
    pub hausdorff: Option<f64>,
    /// Γ polyline the cost was evaluated on.
    pub gamma: Vec<Vec2>,
    /// The mesh was rebuilt just before this iteration.
    pub remeshed: bool,
    /// Largest ADMM box violation after this iteration's projection.
    pub box_violation: Option<f64>,
    pub warning: Option<String>,
}

/// One parsed history row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub cost: f64,
    pub misfit: f64,
    pub penalty: f64,
    pub multiplier: f64,
    pub perimeter: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub hausdorff: Option<f64>,
}

impl From<&RunRecord> for HistoryRow {
    fn from(r: &RunRecord) -> Self {
        HistoryRow {
            iter: r.iter,
            cost: r.cost.value,
            misfit: r.cost.misfit,
            penalty: r.cost.penalty,
            multiplier: r.cost.multiplier,
            perimeter: r.cost.perimeter,
            grad_norm: r.grad_norm,
            step: r.step,
            hausdorff: r.hausdorff,
        }
    }
}

/// History CSV; an absent Hausdorff distance is an empty field.
pub fn format_history_csv<'a>(rows: impl IntoIterator<Item = &'a RunRecord>) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in rows {
        let row = HistoryRow::from(r);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},",
            row.iter, row.cost, row.misfit, row.penalty, row.multiplier, row.perimeter, row.grad_norm, row.step
        );
        if let Some(h) = row.hausdorff {
            let _ = write!(out, "{h}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_history_csv(text: &str) -> Result<Vec<HistoryRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == HISTORY_HEADER => {}
        _ => return Err(Error::parse("history line 1", "missing header")),
    }
    let mut rows: Vec<HistoryRow> = Vec::new();
    for (n, line) in lines {
        let ctx = format!("history line {}", n + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(Error::parse(&ctx, format!("expected 9 fields, found {}", fields.len())));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::parse(&ctx, format!("bad number `{s}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(&ctx, "non-finite value"))
            }
        };
        let iter: usize =
            fields[0].parse().map_err(|_| Error::parse(&ctx, format!("bad iteration `{}`", fields[0])))?;
        if rows.last().is_some_and(|r| r.iter >= iter) {
            return Err(Error::parse(&ctx, "iterations must increase"));
        }
        rows.push(HistoryRow {
            iter,
            cost: num(fields[1])?,
            misfit: num(fields[2])?,
            penalty: num(fields[3])?,
            multiplier: num(fields[4])?,
            perimeter: num(fields[5])?,
            grad_norm: num(fields[6])?,
            step: num(fields[7])?,
            hausdorff: if fields[8].is_empty() { None } else { Some(num(fields[8])?) },
        });
    }
    Ok(rows)
}

/// Snapshot file name for an iteration.
pub fn snapshot_name(iter: usize) -> String {
    format!("gamma_{iter:06}.csv")
}
