//! Trace CSV and JSON summary files.
//!
//! The CSV has one row per outer iteration plus a final row (`t = T + 1`)
//! for the returned iterate. Floats use 17 significant digits; missing
//! values are empty fields.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::trace::IterateTrace;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "t",
    "f_gap",
    "grad_norm",
    "v_abs",
    "delta_or_zeta",
    "step_norm",
    "inner_iters",
    "lanczos_iters",
    "hvp_cum",
    "wall_ms",
];

/// Companion JSON of a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub algorithm: String,
    /// `None` when the driver failed before producing a trace.
    pub termination: Option<String>,
    pub certified: bool,
    pub outer_iterations: usize,
    pub final_f_gap: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub final_lambda_min: Option<f64>,
    pub total_hvp: usize,
    pub final_x: Vec<f64>,
    /// `x_t` per iteration when snapshots were recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_snapshots: Vec<Vec<f64>>,
    pub config: BTreeMap<String, String>,
    pub error: Option<String>,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn trace_to_csv(trace: Option<&IterateTrace>) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    let Some(trace) = trace else {
        return s;
    };
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            opt_float(r.f_gap),
            float(r.grad_norm),
            opt_float(r.v_abs),
            opt_float(r.delta_or_zeta),
            float(r.step_norm),
            r.inner_iters,
            r.lanczos_iters.map(|v| v.to_string()).unwrap_or_default(),
            r.hvp_cum,
            float(r.wall_ms),
        );
    }
    let _ = writeln!(
        s,
        "{},{},{},,,,,,{},",
        trace.records.len() + 1,
        opt_float(trace.final_f_gap),
        float(trace.final_grad_norm),
        trace.total_hvp,
    );
    s
}

/// Parsed trace CSV: header plus rows of optional numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TraceTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty trace CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::InvalidConfig(format!(
                    "trace row {} has {} fields, header has {}",
                    i + 1,
                    fields.len(),
                    columns.len()
                )));
            }
            let row = fields
                .iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::InvalidConfig(format!("bad number '{f}' in trace row {}", i + 1)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// A trace CSV with its JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub table: TraceTable,
    pub summary: TraceSummary,
}

impl TraceFile {
    /// Reads `<stem>.csv` and `<stem>.json`; `path` may name either.
    pub fn read(path: &Path) -> Result<Self> {
        let csv = path.with_extension("csv");
        let json = path.with_extension("json");
        let table = TraceTable::parse(&fs::read_to_string(&csv)?)?;
        let summary: TraceSummary = serde_json::from_str(&fs::read_to_string(&json)?)?;
        Ok(Self { table, summary })
    }
}
