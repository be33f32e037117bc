//! Stable text, CSV and JSON rendering of run results.
//!
//! Rendered output is byte-deterministic: probabilities print at 12 fixed
//! decimal digits in text and CSV, JSON objects carry their keys in sorted
//! order, and the wall time is reported on stderr by the CLI rather than
//! inside the rendered payload.

use serde_json::{json, Value};

use crate::prescriptions::DivergenceReport;
use crate::table::ProbabilityTable;

/// Result of one CLI evaluation.
pub struct RunReport {
    pub engine: &'static str,
    pub kind: String,
    pub table: ProbabilityTable,
    pub normalization: f64,
    /// Present for comparisons: the kind and table compared against, plus the
    /// divergence between the two.
    pub divergence: Option<(String, ProbabilityTable, DivergenceReport)>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

fn fixed(p: f64) -> String {
    format!("{p:.12}")
}

/// Renders the stdout payload (excludes wall time; see module docs).
pub fn render(report: &RunReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_text(report),
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => render_json(report),
    }
}

fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    match &report.divergence {
        None => {
            for (label, p) in report.table.entries() {
                out.push_str(&format!("{label} {}\n", fixed(*p)));
            }
        }
        Some((against_kind, against, div)) => {
            out.push_str(&format!("prescription {}\n", report.kind));
            for (label, p) in report.table.entries() {
                out.push_str(&format!("{label} {}\n", fixed(*p)));
            }
            out.push_str(&format!("against {against_kind}\n"));
            for (label, p) in against.entries() {
                out.push_str(&format!("{label} {}\n", fixed(*p)));
            }
            out.push_str(&format!("max_abs_diff {}\n", fixed(div.max_abs_diff)));
            out.push_str(&format!("total_variation {}\n", fixed(div.total_variation)));
        }
    }
    out
}

fn render_csv(report: &RunReport) -> String {
    let mut out = String::new();
    match &report.divergence {
        None => {
            out.push_str("label,probability\n");
            for (label, p) in report.table.entries() {
                out.push_str(&format!("{label},{}\n", fixed(*p)));
            }
        }
        Some((_, against, div)) => {
            out.push_str("label,p_primary,p_against\n");
            for ((label, p), (_, q)) in report.table.entries().iter().zip(against.entries()) {
                out.push_str(&format!("{label},{},{}\n", fixed(*p), fixed(*q)));
            }
            out.push_str(&format!("max_abs_diff,{}\n", fixed(div.max_abs_diff)));
            out.push_str(&format!("total_variation,{}\n", fixed(div.total_variation)));
        }
    }
    out
}

fn table_value(table: &ProbabilityTable) -> Value {
    Value::Array(
        table
            .entries()
            .iter()
            .map(|(label, p)| json!({ "label": label, "probability": p }))
            .collect(),
    )
}

fn render_json(report: &RunReport) -> String {
    let mut root = json!({
        "engine": report.engine,
        "kind": report.kind,
        "normalization": report.normalization,
        "table": table_value(&report.table),
    });
    if let Some((against_kind, against, div)) = &report.divergence {
        let per_label: Vec<Value> = div
            .per_label
            .iter()
            .map(|(label, pa, pb)| json!({ "label": label, "p_against": pb, "p_primary": pa }))
            .collect();
        root["against"] = json!({
            "kind": against_kind,
            "normalization": against.normalization(),
            "table": table_value(against),
        });
        root["divergence"] = json!({
            "max_abs_diff": div.max_abs_diff,
            "per_label": per_label,
            "total_variation": div.total_variation,
        });
    }
    let mut text = serde_json::to_string_pretty(&root).expect("report serializes");
    text.push('\n');
    text
}

/// CSV for the stage-2 grid sweep: one row per (θ, φ) with engine tables and
/// analytic targets, then a trailing max-deviation line. Undefined cells
/// (degenerate conditioning) print as `nan`.
pub fn render_sweep_csv(sweep: &crate::wignerfriend::SweepResult) -> String {
    let mut out = String::new();
    out.push_str("theta,phi,p00,p01,p10,p11,alpha_sq_0,alpha_sq_1\n");
    for row in &sweep.rows {
        let cell = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), fixed);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fixed(row.theta),
            fixed(row.phi),
            cell(row.p[0][0]),
            cell(row.p[0][1]),
            cell(row.p[1][0]),
            cell(row.p[1][1]),
            fixed(row.alpha_sq[0]),
            fixed(row.alpha_sq[1]),
        ));
    }
    out.push_str(&format!("# max deviation {:.12e}\n", sweep.max_deviation));
    out
}
