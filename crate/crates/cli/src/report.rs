//! Text outputs: metric CSVs, per-image fusion traces and three-decimal
//! scalar formatting.

use std::fmt::Write as _;

use salfuse::fusion::FusionTrace;
use salfuse::metrics::MetricReport;

/// `0.898 -> ".898"`, `1.0 -> "1.000"`.
pub fn short_decimal(v: f64) -> String {
    let s = format!("{v:.3}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

/// Per-image rows in sample-id order, then the dataset footer rows.
pub fn report_csv(report: &MetricReport) -> String {
    let mut out = String::from("sample_id,mae,sm\n");
    for (id, s) in &report.per_image {
        writeln!(out, "{id},{:.6},{:.6}", s.mae, s.sm).unwrap();
    }
    let d = &report.dataset;
    writeln!(out, "dataset.mae_mean,{:.6},", d.mae_mean).unwrap();
    writeln!(out, "dataset.max_f,{:.6},", d.max_f).unwrap();
    writeln!(out, "dataset.sm_mean,{:.6},", d.sm_mean).unwrap();
    out
}

pub fn pr_csv(report: &MetricReport) -> String {
    let pr = &report.dataset.pr;
    let mut out = String::from("threshold,precision,recall\n");
    for ((t, p), r) in pr.thresholds.iter().zip(&pr.precision).zip(&pr.recall) {
        writeln!(out, "{t:.6},{p:.6},{r:.6}").unwrap();
    }
    out
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One tab-separated `key=value` record per iteration, then a summary line.
pub fn trace_log(sample_id: &str, trace: &FusionTrace) -> String {
    let mut out = format!("sample={sample_id}\n");
    for (i, rec) in trace.per_iteration.iter().enumerate() {
        writeln!(
            out,
            "iteration={}\tscores={}\tweights={}\tconvergence_f={}",
            i + 1,
            join(&rec.branch_scores),
            join(&rec.weights),
            rec.convergence_f
        )
        .unwrap();
    }
    writeln!(
        out,
        "iterations={}\tconverged={}",
        trace.iterations, trace.converged
    )
    .unwrap();
    out
}
