//! Evaluation report writers.

use std::fmt::Write as _;

use depfsl_core::eval::EvalReport;

/// `metric<TAB>value` lines, then `skipped<TAB>n` and one
/// `skip<TAB>item<TAB>reason` line per skipped item.
pub fn machine_report(report: &EvalReport) -> String {
    let mut out = String::new();
    writeln!(out, "task\t{}", report.task).unwrap();
    for (k, v) in &report.metrics {
        writeln!(out, "{k}\t{v}").unwrap();
    }
    writeln!(out, "short_items\t{}", report.short_items).unwrap();
    writeln!(out, "skipped\t{}", report.skipped.len()).unwrap();
    for s in &report.skipped {
        writeln!(out, "skip\t{}\t{}", s.item, s.reason).unwrap();
    }
    out
}

pub fn human_report(report: &EvalReport) -> String {
    let width = report
        .metrics
        .iter()
        .map(|(k, _)| k.len())
        .chain(["metric".len()])
        .max()
        .unwrap_or(6);
    let mut out = String::new();
    writeln!(out, "{} evaluation", report.task).unwrap();
    writeln!(out, "{:<width$}  value", "metric").unwrap();
    writeln!(out, "{:-<width$}  {:-<10}", "", "").unwrap();
    for (k, v) in &report.metrics {
        writeln!(out, "{k:<width$}  {v:.4}").unwrap();
    }
    if report.short_items > 0 {
        writeln!(out, "{} item/size pairs had fewer sentences than requested", report.short_items).unwrap();
    }
    writeln!(out, "skipped: {}", report.skipped.len()).unwrap();
    for s in &report.skipped {
        writeln!(out, "  {}: {}", s.item, s.reason).unwrap();
    }
    out
}
