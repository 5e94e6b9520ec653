//! Per-context-word inference diagnostics as `key=value` lines.

use std::fmt::Write as _;

use depfsl_core::fewshot::Inference;

pub fn diagnostics_text(inference: &Inference) -> String {
    let mut out = String::new();
    for d in &inference.diagnostics {
        let path = match &d.path {
            Some(p) if p.is_empty() => "-".to_string(),
            Some(p) => p.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
            None => "-".to_string(),
        };
        let skipped = d.skipped.map(|s| s.to_string()).unwrap_or_else(|| "no".into());
        writeln!(
            out,
            "sentence={} index={} form={} skipped={} offset={} distance={} path={} weight={}",
            d.sentence, d.index, d.form, skipped, d.offset, d.distance, path, d.weight
        )
        .unwrap();
    }
    writeln!(out, "used={} skipped_oov={}", inference.used(), inference.skipped_oov()).unwrap();
    out
}
