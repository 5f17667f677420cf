//! Report serialization and the comparison mode.
//!
//! Every command emits either a JSON document or a CSV file. The data
//! body is deterministic for a fixed configuration; generation metadata
//! (the `run` object in JSON, the `# generated:` line in CSV) is the
//! only part excluded by `--compare`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};

/// Formats a float with 17 significant digits so CSV reports round-trip
/// exactly through text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => String::new(),
    }
}

/// The generation-metadata JSON object, excluded from comparisons.
pub fn run_meta() -> Value {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({ "generated_unix": now })
}

/// The shared `meta` object carried by every JSON report.
pub fn config_meta(cfg: &RunConfig) -> Value {
    json!({
        "params": cfg.params,
        "p_spec": cfg.p_spec.label(),
        "tolerances": cfg.tol,
    })
}

/// The shared `#`-prefixed preamble of every CSV report. Only the
/// `# generated:` line is excluded from comparisons.
pub fn csv_preamble(cfg: &RunConfig) -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "# generated: {now}");
    let _ = writeln!(out, "# alpha: {}", fmt_f64(cfg.params.alpha));
    let _ = writeln!(out, "# beta: {}", fmt_f64(cfg.params.beta));
    let _ = writeln!(out, "# epsilon: {}", fmt_f64(cfg.params.epsilon));
    let _ = writeln!(out, "# s0: {}", fmt_f64(cfg.params.s0));
    let _ = writeln!(out, "# p: {}", cfg.p_spec.label());
    let _ = writeln!(out, "# quad_rel_tol: {}", fmt_f64(cfg.tol.quad_rel_tol));
    let _ = writeln!(out, "# tail_rel_tol: {}", fmt_f64(cfg.tol.tail_rel_tol));
    let _ = writeln!(out, "# margin_min: {}", fmt_f64(cfg.tol.margin_min));
    out
}

/// Serializes a JSON document with sorted keys and a trailing newline.
pub fn render_json(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("report is serializable");
    text.push('\n');
    text
}

/// Strips generation metadata, leaving the deterministic data body.
pub fn data_body(content: &str, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(content
            .lines()
            .filter(|line| !line.starts_with("# generated:"))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(line);
                acc.push('\n');
                acc
            })),
        OutputFormat::Json => {
            let mut doc: Value =
                serde_json::from_str(content).context("comparison target is not valid JSON")?;
            if let Some(map) = doc.as_object_mut() {
                map.remove("run");
            }
            Ok(render_json(&doc))
        }
    }
}

/// Compares the produced report against a reference file, ignoring
/// generation metadata. Returns true when the data bodies agree.
pub fn compare_against(content: &str, format: OutputFormat, reference: &Path) -> Result<bool> {
    let other = fs::read_to_string(reference)
        .with_context(|| format!("cannot read comparison file {}", reference.display()))?;
    Ok(data_body(content, format)? == data_body(&other, format)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_body_ignores_generation_line() {
        let a = "# generated: 100\n# alpha: 2e2\nm,c\n1,5e-3\n";
        let b = "# generated: 999\n# alpha: 2e2\nm,c\n1,5e-3\n";
        assert_eq!(
            data_body(a, OutputFormat::Csv).unwrap(),
            data_body(b, OutputFormat::Csv).unwrap()
        );
        let c = "# generated: 100\n# alpha: 2e2\nm,c\n1,6e-3\n";
        assert_ne!(
            data_body(a, OutputFormat::Csv).unwrap(),
            data_body(c, OutputFormat::Csv).unwrap()
        );
    }

    #[test]
    fn json_body_ignores_run_object() {
        let a = r#"{"run":{"generated_unix":1},"verdict":{"status":"certified"}}"#;
        let b = r#"{"run":{"generated_unix":2},"verdict":{"status":"certified"}}"#;
        assert_eq!(
            data_body(a, OutputFormat::Json).unwrap(),
            data_body(b, OutputFormat::Json).unwrap()
        );
    }

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for &x in &[2.5e-5, std::f64::consts::PI, -1.0 / 3.0, 1e-300] {
            let text = fmt_f64(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back, x, "{text}");
        }
    }
}
