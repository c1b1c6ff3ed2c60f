//! The CSV table format shared by every experiment.
//!
//! A table starts with `#`-prefixed header lines, then the column row
//! `experiment,n,annulus,param,value,stderr,replicas,seed`, then one row per
//! estimate. Numbers use the shortest representation that round-trips,
//! in scientific notation outside `[1e-4, 1e15)`, so equal values always
//! print identically.

use std::fmt::Write;

use crate::estimate::Estimate;

/// Column names, in order.
pub const COLUMNS: [&str; 8] = ["experiment", "n", "annulus", "param", "value", "stderr", "replicas", "seed"];

/// One table row.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub n: u32,
    /// The annulus in its display form, or empty.
    pub annulus: String,
    /// The swept parameter as `name=value`, or empty.
    pub param: String,
    pub value: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl Row {
    pub fn new(experiment: &str, n: u32, annulus: impl ToString, param: impl ToString, e: &Estimate) -> Self {
        Row {
            experiment: experiment.to_string(),
            n,
            annulus: annulus.to_string(),
            param: param.to_string(),
            value: e.value,
            stderr: e.stderr,
            replicas: e.replicas,
            seed: e.seed,
        }
    }
}

/// Quotes a field when it contains a separator, quote or line break.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Formats a number: plain decimal for moderate magnitudes, scientific
/// notation otherwise.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Renders a table. Header lines must not contain line breaks; each is
/// written after `# `.
pub fn render(header: &[String], rows: &[Row]) -> String {
    let mut out = String::new();
    for h in header {
        for line in h.lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "{}", COLUMNS.join(",")).unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            field(&r.experiment),
            r.n,
            field(&r.annulus),
            field(&r.param),
            number(r.value),
            number(r.stderr),
            r.replicas,
            r.seed
        )
        .unwrap();
    }
    out
}
