//! Deterministic report emission: fixed key order, fixed float formatting
//! with 12 significant digits, single-threaded writes.

use std::path::Path;

use hml_core::{HmlError, Result};

/// Fixed-width scientific formatting: 12 significant digits.
pub fn sig(v: f64) -> String {
    format!("{v:.11e}")
}

/// JSON number cell; non-finite values become null so reports stay valid JSON.
fn json_num(v: f64) -> String {
    if v.is_finite() {
        sig(v)
    } else {
        "null".to_string()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Ordered JSON object builder: keys appear exactly in insertion order, so a
/// given report is byte-identical across runs.
#[derive(Debug, Default)]
pub struct JsonReport {
    fields: Vec<(String, String)>,
}

impl JsonReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.fields.push((key.to_string(), json_num(v)));
        self
    }

    pub fn opt_num(&mut self, key: &str, v: Option<f64>) -> &mut Self {
        let cell = match v {
            Some(x) => json_num(x),
            None => "null".to_string(),
        };
        self.fields.push((key.to_string(), cell));
        self
    }

    pub fn int(&mut self, key: &str, v: usize) -> &mut Self {
        self.fields.push((key.to_string(), v.to_string()));
        self
    }

    pub fn boolean(&mut self, key: &str, v: bool) -> &mut Self {
        self.fields.push((key.to_string(), v.to_string()));
        self
    }

    /// Array of [x, y] pairs.
    pub fn pairs(&mut self, key: &str, pts: &[(f64, f64)]) -> &mut Self {
        let cells: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("[{}, {}]", json_num(*x), json_num(*y)))
            .collect();
        self.fields.push((key.to_string(), format!("[{}]", cells.join(", "))));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::from("{\n");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            out.push_str("  \"");
            out.push_str(&json_escape(k));
            out.push_str("\": ");
            out.push_str(v);
            if i + 1 < self.fields.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }
}

/// CSV table builder; cells are preformatted strings.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write to the output path, or to stdout when none is given.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| {
            HmlError::config("output.path", format!("cannot write {}: {e}", p.display()))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
