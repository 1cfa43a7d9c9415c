//! Table model and serialisation.
//!
//! Every experiment produces one [`Table`]; rates are always emitted in both
//! nats and bits, numbers carry nine significant digits, and the header line
//! records the version, the seeds in play, and a SHA-256 of the canonical
//! config so outputs are self-describing and reproducible.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Exact integer (counts, seeds, orders).
    Int(u64),
    /// Floating-point value, rendered with nine significant digits.
    Num(f64),
    Text(String),
    /// Missing value on a failed or skipped row.
    Empty,
}

impl Cell {
    fn render(&self) -> Option<String> {
        match self {
            Cell::Int(v) => Some(v.to_string()),
            Cell::Num(v) => Some(fmt_sig9(*v)),
            Cell::Text(s) => Some(s.clone()),
            Cell::Empty => None,
        }
    }
}

/// Nine significant digits; infinities render as `inf` / `-inf`.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.8e}")
}

/// A finished experiment: header metadata plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub experiment: String,
    pub seeds: Vec<u64>,
    pub config_sha256: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn header_comment(&self) -> String {
        let seeds = if self.seeds.is_empty() {
            "none".to_string()
        } else {
            self.seeds
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "# ehcap v{} experiment={} seeds={} config_sha256={}",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            seeds,
            self.config_sha256
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header_comment());
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.render().map(|s| csv_quote(&s)).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            version: &'a str,
            experiment: &'a str,
            seeds: &'a [u64],
            config_sha256: &'a str,
            columns: &'a [&'static str],
            /// Cells as rendered strings (aligned with `columns`); `null`
            /// marks a missing value. Strings keep infinities representable
            /// and make the JSON byte-identical to re-runs by construction.
            rows: Vec<Vec<Option<String>>>,
        }
        let doc = Doc {
            version: env!("CARGO_PKG_VERSION"),
            experiment: &self.experiment,
            seeds: &self.seeds,
            config_sha256: &self.config_sha256,
            columns: &self.columns,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(Cell::render).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serialises");
        s.push('\n');
        s
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// SHA-256 of the canonical config text, hex-encoded.
pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
