//! Tabular results and their CSV / JSON serialisation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Float(x) => x,
        }
    }

    fn render(self, out: &mut String) {
        match self {
            Cell::Int(i) => write!(out, "{i}").unwrap(),
            Cell::Float(x) => write!(out, "{x:.16e}").unwrap(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    recipe: &'a str,
    seed: Option<u64>,
    config: &'a ExperimentConfig,
    columns: &'a [String],
    rows: usize,
    summary: &'a Map<String, Value>,
}

pub fn sidecar_json(table: &Table, config: &ExperimentConfig, seed: Option<u64>) -> String {
    let s = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        recipe: &config.recipe,
        seed,
        config,
        columns: &table.columns,
        rows: table.rows.len(),
        summary: &table.summary,
    };
    let mut text = serde_json::to_string_pretty(&s).expect("sidecar serialises");
    text.push('\n');
    text
}

/// Writes `<prefix>.csv` and `<prefix>.json`, creating parent directories.
pub fn write_artifacts(
    prefix: &Path,
    table: &Table,
    config: &ExperimentConfig,
    seed: Option<u64>,
) -> std::io::Result<(PathBuf, PathBuf)> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let csv = with_suffix(prefix, "csv");
    let json = with_suffix(prefix, "json");
    fs::write(&csv, table.to_csv())?;
    fs::write(&json, sidecar_json(table, config, seed))?;
    Ok((csv, json))
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_lossless() {
        let mut t = Table::new(["l", "x"]);
        let x = 0.1 + 0.2;
        t.push(vec![Cell::from(3usize), Cell::from(x)]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("l,x"));
        let field = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
        assert!(csv.lines().nth(1).unwrap().starts_with("3,"));
    }

    #[test]
    fn suffix_keeps_dots_in_prefix() {
        assert_eq!(with_suffix(Path::new("out/run.v1"), "csv"), PathBuf::from("out/run.v1.csv"));
    }
}
