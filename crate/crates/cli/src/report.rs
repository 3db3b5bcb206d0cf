//! Report rendering. Every command produces one [`Report`] with two
//! renderings that agree on all numbers: a human table view for stdout and a
//! versioned tab-separated machine view for `--out`. Machine output is
//! byte-deterministic given (scenario, seed).

use std::fmt::Write as _;

pub const FORMAT_VERSION: u32 = 1;

/// Nine significant digits, locale-free.
pub fn format_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format_sig9(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.6}"),
            other => other.machine(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|&c| c.into()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub scenario_digest: String,
    pub meta: Vec<(String, Cell)>,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(command: impl Into<String>, scenario_digest: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            scenario_digest: scenario_digest.into(),
            meta: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    /// Tab-separated, versioned, byte-deterministic.
    pub fn machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version\t{FORMAT_VERSION}");
        let _ = writeln!(out, "command\t{}", self.command);
        let _ = writeln!(out, "scenario_sha256\t{}", self.scenario_digest);
        for (key, value) in &self.meta {
            let _ = writeln!(out, "{key}\t{}", value.machine());
        }
        for section in &self.sections {
            let _ = writeln!(out, "#section\t{}", section.name);
            let _ = writeln!(out, "{}", section.columns.join("\t"));
            for row in &section.rows {
                let cells: Vec<String> = row.iter().map(Cell::machine).collect();
                let _ = writeln!(out, "{}", cells.join("\t"));
            }
        }
        out
    }

    /// Aligned plain-text view for the terminal.
    pub fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "aggshare {} (format v{FORMAT_VERSION})", self.command);
        let _ = writeln!(out, "scenario sha256: {}", self.scenario_digest);
        for (key, value) in &self.meta {
            let _ = writeln!(out, "{key}: {}", value.human());
        }
        for section in &self.sections {
            let _ = writeln!(out, "\n[{}]", section.name);
            let mut widths: Vec<usize> = section.columns.iter().map(String::len).collect();
            let rendered: Vec<Vec<String>> = section
                .rows
                .iter()
                .map(|row| row.iter().map(Cell::human).collect())
                .collect();
            for row in &rendered {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let header: Vec<String> = section
                .columns
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", header.join("  "));
            for row in &rendered {
                let line: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                let _ = writeln!(out, "{}", line.join("  "));
            }
        }
        out
    }
}
