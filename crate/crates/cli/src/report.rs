//! Output: aligned text tables, CSV and the structured run report.

use fbar_core::fom::FiguresOfMerit;
use fbar_core::herald::ProtocolOutcome;
use fbar_core::matching::MatchingNetwork;
use fbar_core::mcsim::McEstimate;
use fbar_core::optomech::OptomechLoading;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Six significant digits, fixed-point where that stays readable.
pub fn significant(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-3..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => significant(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub struct Row {
    pub quantity: &'static str,
    pub unit: &'static str,
    pub cells: Vec<Cell>,
}

/// Quantities down the side, one column per analyzed case.
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: Vec<String>) -> Self {
        Table {
            title: title.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, quantity: &'static str, unit: &'static str, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row { quantity, unit, cells });
    }

    pub fn render_text(&self) -> String {
        let header: Vec<String> = ["quantity".to_string(), "unit".to_string()]
            .into_iter()
            .chain(self.columns.iter().cloned())
            .collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                [r.quantity.to_string(), r.unit.to_string()]
                    .into_iter()
                    .chain(r.cells.iter().map(Cell::render))
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for line in &body {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let format_line = |cells: &[String]| -> String {
            let mut out = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                let pad = w - cell.chars().count();
                if i < 2 {
                    out.push_str(cell);
                    out.push_str(&" ".repeat(pad));
                } else {
                    out.push_str(&" ".repeat(pad));
                    out.push_str(cell);
                }
                out.push_str("  ");
            }
            out.trim_end().to_string()
        };
        let mut out = format!("{}\n{}\n", self.title, format_line(&header));
        for line in &body {
            out.push_str(&format_line(line));
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["quantity", "unit"]
            .into_iter()
            .map(str::to_string)
            .chain(self.columns.iter().cloned());
        w.write_record(header).map_err(csv_error)?;
        for r in &self.rows {
            let record = [r.quantity.to_string(), r.unit.to_string()]
                .into_iter()
                .chain(r.cells.iter().map(Cell::render));
            w.write_record(record).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Warning {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct MatchingEntry {
    pub objective: String,
    pub topology: String,
    pub loading: OptomechLoading,
    pub network: MatchingNetwork,
}

#[derive(Debug, Serialize)]
pub struct FomEntry {
    pub objective: String,
    pub topology: String,
    pub fom: FiguresOfMerit,
}

#[derive(Debug, Serialize)]
pub struct ProtocolEntry {
    pub protocol: String,
    pub objective: String,
    pub topology: String,
    pub outcome: ProtocolOutcome,
}

#[derive(Debug, Serialize)]
pub struct McEntry {
    pub protocol: String,
    pub objective: String,
    pub topology: String,
    pub analytic: f64,
    pub estimate: McEstimate,
    pub sigma: f64,
    pub pass: bool,
}

/// Everything one invocation computed, plus the configuration that produced it.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    /// Canonical flat configuration text.
    pub config_echo: String,
    /// The same configuration as an object.
    pub config: serde_json::Value,
    pub matching: Vec<MatchingEntry>,
    pub fom: Vec<FomEntry>,
    pub protocol: Vec<ProtocolEntry>,
    pub monte_carlo: Vec<McEntry>,
    pub warnings: Vec<Warning>,
}

impl RunReport {
    pub fn warn(&mut self, code: &'static str, message: String) {
        let w = Warning { code, message };
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }
}
