//! CSV contracts and a small reader for the comparison command.
//!
//! Fields never contain commas or quotes, so rows are split on `,`.

use std::collections::HashMap;
use std::path::Path;

use macsim::sim::SimStats;
use macsim::{AccessTechnique, CurvePoint, ScenarioKind};

use crate::error::CliError;
use crate::format::{opt_sig6, sig6};

pub const ANALYTIC_HEADER: &str = "technique,scenario,G,T,D,saturated";
pub const SIM_HEADER: &str = "technique,G,seed,horizon,n_units,generated,delivered,collided,dropped,in_flight,\
transmissions,measured_G,measured_T,native_G,native_T,mean_delay,max_delay,normalized_delay";

pub fn analytic_row(tech: AccessTechnique, scenario: ScenarioKind, p: &CurvePoint) -> String {
    format!(
        "{},{},{},{},{},{}",
        tech.name(),
        scenario.name(),
        opt_sig6(p.load),
        opt_sig6(p.throughput),
        opt_sig6(p.delay),
        u8::from(p.saturated)
    )
}

pub fn sim_row(tech: AccessTechnique, load: f64, seed: u64, horizon: f64, n_units: f64, s: &SimStats) -> String {
    format!(
        "{},{},{seed},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        tech.name(),
        sig6(load),
        sig6(horizon),
        sig6(n_units),
        s.generated,
        s.delivered,
        s.collided_transmissions,
        s.dropped,
        s.in_flight,
        s.transmissions,
        sig6(s.measured_g),
        sig6(s.measured_t),
        sig6(s.native_g),
        sig6(s.native_t),
        opt_sig6(s.mean_delay),
        opt_sig6(s.max_delay),
        opt_sig6(s.normalized_delay),
    )
}

/// Parsed CSV with named column access.
#[derive(Debug)]
pub struct Table {
    columns: HashMap<String, usize>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path, required: &[&str]) -> Result<Table, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Table::parse(&text, required).map_err(|m| CliError::input(path, m))
    }

    pub fn parse(text: &str, required: &[&str]) -> Result<Table, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty file")?;
        let columns: HashMap<String, usize> =
            header.split(',').enumerate().map(|(i, name)| (name.trim().to_string(), i)).collect();
        if let Some(missing) = required.iter().find(|c| !columns.contains_key(**c)) {
            return Err(format!("missing column `{missing}`"));
        }
        let width = header.split(',').count();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let row: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            if row.len() != width {
                return Err(format!("line {}: expected {width} fields, found {}", n + 2, row.len()));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn get<'r>(&self, row: &'r [String], column: &str) -> &'r str {
        self.columns.get(column).map_or("", |&i| row[i].as_str())
    }

    pub fn float(&self, row: &[String], column: &str) -> Result<Option<f64>, String> {
        let v = self.get(row, column);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| format!("column `{column}`: `{v}` is not a number"))
    }

    pub fn uint(&self, row: &[String], column: &str) -> Result<u64, String> {
        let v = self.get(row, column);
        v.parse().map_err(|_| format!("column `{column}`: `{v}` is not a count"))
    }
}
