//! CSV tables with a `#` comment header recording the resolved configuration.

use std::io::{self, Write};

use qlink::coincidence::Car;

use crate::config::RunConfig;

/// Bumped whenever a column set changes.
pub const COLUMNS_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra comment lines, written after the configuration block.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn car(c: Car<f64>) -> String {
    match c {
        Car::Finite(v) => num(v),
        Car::Unbounded => "inf".to_string(),
    }
}

pub fn write_table<W: Write>(mut w: W, cfg: &RunConfig, command: &str, table: &Table) -> io::Result<()> {
    writeln!(w, "# qlink {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# command = {command}")?;
    writeln!(w, "# columns = v{COLUMNS_VERSION}")?;
    writeln!(w, "# preset = {}", cfg.preset())?;
    writeln!(w, "# config_hash = {}", cfg.hash())?;
    for (k, v) in cfg.entries() {
        writeln!(w, "# {k} = {v}")?;
    }
    for note in &table.notes {
        writeln!(w, "# {note}")?;
    }
    let mut csv = csv::Writer::from_writer(&mut w);
    csv.write_record(&table.header)?;
    for row in &table.rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`], skipping comment lines.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), csv::Error> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
