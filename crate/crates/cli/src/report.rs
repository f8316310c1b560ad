//! Report tables and their CSV / JSON serialization. Output is a pure
//! function of the table contents, so seeded runs are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // non-finite floats have no JSON form
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
    )*};
}
int_cell!(u8, u32, u64, i64, usize);

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A named table; every row has one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(runtime)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(runtime)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }

    fn json_rows(&self) -> impl Iterator<Item = Value> + '_ {
        self.rows.iter().map(|row| {
            let mut obj = Map::new();
            obj.insert("table".into(), Value::from(self.name.as_str()));
            for (c, v) in self.columns.iter().zip(row) {
                obj.insert((*c).into(), v.json());
            }
            Value::Object(obj)
        })
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// The JSON summary: `config_digest`, `seed` and every row of every table
/// (each row names its table).
pub fn summary(tables: &[Table], digest: &str, seed: u64) -> Value {
    let rows: Vec<Value> = tables.iter().flat_map(Table::json_rows).collect();
    serde_json::json!({ "config_digest": digest, "seed": seed, "rows": rows })
}

/// Writes `<table>.csv` per table (CSV format) and `<command>.json`. Returns
/// the paths written, in order.
pub fn write(
    dir: &Path,
    command: &str,
    tables: &[Table],
    format: Format,
    digest: &str,
    seed: u64,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if format == Format::Csv {
        for t in tables {
            put(format!("{}.csv", t.name), t.to_csv()?)?;
        }
    }
    let mut json = serde_json::to_vec_pretty(&summary(tables, digest, seed)).map_err(runtime)?;
    json.push(b'\n');
    put(format!("{command}.json"), json)?;
    Ok(written)
}
