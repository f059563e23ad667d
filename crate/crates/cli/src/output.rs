//! CSV tables and flat JSON summaries.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// One CSV table plus a flat summary object carrying an `anchor` string.
pub struct Report {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
    summary: Map<String, Value>,
}

impl Report {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>, anchor: &str) -> Self {
        let mut summary = Map::new();
        summary.insert("anchor".into(), Value::from(anchor));
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            summary,
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        let value = serde_json::Number::from_f64(v)
            .map_or_else(|| Value::from(v.to_string()), Value::Number);
        self.summary.insert(key.into(), value);
        self
    }

    pub fn param(&mut self, key: &str, v: f64) -> &mut Self {
        self.num(key, v)
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.summary.insert(key.into(), Value::from(v));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.summary.insert(key.into(), Value::from(v.into()));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.summary.insert(key.into(), Value::from(v));
        self
    }

    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`.
    pub fn write(&self, dir: &Path, name: &str) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{name}.csv")), self.csv())?;
        let mut json = fs::File::create(dir.join(format!("{name}.json")))?;
        serde_json::to_writer_pretty(&mut json, &Value::Object(self.summary.clone()))
            .map_err(std::io::Error::from)?;
        json.write_all(b"\n")
    }
}
