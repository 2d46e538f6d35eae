//! Deterministic tabular output.
//!
//! A [`Table`] is a header row plus string-typed cells. CSV output carries
//! exactly the headers; the JSON document is an array of objects with keys in
//! header order, and adds a `provenance` key to each row when one is set.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::mac_sim::SimMetrics;
use crate::spm::{format_mbps, RateEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Where a reported number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// A published constant reproduced as-is.
    Given,
    /// Produced by this crate's models.
    Computed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Given => "given",
            Provenance::Computed => "computed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Missing value: an empty CSV field, `null` in JSON.
    Empty,
    Text(String),
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
        }
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

/// Shortest round-trip rendering, with integral values printed without a
/// fractional part.
pub fn format_float(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    rows: Vec<(Vec<Cell>, Option<Provenance>)>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Appends a row. Panics if the width differs from the header.
    pub fn push(&mut self, cells: Vec<Cell>) {
        self.push_with(cells, None);
    }

    pub fn push_with(&mut self, cells: Vec<Cell>, provenance: Option<Provenance>) {
        assert_eq!(cells.len(), self.headers.len(), "row width does not match header");
        self.rows.push((cells, provenance));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> {
        self.rows.iter().map(|(r, _)| r.as_slice())
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for (row, _) in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let docs: Vec<Value> = self
            .rows
            .iter()
            .map(|(row, prov)| {
                let mut obj = Map::new();
                for (h, c) in self.headers.iter().zip(row) {
                    obj.insert(h.clone(), c.json());
                }
                if let Some(p) = prov {
                    obj.insert("provenance".into(), Value::String(p.to_string()));
                }
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&Value::Array(docs)).expect("json encoding");
        out.push(b'\n');
        out
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// `metric,value,unit` table for a simulation run.
pub fn metrics_table(m: &SimMetrics) -> Table {
    let mut t = Table::new(["metric", "value", "unit"]);
    for (name, value, unit) in m.rows() {
        t.push_with(vec![name.into(), value.into(), unit.into()], Some(Provenance::Computed));
    }
    t
}

/// `sts,oc,stm,line_mbps,payload_mbps` table of the rate hierarchy.
pub fn rates_table(entries: &[RateEntry]) -> Table {
    let mut t = Table::new(["sts", "oc", "stm", "line_mbps", "payload_mbps"]);
    for e in entries {
        t.push_with(
            vec![
                e.sts().into(),
                e.oc().into(),
                e.stm().unwrap_or_default().into(),
                format_mbps(e.line_kbps).into(),
                format_mbps(e.payload_kbps).into(),
            ],
            Some(Provenance::Given),
        );
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["metric", "value", "unit"]);
        assert_eq!(t.to_csv(), b"metric,value,unit\n");
        assert_eq!(t.to_json(), b"[]\n");
    }

    #[test]
    fn csv_quotes_and_orders() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["x,y".into(), 2.5.into()]);
        t.push(vec!["z".into(), 3.0.into()]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "a,b\n\"x,y\",2.5\nz,3\n");
        assert_eq!(t.to_csv(), t.clone().to_csv());
    }

    #[test]
    fn json_keeps_header_order_and_provenance() {
        let mut t = Table::new(["zeta", "alpha"]);
        t.push_with(vec![1u64.into(), "q".into()], Some(Provenance::Given));
        let s = String::from_utf8(t.to_json()).unwrap();
        let z = s.find("zeta").unwrap();
        assert!(z < s.find("alpha").unwrap());
        assert!(s.contains("\"provenance\": \"given\""));
        let mut t = Table::new(["x"]);
        t.push(vec![None::<f64>.into()]);
        assert_eq!(t.to_csv(), b"x\n\"\"\n");
        assert!(String::from_utf8(t.to_json()).unwrap().contains("null"));
    }

    #[test]
    fn units_populated() {
        use crate::mac_sim::{run_simulation, RingConfig, TrafficModel};
        let m = run_simulation(&RingConfig::new(2, 10.0, 50.0), &TrafficModel::idle(), 100.0, 0).unwrap();
        let t = metrics_table(&m);
        assert!(t.rows().all(|r| matches!(&r[2], Cell::Text(u) if !u.is_empty())));
    }

    #[test]
    fn float_rendering() {
        assert_eq!(format_float(155520.0), "155520");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(-2.0), "-2");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn parses_format() {
        assert_eq!("JSON".parse::<Format>(), Ok(Format::Json));
        assert!("xml".parse::<Format>().is_err());
    }
}
