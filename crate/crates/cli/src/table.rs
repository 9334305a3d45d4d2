//! Column-ordered result tables with CSV and JSON writers.

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    /// Point outside a formula's valid region; the row's flag column says why.
    Empty,
}

impl Cell {
    pub fn num(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Empty
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            // 12 significant digits
            Cell::Num(v) => format!("{v:.11e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// A table whose column order is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    columns: &'a [&'static str],
    rows: Vec<Vec<Value>>,
}

impl CurveTable {
    pub fn new(columns: &[&'static str]) -> Self {
        CurveTable {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of one column, `None` for empty or text cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> String {
        let t = JsonTable {
            columns: &self.columns,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::json).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&t).expect("table serializes");
        s.push('\n');
        s
    }
}

/// Joins the flags raised for a row into the flag column's text.
pub fn flag_cell(flags: &[&str]) -> Cell {
    if flags.is_empty() {
        Cell::Empty
    } else {
        Cell::text(flags.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = CurveTable::new(&["a", "b", "flag"]);
        t.push(vec![Cell::num(5.733e-5), Cell::Int(3), Cell::Empty]);
        t.push(vec![
            Cell::num(f64::NAN),
            Cell::text("x,y"),
            flag_cell(&["clamped", "invalid"]),
        ]);
        assert_eq!(
            t.to_csv(),
            "a,b,flag\n5.73300000000e-5,3,\n,\"x,y\",clamped;invalid\n"
        );
    }

    #[test]
    fn header_without_rows() {
        assert_eq!(CurveTable::new(&["a", "b"]).to_csv(), "a,b\n");
    }

    #[test]
    fn twelve_significant_digits() {
        let mut t = CurveTable::new(&["v"]);
        t.push(vec![Cell::num(std::f64::consts::PI)]);
        let line = t.to_csv().lines().nth(1).unwrap().to_string();
        assert_eq!(line, "3.14159265359e0");
        let mantissa = line.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 12);
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = CurveTable::new(&["z", "a"]);
        t.push(vec![Cell::num(1.5), Cell::Empty]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["columns"], json!(["z", "a"]));
        assert_eq!(v["rows"][0], json!([1.5, null]));
    }
}
