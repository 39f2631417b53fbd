//! Column-oriented output tables with deterministic CSV and JSON encodings.

use std::io::{self, Write};

/// Floats are printed with 12 significant digits so outputs are
/// plot-tool-agnostic and diff-friendly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone)]
pub enum Values {
    Int(Vec<i64>),
    Float(Vec<f64>),
    Text(Vec<String>),
}

impl Values {
    fn len(&self) -> usize {
        match self {
            Values::Int(v) => v.len(),
            Values::Float(v) => v.len(),
            Values::Text(v) => v.len(),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Values::Int(v) => v[row].to_string(),
            Values::Float(v) => fmt_float(v[row]),
            Values::Text(v) => v[row].clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Values::Int(v) => serde_json::Value::from(v.clone()),
            Values::Float(v) => serde_json::Value::from(v.clone()),
            Values::Text(v) => serde_json::Value::from(v.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<(String, Values)>,
}

impl Table {
    pub fn new() -> Self {
        Table { columns: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Values) {
        let name = name.into();
        if let Some((first, v)) = self.columns.first() {
            assert_eq!(v.len(), values.len(), "column {name} does not match {first}");
        }
        self.columns.push((name, values));
    }

    fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    /// UTF-8, comma-separated, LF line endings, one mandatory header row.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let header: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        w.write_all(header.join(",").as_bytes())?;
        w.write_all(b"\n")?;
        for row in 0..self.n_rows() {
            let cells: Vec<String> = self.columns.iter().map(|(_, v)| v.cell(row)).collect();
            w.write_all(cells.join(",").as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// One top-level object: `meta` (resolved config, tool version) and
    /// `data` (column arrays).
    pub fn write_json<W: Write>(&self, w: &mut W, meta: serde_json::Value) -> io::Result<()> {
        let mut data = serde_json::Map::new();
        for (name, values) in &self.columns {
            data.insert(name.clone(), values.to_json());
        }
        let root = serde_json::json!({ "meta": meta, "data": data });
        w.write_all(serde_json::to_string_pretty(&root)?.as_bytes())?;
        w.write_all(b"\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new();
        t.push("site", Values::Int(vec![1, 2]));
        t.push("u", Values::Float(vec![-0.5, 0.5]));
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "site,u\n1,-5.00000000000e-1\n2,5.00000000000e-1\n");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new();
        t.push("phase", Values::Text(vec!["condensed".into()]));
        let mut out = Vec::new();
        t.write_json(&mut out, serde_json::json!({"command": "x"})).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(value["data"]["phase"][0], "condensed");
        assert_eq!(value["meta"]["command"], "x");
    }
}
