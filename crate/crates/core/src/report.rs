//! Column tables written as CSV (with `#` metadata lines) or JSON.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Domain(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format_float(*x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// `{"meta": {...}, "<column>": [...], ...}`; non-finite values become null.
    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        obj.insert("meta".into(), Value::Object(meta));
        for (i, c) in self.columns.iter().enumerate() {
            let col = self.rows.iter().map(|r| Value::from(r[i])).collect();
            obj.insert(c.clone(), Value::Array(col));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("plain values serialize");
        s.push('\n');
        s
    }
}

/// 17 significant digits, round-trip exact.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["t", "v"]).meta("seed", 7);
        t.push(vec![1.0, 0.1]).unwrap();
        t.push(vec![2.0, f64::NAN]).unwrap();
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed: 7");
        assert_eq!(lines[1], "t,v");
        assert_eq!(lines[2], "1.0000000000000000e0,1.0000000000000001e-1");
        assert_eq!(lines[3], "2.0000000000000000e0,NaN");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5.641_895_835_477_563e-4, -2.5e-300, 1e300] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["t"], serde_json::json!([1.0, 2.0]));
        assert_eq!(v["v"][1], Value::Null);
        assert_eq!(v["meta"]["seed"], "7");
    }

    #[test]
    fn row_width_checked() {
        assert!(sample().push(vec![1.0]).is_err());
    }
}
