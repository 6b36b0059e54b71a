//! CSV tables with full double precision.

use std::io::Write;
use std::path::Path;

use anyhow::{ensure, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl Value {
    /// Floats use 17 significant digits in exponent form, so they read back
    /// to the same double.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(f) if f.is_nan() => "NaN".into(),
            Value::Float(f) if f.is_infinite() => (if *f > 0.0 { "inf" } else { "-inf" }).into(),
            Value::Float(f) => format!("{f:.16e}"),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Value in the first row whose `key_col` equals `key`.
    pub fn lookup(&self, key_col: &str, key: &str, col: &str) -> Option<&Value> {
        let k = self.column(key_col)?;
        let c = self.column(col)?;
        self.rows.iter().find(|r| r[k].render() == key).map(|r| &r[c])
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            ensure!(row.len() == self.header.len(), "row width differs from header");
            w.write_record(row.iter().map(Value::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = Value::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(Value::Float(f64::NAN).render(), "NaN");
    }

    #[test]
    fn layout() {
        let mut t = CsvTable::new(&["face", "value"]);
        t.push(vec!["-x".into(), 0.5.into()]);
        t.push(vec!["+x".into(), 2usize.into()]);
        assert_eq!(t.to_string(), "face,value\n-x,5.0000000000000000e-1\n+x,2\n");
        assert_eq!(t.lookup("face", "+x", "value"), Some(&Value::Int(2)));
    }
}
