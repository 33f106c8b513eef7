use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scientific notation with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Header plus string rows, written as comma-separated values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) -> Result<()> {
        if other.header != self.header {
            return Err(Error::DimensionMismatch("tables have different headers".into()));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Unsupported(format!("csv write failed: {e}"));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Unsupported(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_twelve_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let mut t = Table::new(&["a", "b [1/omega]"]);
        t.push(vec!["x,y".into(), fmt_float(2.0)]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b [1/omega]\r\n\"x,y\",2.00000000000e0\r\n");
    }
}
