//! CSV emission: fixed headers, 12 significant digits, LF line endings, and a
//! trailing `schema_version` column that names the table and its revision.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{CliError, Result};

pub const SCHEMA_REVISION: u32 = 1;

/// `d.ddddddddddde±x`; exact zero prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// A table kind with its fixed header.
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
}

impl Schema {
    pub fn version(&self) -> String {
        format!("{}/{}", self.name, SCHEMA_REVISION)
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().copied().chain(std::iter::once("schema_version")).collect()
    }
}

/// Writes `rows` under `schema` to any sink.
pub fn write_rows<W: Write>(sink: W, schema: &Schema, rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(schema.header())?;
    let version = schema.version();
    for row in rows {
        debug_assert_eq!(row.len(), schema.columns.len());
        w.write_record(row.iter().map(String::as_str).chain(std::iter::once(version.as_str())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, schema: &Schema, rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_rows(BufWriter::new(file), schema, rows).map_err(|e| CliError::io(path, e))
}

pub fn to_string(schema: &Schema, rows: &[Vec<String>]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, schema, rows).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn lf_endings_and_version() {
        let s = Schema { name: "t", columns: &["x", "y"] };
        let out = to_string(&s, &[vec!["1".into(), "a,b".into()]]);
        assert_eq!(out, "x,y,schema_version\n1,\"a,b\",t/1\n");
    }
}
