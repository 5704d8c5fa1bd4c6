use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads one numeric column from a text file.
///
/// Columns are 1-based and separated by commas, tabs, semicolons or spaces.
/// Blank lines and lines starting with `#` are skipped. A row that is not
/// numeric is an [`Error::Parse`] whose position is the 1-based line number.
pub fn read_values(path: &Path, column: usize) -> Result<Vec<f64>> {
    parse_values(&fs::read_to_string(path)?, column)
}

pub fn parse_values(text: &str, column: usize) -> Result<Vec<f64>> {
    if column == 0 {
        return Err(Error::InvalidParameter("columns are numbered from 1".into()));
    }
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .nth(column - 1)
            .ok_or_else(|| Error::Parse { position: i + 1, message: format!("no column {column} in '{line}'") })?;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => return Err(Error::Parse { position: i + 1, message: format!("'{field}' is not a finite number") }),
        }
    }
    Ok(values)
}

/// One value per line with round-trip precision.
pub fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for v in values {
        writeln!(out, "{v:?}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let v = parse_values("# header\n1.5\n\n  -2e-1 \n# x\n3\n", 1).unwrap();
        assert_eq!(v, vec![1.5, -0.2, 3.0]);
    }

    #[test]
    fn selects_columns() {
        let v = parse_values("1,10\n2, 20\n3\t30\n", 2).unwrap();
        assert_eq!(v, vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_values("1\n# c\n2\nabc\n", 1) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_values("1,2\n3\n", 2) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_values("nan\n", 1), Err(Error::Parse { position: 1, .. })));
        assert!(matches!(parse_values("1\n", 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        let values = vec![0.1, -1.0 / 3.0, 1e-300, 12_345.678_901_234_5];
        write_values(&path, &values).unwrap();
        assert_eq!(read_values(&path, 1).unwrap(), values);
    }
}
