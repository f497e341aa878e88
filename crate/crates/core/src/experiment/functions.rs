//! Functions on a space as CSV: one row per point in space order, one
//! column per function, with an optional header row.

use std::path::Path;

use crate::error::{Error, Result};

fn csv_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {e}", path.display()))
}

/// Reads the columns of `path`; a first row that does not parse as numbers
/// is taken as a header. With `points` given, the row count must match.
pub fn read_functions_csv(path: &Path, points: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut columns: Vec<Vec<f64>> = vec![];
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(csv_error(path, format!("row {}: {e}", i + 1))),
        };
        if columns.is_empty() {
            columns = vec![vec![]; values.len()];
        }
        for (c, v) in columns.iter_mut().zip(values) {
            c.push(v);
        }
    }
    if columns.is_empty() || columns[0].is_empty() {
        return Err(csv_error(path, "no values"));
    }
    if let Some(n) = points {
        if columns[0].len() != n {
            return Err(csv_error(
                path,
                format!("{} rows for a space of {n} points", columns[0].len()),
            ));
        }
    }
    Ok(columns)
}

/// Writes equal-length columns under `header`.
pub fn write_functions_csv(path: &Path, header: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    if header.len() != columns.len() || columns.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(Error::Input("columns and header disagree in shape".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    let rows = columns.first().map_or(0, Vec::len);
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let cols = vec![vec![0.1, -2.0, 1e-300], vec![3.0, 0.0, f64::MAX]];
        write_functions_csv(&p, &["a", "b"], &cols).unwrap();
        assert_eq!(read_functions_csv(&p, Some(3)).unwrap(), cols);
        assert!(read_functions_csv(&p, Some(4)).is_err());
    }

    #[test]
    fn headerless_single_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "1\n2.5\n -3 \n").unwrap();
        assert_eq!(
            read_functions_csv(&p, None).unwrap(),
            vec![vec![1.0, 2.5, -3.0]]
        );
        std::fs::write(&p, "1\nx\n").unwrap();
        assert!(read_functions_csv(&p, None).is_err());
        std::fs::write(&p, "value\n").unwrap();
        assert!(read_functions_csv(&p, None).is_err());
    }
}
