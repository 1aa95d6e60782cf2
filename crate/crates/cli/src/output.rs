//! CSV and two-column data files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Float with 17 significant digits and a `.` decimal point.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Named CSV table; rows are preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File suffix; empty for the main table of a command.
    pub suffix: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(suffix: &str, header: &[&str]) -> Self {
        Self { suffix: suffix.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(CliError::from)?;
        for row in &self.rows {
            w.write_record(row).map_err(CliError::from)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Gnuplot-readable `x y` series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub suffix: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(suffix: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { suffix: suffix.into(), x_label: x_label.into(), y_label: y_label.into(), points }
    }

    pub fn to_dat(&self) -> Vec<u8> {
        let mut out = format!("# {} {}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            out.push_str(&format!("{} {}\n", float(*x), float(*y)));
        }
        out.into_bytes()
    }
}

/// `<dir>/<stem>[.<suffix>].<ext>`.
pub fn artifact_path(dir: &Path, stem: &str, suffix: &str, ext: &str) -> PathBuf {
    if suffix.is_empty() {
        dir.join(format!("{stem}.{ext}"))
    } else {
        dir.join(format!("{stem}.{suffix}.{ext}"))
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_quotes_commas() {
        let mut t = Table::new("", &["form", "value"]);
        t.push(vec!["W(i0,i1)".into(), float(1.5)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "form,value\n\"W(i0,i1)\",1.5000000000000000e0\n");
        assert_eq!(t.column("value").unwrap(), vec!["1.5000000000000000e0"]);
    }

    #[test]
    fn dat_has_two_columns() {
        let s = Series::new("", "n", "K", vec![(1.0, 0.5), (2.0, 0.25)]);
        let text = String::from_utf8(s.to_dat()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# n K");
        assert!(lines[1..].iter().all(|l| l.split(' ').count() == 2));
    }
}
