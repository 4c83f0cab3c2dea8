//! Plain CSV tables with C-style `%.12e` floats.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

/// Formats like C's `printf("%.12e", x)`: `-1.234567890123e-05`.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row, padding with empty cells up to the header width.
    pub fn push(&mut self, mut row: Vec<Cell>) {
        assert!(row.len() <= self.header.len(), "row wider than header");
        row.resize(self.header.len(), Cell::Empty);
        self.rows.push(row);
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Cell::Float(x)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header.join(",")).expect("string write");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(",")).expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(format_sci(1.2345678901234e-5), "1.234567890123e-05");
        assert_eq!(format_sci(-3.5), "-3.500000000000e+00");
        assert_eq!(format_sci(0.0), "0.000000000000e+00");
        assert_eq!(format_sci(6.02e123), "6.020000000000e+123");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["L", "x", "extra"]);
        t.push(vec![Cell::from(4usize), Cell::from(0.5)]);
        assert_eq!(t.to_csv(), "L,x,extra\n4,5.000000000000e-01,\n");
    }
}
