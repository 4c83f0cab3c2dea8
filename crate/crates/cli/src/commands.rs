use std::fmt;

use qet_core::chain::{edge_correlators_vs_l, four_site_residual};
use qet_core::model::{sector_spectrum, ModelParams, Parity};
use qet_core::optimum::{linspace, sweep_figure3, ExtractionRow, MIN_RESOLUTION};
use qet_core::table::{format_sci, Cell, Table};
use qet_core::thermo::{sweep_figure4, BoundRow};
use qet_core::verify::{all_passed, run_invariant_suite, CheckResult, SuiteConfig};
use qet_core::{Exec, QetError};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an out-of-domain request.
    Usage(String),
    Io(std::io::Error),
    Core(QetError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<QetError> for CliError {
    fn from(e: QetError) -> Self {
        match e {
            QetError::Io(io) => CliError::Io(io),
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Field values: a single `h` or an inclusive range.
#[derive(Debug, Clone, Copy)]
pub struct FieldRange {
    pub h: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub h_steps: usize,
}

impl FieldRange {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        if let Some(h) = self.h {
            return Ok(vec![h]);
        }
        if !(self.h_min <= self.h_max) {
            return Err(CliError::Usage(format!("--h-min {} exceeds --h-max {}", self.h_min, self.h_max)));
        }
        if self.h_steps < 2 {
            return Err(CliError::Usage(format!("--h-steps must be at least 2, got {}", self.h_steps)));
        }
        Ok(linspace(self.h_min, self.h_max, self.h_steps))
    }
}

pub fn spectrum(k: f64, fields: &FieldRange, exec: Exec) -> CliResult<Table> {
    let hs = fields.values()?;
    let mut header = vec!["h".to_string()];
    header.extend((1..=8).map(|i| format!("E_{i}")));
    let mut table = Table::new(&header);
    let rows = exec.map(&hs, |&h| ModelParams::new(h, k).map(|p| sector_spectrum(&p, Parity::Even)));
    for (h, row) in hs.iter().zip(rows) {
        let mut cells = vec![*h];
        cells.extend(row?);
        table.push_floats(&cells);
    }
    Ok(table)
}

pub fn sweep(k: f64, fields: &FieldRange, exec: Exec) -> CliResult<Table> {
    let rows = sweep_figure3(k, &fields.values()?, exec)?;
    let mut table = Table::new(&ExtractionRow::HEADER);
    for r in rows {
        table.push_floats(&r.values());
    }
    Ok(table)
}

pub fn thermo(k: f64, fields: &FieldRange, exec: Exec) -> CliResult<Table> {
    let hs = fields.values()?;
    if hs.iter().any(|&h| h <= 0.0) {
        return Err(CliError::Usage("thermo needs h > 0: the effective temperature is undefined at h = 0".into()));
    }
    let rows = sweep_figure4(k, &hs, exec)?;
    let mut table = Table::new(&BoundRow::HEADER);
    for r in rows {
        table.push_floats(&r.values());
    }
    Ok(table)
}

pub const CHAIN_HEADER: [&str; 7] = ["L", "h", "abs_C_AB", "abs_D_AB", "slope", "r_squared", "ed_residual"];

pub fn chain(k: f64, fields: &FieldRange, ls: &[usize], exec: Exec) -> CliResult<Table> {
    let mut ls = ls.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls.is_empty() {
        return Err(CliError::Usage("empty L list".into()));
    }
    let mut table = Table::new(&CHAIN_HEADER);
    for h in fields.values()? {
        let scan = edge_correlators_vs_l(h, k, &ls, exec)?;
        for row in &scan.rows {
            let mut cells = vec![
                Cell::from(row.l),
                Cell::from(h),
                Cell::from(row.c_ab.abs()),
                Cell::from(row.d_ab.abs()),
            ];
            match scan.fit {
                Some(f) => cells.extend([Cell::from(f.slope), Cell::from(f.r_squared)]),
                None => cells.extend([Cell::Empty, Cell::Empty]),
            }
            cells.push(if row.l == 4 { Cell::from(four_site_residual(h, k)?) } else { Cell::Empty });
            table.push(cells);
        }
    }
    Ok(table)
}

pub struct VerifyReport {
    pub text: String,
    pub passed: bool,
}

pub fn verify(seed: u64, grid: Option<usize>, exec: Exec) -> CliResult<VerifyReport> {
    let resolution = grid.unwrap_or(MIN_RESOLUTION);
    if resolution < MIN_RESOLUTION {
        return Err(CliError::Usage(format!("--grid must be at least {MIN_RESOLUTION}, got {resolution}")));
    }
    let cfg = SuiteConfig { seed, exec, resolution, ..SuiteConfig::default() };
    let results = run_invariant_suite(&cfg);
    Ok(VerifyReport { text: render_checks(&results), passed: all_passed(&results) })
}

fn render_checks(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let bound = if r.tolerance > 0.0 { format!(" (tol {})", format_sci(r.tolerance)) } else { String::new() };
        let detail = if r.detail.is_empty() { String::new() } else { format!(" {}", r.detail) };
        out.push_str(&format!(
            "{status}  {:<8}  {:<width$}  {}{bound}{detail}\n",
            r.module,
            r.name,
            format_sci(r.value),
        ));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    out
}
