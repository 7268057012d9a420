//! CSV output and input for study records.
//!
//! Schema: `level,ndofs,h_max,energy_error,estimator,interface_estimator,rate`
//! with 12 significant digits, LF line endings, and an empty rate on the
//! first row.

use std::fmt::Write as _;
use std::path::Path;

use mortar_fem::experiments::StudyRecord;

pub const HEADER: &str = "level,ndofs,h_max,energy_error,estimator,interface_estimator,rate";

fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Renders records to CSV text. `rates[k]` is the per-step rate reaching
/// record k (None on the first row).
pub fn render(records: &[StudyRecord], rates: &[Option<f64>]) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for (r, rate) in records.iter().zip(rates) {
        let rate_txt = rate.map(fmt12).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.level,
            r.n_dofs,
            fmt12(r.h_max),
            fmt12(r.energy_error),
            fmt12(r.estimator_total),
            fmt12(r.interface_estimator),
            rate_txt
        );
    }
    out
}

/// Per-step rates for the CSV rate column: Δlog(err)/Δlog(x) with x the
/// study's independent variable (h for uniform runs, N for adaptive).
pub fn per_step_rates(xs: &[f64], errs: &[f64]) -> Vec<Option<f64>> {
    let mut rates = vec![None; xs.len()];
    for k in 1..xs.len() {
        let de = (errs[k] / errs[k - 1]).ln();
        let dx = (xs[k] / xs[k - 1]).ln();
        rates[k] = Some(if de == 0.0 { 0.0 } else { de / dx });
    }
    rates
}

/// One parsed data row of the study CSV.
#[derive(Debug, Clone, Copy)]
pub struct CsvRow {
    pub level: usize,
    pub ndofs: f64,
    pub h_max: f64,
    pub energy_error: f64,
    pub estimator: f64,
    pub interface_estimator: f64,
}

/// Parses a study CSV, validating the schema. At least one data row is
/// required.
pub fn parse(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == HEADER => {}
        Some(h) => return Err(format!("unexpected CSV header: {h}")),
        None => return Err("empty CSV".into()),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!(
                "row {}: expected 7 fields, got {}",
                k + 1,
                fields.len()
            ));
        }
        let num = |i: usize| -> Result<f64, String> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| format!("row {}: bad number {:?}", k + 1, fields[i]))
        };
        rows.push(CsvRow {
            level: fields[0]
                .parse()
                .map_err(|_| format!("row {}: bad level {:?}", k + 1, fields[0]))?,
            ndofs: num(1)?,
            h_max: num(2)?,
            energy_error: num(3)?,
            estimator: num(4)?,
            interface_estimator: num(5)?,
        });
    }
    if rows.is_empty() {
        return Err("CSV has no data rows".into());
    }
    Ok(rows)
}

pub fn read_file(path: &Path) -> Result<Vec<CsvRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}
