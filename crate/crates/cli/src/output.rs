//! CSV and manifest writers.

use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Twelve significant digits, plain decimal where the magnitude allows and
/// scientific notation otherwise. Locale independent.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

pub fn write_csv<H, I, R>(path: &Path, header: &[H], rows: I) -> Result<(), CliError>
where
    H: AsRef<[u8]>,
    I: Iterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Provenance written next to every report.
#[derive(Debug, Serialize)]
pub struct Manifest<P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub rng: &'static str,
    pub threads: Option<usize>,
    pub complete: bool,
    pub parameters: P,
}

impl<P: Serialize> Manifest<P> {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
