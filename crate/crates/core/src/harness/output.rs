use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::RunReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "tau,h,iters_mean,iters_raw,errE,errB,divB_max,energy_drift,seconds_per_step";

/// One CSV row per report, under [`CSV_HEADER`].
pub fn csv_string(reports: &[RunReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            r.config.tau,
            r.counts.h,
            r.iters_mean,
            r.iters_raw,
            r.err_e,
            r.err_b,
            r.div_b_max,
            r.energy_drift,
            r.seconds_per_step
        );
    }
    s
}

pub fn emit_csv(reports: &[RunReport], path: &Path) -> Result<()> {
    fs::write(path, csv_string(reports))?;
    Ok(())
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, json_string(value)?)?;
    Ok(())
}

/// Mean iteration counts laid out with one row per `tau` and one column per `h`.
pub fn iteration_table(reports: &[RunReport]) -> String {
    let mut taus: Vec<f64> = Vec::new();
    let mut hs: Vec<f64> = Vec::new();
    for r in reports {
        if !taus.contains(&r.config.tau) {
            taus.push(r.config.tau);
        }
        if !hs.contains(&r.counts.h) {
            hs.push(r.counts.h);
        }
    }
    let mut s = String::from("tau");
    for h in &hs {
        let _ = write!(s, ",h={h}");
    }
    s.push('\n');
    for tau in &taus {
        let _ = write!(s, "{tau}");
        for h in &hs {
            let cell = reports.iter().find(|r| r.config.tau == *tau && r.counts.h == *h);
            match cell {
                Some(r) => {
                    let _ = write!(s, ",{}", r.iters_mean);
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}
