//! File formats: chain JSON lines, trajectory and energy CSV, JSON reports.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::action::EnergyReport;
use crate::error::{Error, Result};
use crate::evolution::{ChainRecord, ChainState, Trajectory};

pub const TRAJECTORY_CSV_HEADER: &str = "t,re_w,im_w";

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// One `{"t": .., "a": [[re, im], ..]}` object per line.
pub fn write_chain_jsonl(path: &Path, states: &[ChainState]) -> Result<()> {
    let mut w = create(path)?;
    for s in states {
        serde_json::to_writer(&mut w, &s.to_record())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_chain_jsonl(path: &Path) -> Result<Vec<ChainState>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ChainRecord = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedInput(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(ChainState::from_record(record)?);
    }
    Ok(out)
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for (t, z) in &trajectory.samples {
        writeln!(w, "{t},{},{}", z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", EnergyReport::CSV_HEADER)?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of an energy CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    pub dirichlet: f64,
    pub s_series: f64,
    pub s_quadrature: f64,
    pub term1: f64,
    pub term2: f64,
    pub rhs: f64,
    pub fd_dsdt: f64,
    pub residual: f64,
}

pub fn read_energy_csv(path: &Path) -> Result<Vec<EnergyRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == EnergyReport::CSV_HEADER => {}
        _ => return Err(Error::MalformedInput(format!("{}: missing energy CSV header", path.display()))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::MalformedInput(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if v.len() != 9 {
            return Err(Error::MalformedInput(format!(
                "{} line {}: expected 9 fields, got {}",
                path.display(),
                i + 2,
                v.len()
            )));
        }
        rows.push(EnergyRow {
            t: v[0],
            dirichlet: v[1],
            s_series: v[2],
            s_quadrature: v[3],
            term1: v[4],
            term2: v[5],
            rhs: v[6],
            fd_dsdt: v[7],
            residual: v[8],
        });
    }
    Ok(rows)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::UnivalentCoefficients;
    use num_complex::Complex64;
    use std::collections::BTreeMap;

    #[test]
    fn chain_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.jsonl");
        let f = UnivalentCoefficients::from_tail(8, &[Complex64::new(0.1, -0.2), Complex64::new(1.0 / 3.0, 0.0)]);
        let states = vec![ChainState::identity(8), ChainState::new(0.123456789, f)];
        write_chain_jsonl(&path, &states).unwrap();
        assert_eq!(read_chain_jsonl(&path).unwrap(), states);
    }

    #[test]
    fn malformed_chain_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"t\": 0.0, \"a\": [[1.0, 0.0]]}\nnot json\n").unwrap();
        let err = read_chain_jsonl(&path).unwrap_err();
        assert!(matches!(err, Error::MalformedInput(ref m) if m.contains("line 2")), "{err}");
    }

    #[test]
    fn energy_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("energy.csv");
        let report = EnergyReport {
            t: 0.25,
            dirichlet: 1.5,
            log_action_series: 0.5,
            log_action_quadrature: 0.5000001,
            theorem1_term1: 0.1,
            theorem1_term2: -0.2,
            theorem1_rhs: -0.1,
            fd_dsdt: -0.1000001,
            fd_step: 1e-4,
            residuals: BTreeMap::new(),
        };
        write_energy_csv(&path, std::slice::from_ref(&report)).unwrap();
        let rows = read_energy_csv(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].t, 0.25);
        assert_eq!(rows[0].fd_dsdt, report.fd_dsdt);
        assert_eq!(rows[0].residual, report.residual());
    }
}
