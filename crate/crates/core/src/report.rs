//! CSV writers for sweeps and spectra. Floats are written with Rust's
//! shortest round-trip formatting, so no precision is lost.

use std::io::Write;

use crate::analysis::{EnvelopeRow, ScanRecord};
use crate::error::{Error, Result};
use crate::mixsim::RNG_ALGORITHM;
use crate::spectra::Spectrum;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_scan<W: Write>(out: W, rows: &[ScanRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k", "m_star", "gamma", "relaxation", "gap_numeric", "ratio"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.m_star.to_string(),
            r.gamma.to_string(),
            r.relaxation.to_string(),
            opt(r.gap_numeric),
            opt(r.ratio),
        ])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// One row of a bell sweep around `np/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellRow {
    pub k: usize,
    pub gamma: f64,
    /// Empty when `k` falls outside the bell.
    pub prediction: Option<f64>,
}

pub fn write_bells<W: Write>(out: W, rows: &[BellRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "gamma", "prediction", "ratio"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.gamma.to_string(),
            opt(r.prediction),
            opt(r.prediction.map(|p| p / r.gamma)),
        ])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_envelope<W: Write>(out: W, rows: &[EnvelopeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "relaxation", "envelope"])?;
    for r in rows {
        w.write_record([r.k.to_string(), r.relaxation.to_string(), r.envelope.to_string()])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_spectrum<W: Write>(out: W, spectrum: &Spectrum<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", "modulus", "eps", "a", "b", "residual", "seed_family"])?;
    for e in &spectrum.eigs {
        w.write_record([
            e.lambda.re.to_string(),
            e.lambda.im.to_string(),
            e.modulus().to_string(),
            e.eps.to_string(),
            e.a.to_string(),
            e.b.to_string(),
            e.residual.to_string(),
            e.seed_family.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Dense transition matrix, one row per line.
pub fn write_matrix<W: Write>(out: W, matrix: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in matrix {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Simulation output: `#` metadata lines, then `t,<column>` rows.
pub struct SimTable<'a> {
    pub column: &'a str,
    pub trials: u64,
    pub rng_seed: u64,
    /// Extra `# key: value` lines.
    pub notes: Vec<(String, String)>,
    pub rows: Vec<(usize, Vec<f64>)>,
    pub extra_columns: Vec<&'a str>,
}

pub fn write_sim<W: Write>(mut out: W, table: &SimTable<'_>) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "# trials: {}", table.trials).map_err(io)?;
    writeln!(out, "# rng_seed: {}", table.rng_seed).map_err(io)?;
    writeln!(out, "# rng: {RNG_ALGORITHM}").map_err(io)?;
    for (k, v) in &table.notes {
        writeln!(out, "# {k}: {v}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t", table.column];
    header.extend(table.extra_columns.iter().copied());
    w.write_record(&header)?;
    for (t, vals) in &table.rows {
        let mut rec = vec![t.to_string()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_csv_has_header_and_blank_optionals() {
        let rows = [ScanRecord {
            n: 4,
            k: 1,
            m_star: 2,
            gamma: 0.5,
            relaxation: 2.0,
            gap_numeric: None,
            ratio: None,
        }];
        let mut buf = Vec::new();
        write_scan(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "n,k,m_star,gamma,relaxation,gap_numeric,ratio\n4,1,2,0.5,2,,\n");
    }

    #[test]
    fn full_precision_pi() {
        let rows = [EnvelopeRow {
            k: 1,
            relaxation: std::f64::consts::PI,
            envelope: 1.0,
        }];
        let mut buf = Vec::new();
        write_envelope(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("3.141592653589793"));
    }

    #[test]
    fn sim_header_records_seed() {
        let t = SimTable {
            column: "tv",
            trials: 10,
            rng_seed: 42,
            notes: vec![],
            rows: vec![(0, vec![0.5])],
            extra_columns: vec![],
        };
        let mut buf = Vec::new();
        write_sim(&mut buf, &t).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# trials: 10\n# rng_seed: 42\n# rng: ChaCha8"));
        assert!(s.ends_with("t,tv\n0,0.5\n"));
    }
}
