//! Text formats: moment sequences, lattice grids, graymaps and Laguerre
//! expansion dumps.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::condensed::DensityGrid;
use crate::error::{Error, Result};
use crate::laguerre::{GammaFit, LaguerreExpansion};
use crate::measure::MomentSequence;

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = record.get(idx).ok_or_else(|| Error::Parse { line, message: format!("missing column {}", idx + 1) })?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("not a number: {raw:?}") })
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_error)?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got.len() < expected.len() || got[..expected.len()] != *expected {
        return Err(Error::Parse { line: 1, message: format!("expected header {}", expected.join(",")) });
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// `k,re,im` rows in index order.
pub fn moments_to_csv(seq: &MomentSequence) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, d) in seq.values().iter().enumerate() {
        let _ = writeln!(out, "{k},{},{}", d.re, d.im);
    }
    out
}

pub fn parse_moments_csv(text: &str) -> Result<MomentSequence> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut reader, &["k", "re", "im"])?;
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = row + 2;
        let k: usize = field(&record, 0, line)?;
        if k != row {
            return Err(Error::Parse { line, message: format!("expected index {row}, found {k}") });
        }
        values.push(Complex64::new(field(&record, 1, line)?, field(&record, 2, line)?));
    }
    MomentSequence::new(values)
}

pub fn write_moments(path: &Path, seq: &MomentSequence) -> Result<()> {
    write_file(path, &moments_to_csv(seq))
}

pub fn read_moments(path: &Path) -> Result<MomentSequence> {
    parse_moments_csv(&fs::read_to_string(path)?)
}

/// `re,im,value` rows, row-major with rows along the imaginary axis.
pub fn grid_to_csv(grid: &DensityGrid) -> String {
    let mut out = String::from("re,im,value\n");
    for (idx, v) in grid.values.iter().enumerate() {
        let z = grid.spec.node_at(idx);
        let _ = writeln!(out, "{},{},{}", z.re, z.im, v);
    }
    out
}

pub fn write_grid_csv(path: &Path, grid: &DensityGrid) -> Result<()> {
    write_file(path, &grid_to_csv(grid))
}

/// Plain graymap with maxval 65535: values scaled linearly from
/// `[0, max]`, negatives clipped, top row at the largest imaginary part.
pub fn grid_to_pgm(grid: &DensityGrid) -> String {
    let m = grid.spec.m;
    let max = grid.max();
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut out = format!("P2\n{m} {m}\n65535\n");
    for i in (0..m).rev() {
        let row: Vec<String> = (0..m)
            .map(|j| ((grid.get(i, j).max(0.0) * scale).round() as u32).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(path: &Path, grid: &DensityGrid) -> Result<()> {
    write_file(path, &grid_to_pgm(grid))
}

/// `k,alpha,beta,tau,b0,...,bM`, one row per diagonal index.
pub fn expansions_to_csv(rows: &[(usize, LaguerreExpansion)]) -> String {
    let order = rows.iter().map(|(_, e)| e.order()).max().unwrap_or(0);
    let mut out = String::from("k,alpha,beta,tau");
    for h in 0..=order {
        let _ = write!(out, ",b{h}");
    }
    out.push('\n');
    for (k, e) in rows {
        let _ = write!(out, "{k},{},{},{}", e.fit.shape, e.fit.scale, e.tau);
        for b in &e.coefficients {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_expansions_csv(text: &str) -> Result<Vec<(usize, LaguerreExpansion)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut reader, &["k", "alpha", "beta", "tau", "b0"])?;
    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = row + 2;
        let k = field(&record, 0, line)?;
        let fit = GammaFit::new(field(&record, 1, line)?, field(&record, 2, line)?)?;
        let tau = field(&record, 3, line)?;
        let coefficients = (4..record.len())
            .filter(|&i| !record[i].trim().is_empty())
            .map(|i| field(&record, i, line))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((k, LaguerreExpansion { fit, tau, coefficients }));
    }
    Ok(rows)
}
