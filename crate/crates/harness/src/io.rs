//! File formats.
//!
//! Field files are little-endian: `K_max` and `N` as `u64`, then the
//! `(2K_max+1)²` coefficients as interleaved `(re, im)` `f64` pairs in
//! row-major `k` order (`k₁` outer, `k₂` inner, both from `−K_max`).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sacwick_core::besov::TrajectoryNorm;
use sacwick_core::fft::Transform2d;
use sacwick_core::integrators::{BlowUp, TrajectoryRecord};
use sacwick_core::renorm::{LatticeSumReport, RenormState};
use sacwick_core::spectral::{Lattice, SpectralField};
use sacwick_core::Complex64;
use serde::Serialize;

use crate::error::{csv_error, io_error, json_error, HarnessError, Result};

pub fn write_field(path: &Path, field: &SpectralField) -> Result<()> {
    let lattice = field.lattice();
    let mut bytes = Vec::with_capacity(16 + 16 * lattice.len());
    bytes.extend_from_slice(&(lattice.k_max() as u64).to_le_bytes());
    bytes.extend_from_slice(&(lattice.grid_size() as u64).to_le_bytes());
    for c in field.coeffs() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(io_error(path))
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let malformed = |reason: String| HarnessError::FieldFormat {
        path: path.to_path_buf(),
        reason,
    };
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_error(path))?;
    if bytes.len() < 16 {
        return Err(malformed(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let (k_max, n) = (word(0) as usize, word(1) as usize);
    let lattice = Lattice::new(k_max, n).map_err(|e| malformed(e.to_string()))?;
    let expected = 16 + 16 * lattice.len();
    if bytes.len() != expected {
        return Err(malformed(format!(
            "expected {expected} bytes for K_max={k_max}, got {}",
            bytes.len()
        )));
    }
    let coeffs = bytes[16..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(SpectralField::from_coeffs(lattice, coeffs)?)
}

/// Grid values as `x1,x2,value` rows.
pub fn write_physical_csv(path: &Path, field: &SpectralField) -> Result<()> {
    let mut tf = Transform2d::new(field.lattice().grid_size());
    let grid = field.to_physical(&mut tf)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(["x1", "x2", "value"]).map_err(csv_error(path))?;
    let n = grid.grid_size();
    for i1 in 0..n {
        for i2 in 0..n {
            w.write_record([
                grid.coordinate(i1).to_string(),
                grid.coordinate(i2).to_string(),
                grid.get(i1, i2).to_string(),
            ])
            .map_err(csv_error(path))?;
        }
    }
    w.flush().map_err(io_error(path))
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error(path))?;
    // Written by hand so that an empty table still has its header.
    w.write_record(header).map_err(csv_error(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(io_error(path))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(json_error(path))?;
    out.write_all(b"\n").map_err(io_error(path))?;
    out.flush().map_err(io_error(path))
}

#[derive(Serialize)]
struct TrajectoryRow {
    time: f64,
    besov_norm: f64,
    l2_norm: f64,
    max_abs: f64,
}

/// Provenance written next to a trajectory CSV.
#[derive(Debug, Serialize)]
pub struct TrajectorySidecar<'a, C: Serialize> {
    pub config: &'a C,
    pub seed: Option<u64>,
    pub renorm: Option<RenormState>,
    pub norm: &'a TrajectoryNorm,
    pub blow_up: Option<BlowUp>,
}

/// Writes `<stem>.csv` with `time,besov_norm,l2_norm,max_abs` rows and the
/// `<stem>.json` sidecar. Returns both paths.
pub fn write_trajectory<C: Serialize>(
    dir: &Path,
    stem: &str,
    record: &TrajectoryRecord,
    config: &C,
    renorm: Option<RenormState>,
) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let rows: Vec<TrajectoryRow> = (0..record.times.len())
        .map(|i| TrajectoryRow {
            time: record.times[i],
            besov_norm: record.besov[i],
            l2_norm: record.l2[i],
            max_abs: record.max_abs[i],
        })
        .collect();
    write_rows(&csv_path, &["time", "besov_norm", "l2_norm", "max_abs"], &rows)?;
    let json_path = dir.join(format!("{stem}.json"));
    let sidecar = TrajectorySidecar {
        config,
        seed: record.seed,
        renorm,
        norm: &record.norm,
        blow_up: record.blow_up,
    };
    write_json(&json_path, &sidecar)?;
    Ok((csv_path, json_path))
}

/// One row of the `renorm` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormRow {
    pub epsilon: f64,
    pub sigma: f64,
    pub c_eps: f64,
    pub d_eps_sq: f64,
    /// `(3/4π) σ² log(1/ε)`.
    pub asymptotic: f64,
    /// `c_eps / asymptotic`.
    pub ratio: f64,
}

pub fn write_renorm_csv(path: &Path, rows: &[RenormRow]) -> Result<()> {
    write_rows(
        path,
        &["epsilon", "sigma", "c_eps", "d_eps_sq", "asymptotic", "ratio"],
        rows,
    )
}

#[derive(Serialize)]
struct BoundRow {
    a: f64,
    radius: f64,
    sum_value: f64,
    integral_value: f64,
    discrepancy: f64,
    bound_rhs_shape: f64,
    ratio: f64,
}

pub fn write_bounds_csv(path: &Path, reports: &[LatticeSumReport]) -> Result<()> {
    let rows: Vec<BoundRow> = reports
        .iter()
        .map(|r| BoundRow {
            a: r.a,
            radius: r.radius,
            sum_value: r.sum_value,
            integral_value: r.integral_value,
            discrepancy: r.discrepancy,
            bound_rhs_shape: r.bound_rhs_shape,
            ratio: r.ratio(),
        })
        .collect();
    write_rows(
        path,
        &[
            "a",
            "radius",
            "sum_value",
            "integral_value",
            "discrepancy",
            "bound_rhs_shape",
            "ratio",
        ],
        &rows,
    )
}
