//! Sweep output files.

use std::path::{Path, PathBuf};

use sacwick_core::besov::BesovParams;
use sacwick_core::integrators::IntegratorConfig;
use sacwick_core::stats::TrendCheck;
use serde::Serialize;

use crate::config::SweepConfig;
use crate::error::{io_error, Result};
use crate::io::{write_json, write_rows};
use crate::sweep::{Regime, SweepResult};

#[derive(Serialize)]
struct SweepRow {
    eps: f64,
    sigma: f64,
    c_eps: Option<f64>,
    d_eps_sq: Option<f64>,
    mean_norm: f64,
    stderr: f64,
    n: usize,
    failed: usize,
}

#[derive(Serialize)]
struct NormPoint {
    eps: f64,
    log2_inv_eps: f64,
    mean_norm: f64,
    stderr: f64,
    p90: f64,
    n: usize,
}

#[derive(Serialize)]
struct CellRow<'a> {
    eps: f64,
    realization: usize,
    seed: u64,
    sup_norm: Option<f64>,
    lp_time_norm: Option<f64>,
    failure: Option<&'a str>,
}

#[derive(Serialize)]
struct Grid {
    eps: f64,
    k_max: usize,
    grid_size: usize,
}

#[derive(Serialize)]
struct Provenance<'a> {
    regime: Regime,
    master_seed: u64,
    realization_seeds: Vec<u64>,
    config: &'a SweepConfig,
    /// The integrator settings after defaults were filled in.
    integrator: IntegratorConfig,
    besov: Option<BesovParams>,
    grids: Vec<Grid>,
    reference_lambda_sq: Option<f64>,
    trend: &'a TrendCheck,
    p90_non_increasing: bool,
    version: &'static str,
}

/// Writes `sweep.csv`, `config.json`, `plotdata_norms.csv` and
/// `plotdata_cells.csv` into `out_dir` and returns their paths.
pub fn emit_report(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let sweep_path = out_dir.join("sweep.csv");
    let rows: Vec<SweepRow> = result
        .rows
        .iter()
        .map(|r| SweepRow {
            eps: r.eps,
            sigma: r.sigma,
            c_eps: r.c_eps,
            d_eps_sq: r.d_eps_sq,
            mean_norm: r.summary.mean,
            stderr: r.summary.stderr,
            n: r.summary.n,
            failed: r.failed,
        })
        .collect();
    write_rows(
        &sweep_path,
        &[
            "eps",
            "sigma",
            "c_eps",
            "d_eps_sq",
            "mean_norm",
            "stderr",
            "n",
            "failed",
        ],
        &rows,
    )?;

    let norms_path = out_dir.join("plotdata_norms.csv");
    let points: Vec<NormPoint> = result
        .rows
        .iter()
        .map(|r| NormPoint {
            eps: r.eps,
            log2_inv_eps: (1.0 / r.eps).log2(),
            mean_norm: r.summary.mean,
            stderr: r.summary.stderr,
            p90: r.summary.p90,
            n: r.summary.n,
        })
        .collect();
    write_rows(
        &norms_path,
        &["eps", "log2_inv_eps", "mean_norm", "stderr", "p90", "n"],
        &points,
    )?;

    let cells_path = out_dir.join("plotdata_cells.csv");
    let cells: Vec<CellRow> = result
        .cells
        .iter()
        .map(|c| CellRow {
            eps: c.eps,
            realization: c.realization,
            seed: c.seed,
            sup_norm: c.sup_norm,
            lp_time_norm: c.lp_time_norm,
            failure: c.failure.as_deref(),
        })
        .collect();
    write_rows(
        &cells_path,
        &["eps", "realization", "seed", "sup_norm", "lp_time_norm", "failure"],
        &cells,
    )?;

    let config_path = out_dir.join("config.json");
    let cfg = &result.config;
    let provenance = Provenance {
        regime: result.regime,
        master_seed: cfg.master_seed,
        realization_seeds: (0..cfg.n_realizations)
            .map(|i| sacwick_core::seed::realization_seed(cfg.master_seed, i as u64))
            .collect(),
        config: cfg,
        integrator: cfg.integrator_config(),
        besov: cfg.besov.params().ok(),
        grids: result
            .rows
            .iter()
            .map(|r| Grid {
                eps: r.eps,
                k_max: r.k_max,
                grid_size: r.grid_size,
            })
            .collect(),
        reference_lambda_sq: result.reference_lambda_sq,
        trend: &result.trend,
        p90_non_increasing: result.p90_non_increasing,
        version: env!("CARGO_PKG_VERSION"),
    };
    write_json(&config_path, &provenance)?;

    Ok(vec![sweep_path, config_path, norms_path, cells_path])
}
