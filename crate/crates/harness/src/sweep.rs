//! Monte-Carlo ε-sweeps.
//!
//! A sweep runs `n_realizations` trajectories of the regularised equation for
//! every `ε` in the list and reduces the per-trajectory statistic
//! `sup_{[δ,T]} ‖·‖_{B^s_{p,r}}` to a mean, a standard error and a 90th
//! percentile. Realisation `i` uses the same seed for every `ε`.
//!
//! Cells run on a rayon pool; results are collected in `(ε, realisation)`
//! order, so the output does not depend on the number of threads.

use rayon::prelude::*;
use sacwick_core::integrators::{integrate_deterministic, integrate_path, IntegratorConfig};
use sacwick_core::renorm::RenormState;
use sacwick_core::schedule::{limit_equation_lambda_sq, NoiseSchedule};
use sacwick_core::seed::realization_seed;
use sacwick_core::spectral::{Lattice, SpectralField};
use sacwick_core::stats::{check_non_increasing, Summary, TrendCheck};
use serde::{Deserialize, Serialize};

use crate::config::{lattice_for, SweepConfig};
use crate::error::{HarnessError, Result};

/// Width of the allowed upward step between consecutive means, in pooled
/// standard errors.
pub const TREND_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `σ² log(1/ε) → ∞`: `u_ε` itself should vanish.
    Trivial,
    /// Finite `λ²`: `u_ε − w_λ` should vanish.
    Limit,
}

/// One trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub eps: f64,
    pub realization: usize,
    pub seed: u64,
    /// `None` when the cell failed.
    pub sup_norm: Option<f64>,
    pub lp_time_norm: Option<f64>,
    pub failure: Option<String>,
}

/// Aggregate over the realisations of one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub eps: f64,
    pub sigma: f64,
    pub c_eps: Option<f64>,
    pub d_eps_sq: Option<f64>,
    pub k_max: usize,
    pub grid_size: usize,
    pub summary: Summary,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub regime: Regime,
    pub config: SweepConfig,
    /// `λ²` of the deterministic equation `u_ε` is compared with.
    pub reference_lambda_sq: Option<f64>,
    pub rows: Vec<EpsilonRow>,
    pub cells: Vec<CellResult>,
    /// Means non-increasing within [`TREND_TOLERANCE`] pooled standard errors.
    pub trend: TrendCheck,
    /// Empirical 90th percentiles non-increasing (no tolerance).
    pub p90_non_increasing: bool,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.summary.mean).collect()
    }
}

/// Builds a rayon pool; `threads = 0` lets rayon decide.
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
}

/// Sweep of `u_ε` for a schedule with `σ² log(1/ε) → ∞`.
pub fn run_triviality_sweep(cfg: &SweepConfig, pool: &rayon::ThreadPool) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.schedule.lambda_sq().is_some() {
        return Err(HarnessError::Config(format!(
            "{:?} is not in the σ² log(1/ε) → ∞ regime; use a constant σ₀ > 0",
            cfg.schedule
        )));
    }
    run_sweep(Regime::Trivial, cfg, None, pool)
}

/// Sweep of `u_ε − w` for a schedule with finite `λ²`.
///
/// The free field has `D_ε² → λ²/(4π)`, so `u_ε` approaches the
/// deterministic equation with linear coefficient `1 − 3·(8π·D²)/(8π)`,
/// i.e. the limit equation at `λ̃² = 8π · lim D_ε²`. The reference `w` is
/// integrated once on the finest lattice.
pub fn run_limit_sweep(cfg: &SweepConfig, pool: &rayon::ThreadPool) -> Result<SweepResult> {
    cfg.validate()?;
    let lambda_sq = match cfg.schedule {
        NoiseSchedule::Critical { .. } | NoiseSchedule::Power { .. } => {
            cfg.schedule.lambda_sq().expect("finite for these schedules")
        }
        other => {
            return Err(HarnessError::Config(format!(
                "{other:?} has no finite λ²; use a critical or power-law schedule"
            )))
        }
    };
    let reference_lambda_sq = limit_equation_lambda_sq(lambda_sq);
    let finest = lattice_for(
        *cfg.eps_list
            .last()
            .ok_or_else(|| HarnessError::Config("empty eps_list".into()))?,
    )?;
    let icfg = IntegratorConfig {
        dt: cfg.reference_dt.unwrap_or(cfg.integrator.dt),
        keep_fields: true,
        ..cfg.integrator_config()
    };
    let besov = cfg.besov.params()?;
    let w = integrate_deterministic(&cfg.initial.build(finest)?, reference_lambda_sq, &icfg, &besov)?;
    if let Some(b) = w.blow_up {
        return Err(HarnessError::Config(format!(
            "reference run blew up at t = {} (|c| = {:e})",
            b.time, b.magnitude
        )));
    }
    run_sweep(Regime::Limit, cfg, Some((reference_lambda_sq, w.fields)), pool)
}

struct Level {
    eps: f64,
    sigma: f64,
    lattice: Lattice,
    u0: SpectralField,
    renorm: std::result::Result<RenormState, String>,
}

fn run_sweep(
    regime: Regime,
    cfg: &SweepConfig,
    reference: Option<(f64, Vec<SpectralField>)>,
    pool: &rayon::ThreadPool,
) -> Result<SweepResult> {
    let icfg = cfg.integrator_config();
    let besov = cfg.besov.params()?;
    let levels = cfg
        .eps_list
        .iter()
        .map(|&eps| {
            let sigma = cfg.schedule.sigma(eps);
            let lattice = lattice_for(eps)?;
            let renorm = match regime {
                Regime::Trivial => RenormState::strong_noise(eps, sigma),
                Regime::Limit => RenormState::weak_noise(eps, sigma),
            };
            Ok(Level {
                eps,
                sigma,
                lattice,
                u0: cfg.initial.build(lattice)?,
                renorm: renorm.map_err(|e| e.to_string()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds: Vec<u64> = (0..cfg.n_realizations)
        .map(|i| realization_seed(cfg.master_seed, i as u64))
        .collect();

    let jobs: Vec<(usize, usize)> = (0..levels.len())
        .flat_map(|l| (0..cfg.n_realizations).map(move |r| (l, r)))
        .collect();
    let reference_fields = reference.as_ref().map(|(_, w)| w.as_slice());
    let cells: Vec<CellResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(l, r)| {
                let level = &levels[l];
                let mut cell = CellResult {
                    eps: level.eps,
                    realization: r,
                    seed: seeds[r],
                    sup_norm: None,
                    lp_time_norm: None,
                    failure: None,
                };
                let renorm = match &level.renorm {
                    Ok(renorm) => renorm,
                    Err(e) => {
                        cell.failure = Some(e.clone());
                        return cell;
                    }
                };
                match integrate_path(&level.u0, Some(renorm), &icfg, &besov, seeds[r], reference_fields) {
                    Ok(record) => match record.blow_up {
                        Some(b) => cell.failure = Some(format!("blow-up at t = {} (|c| = {:e})", b.time, b.magnitude)),
                        None => {
                            cell.sup_norm = Some(record.norm.sup_besov);
                            cell.lp_time_norm = Some(record.norm.lp_time_besov);
                        }
                    },
                    Err(e) => cell.failure = Some(e.to_string()),
                }
                cell
            })
            .collect()
    });

    let rows: Vec<EpsilonRow> = levels
        .iter()
        .enumerate()
        .map(|(l, level)| {
            let chunk = &cells[l * cfg.n_realizations..(l + 1) * cfg.n_realizations];
            let norms: Vec<f64> = chunk.iter().filter_map(|c| c.sup_norm).collect();
            let renorm = level.renorm.as_ref().ok();
            EpsilonRow {
                eps: level.eps,
                sigma: level.sigma,
                c_eps: renorm.and_then(|r| r.c_eps),
                d_eps_sq: renorm.map(|r| r.d_eps_sq),
                k_max: level.lattice.k_max(),
                grid_size: level.lattice.grid_size(),
                summary: Summary::of(&norms),
                failed: chunk.len() - norms.len(),
            }
        })
        .collect();
    let summaries: Vec<Summary> = rows.iter().map(|r| r.summary).collect();
    let trend = check_non_increasing(&summaries, TREND_TOLERANCE);
    let p90_non_increasing = summaries.windows(2).all(|w| w[1].p90 <= w[0].p90);
    Ok(SweepResult {
        regime,
        config: cfg.clone(),
        reference_lambda_sq: reference.map(|(l, _)| l),
        rows,
        cells,
        trend,
        p90_non_increasing,
    })
}
