//! JSON run configurations.

use std::path::{Path, PathBuf};

use sacwick_core::besov::BesovParams;
use sacwick_core::integrators::{uniform_times, Equation, IntegratorConfig};
use sacwick_core::renorm::Flavor;
use sacwick_core::schedule::NoiseSchedule;
use sacwick_core::spectral::{Lattice, SpectralField};
use sacwick_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, json_error, HarnessError, Result};
use crate::io::read_field;

/// Smallest cutoff the harness will allocate a lattice for.
pub const MIN_EPSILON: f64 = 1.0 / 512.0;

/// Lattice for noise cutoff `ε`: `K_max = ⌈1/ε⌉` and the alias-free grid.
pub fn lattice_for(epsilon: f64) -> Result<Lattice> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(HarnessError::Config(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    if epsilon < MIN_EPSILON {
        return Err(HarnessError::Config(format!(
            "ε = {epsilon} is below the memory guard 2^-9; the lattice would need K_max > 512"
        )));
    }
    // Guard against 1/ε landing a hair above an integer.
    let k_max = (1.0 / epsilon - 1e-9).ceil() as usize;
    Ok(Lattice::alias_free(k_max))
}

/// `(p, r, s)`; `s̄` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

impl BesovSpec {
    pub fn params(&self) -> Result<BesovParams> {
        Ok(BesovParams::new(self.p, self.r, self.s)?)
    }
}

impl Default for BesovSpec {
    fn default() -> Self {
        Self {
            p: 4.0,
            r: 2.0,
            s: -1.0 / 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// `amplitude · cos(k₁x₁ + k₂x₂)`.
    Cosine {
        amplitude: f64,
        k1: i64,
        k2: i64,
    },
    /// A field file written by [`crate::io::write_field`], resampled onto
    /// the run's lattice.
    File {
        path: PathBuf,
    },
}

impl InitialCondition {
    pub fn build(&self, lattice: Lattice) -> Result<SpectralField> {
        match self {
            InitialCondition::Constant { value } => Ok(SpectralField::constant(lattice, *value)),
            InitialCondition::Cosine { amplitude, k1, k2 } => {
                let (k1, k2) = (*k1, *k2);
                if !lattice.contains(k1, k2) {
                    return Err(HarnessError::Config(format!(
                        "cosine mode ({k1}, {k2}) lies outside K_max = {}",
                        lattice.k_max()
                    )));
                }
                let half = Complex64::new(0.5 * amplitude, 0.0);
                Ok(SpectralField::from_coeff_fn(lattice, |a, b| {
                    if (k1, k2) == (0, 0) && (a, b) == (0, 0) {
                        half * 2.0
                    } else if (a, b) == (k1, k2) || (a, b) == (-k1, -k2) {
                        half
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }))
            }
            InitialCondition::File { path } => Ok(read_field(path)?.resample(lattice)),
        }
    }
}

fn default_samples_per_unit() -> f64 {
    100.0
}

/// One ε-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schedule: NoiseSchedule,
    pub eps_list: Vec<f64>,
    pub n_realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub besov: BesovSpec,
    pub integrator: IntegratorConfig,
    pub initial: InitialCondition,
    /// Time step of the deterministic reference run (limit sweeps);
    /// defaults to the sweep's own step.
    #[serde(default)]
    pub reference_dt: Option<f64>,
    /// Sampling density used when `integrator.record_times` is empty.
    #[serde(default = "default_samples_per_unit")]
    pub samples_per_unit: f64,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text).map_err(json_error(path))
    }

    /// `σ₀ = 1`, `ε = 2^{-3}, …, 2^{-7}`, `u⁰ = cos x₁`, `(p, r, s) = (4, 2, −1/16)`,
    /// `T = 1`, `δ = 0.1`, 32 realisations.
    pub fn desk_scale(schedule: NoiseSchedule) -> Self {
        let mut integrator = IntegratorConfig::new(Equation::PhiEps, 2e-3, 1.0);
        integrator.warmup_delta = 0.1;
        Self {
            schedule,
            eps_list: (3..=7).map(|j| 0.5f64.powi(j)).collect(),
            n_realizations: 32,
            master_seed: 0,
            besov: BesovSpec::default(),
            integrator,
            initial: InitialCondition::Cosine {
                amplitude: 1.0,
                k1: 1,
                k2: 0,
            },
            reference_dt: None,
            samples_per_unit: default_samples_per_unit(),
        }
    }

    /// Integrator settings actually used: the regularised equation with
    /// the sampling grid filled in.
    pub fn integrator_config(&self) -> IntegratorConfig {
        let mut cfg = self.integrator.clone();
        cfg.equation = Equation::PhiEps;
        if cfg.record_times.is_empty() {
            cfg.record_times = uniform_times(cfg.t_end, self.samples_per_unit);
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.integrator_config().validate()?;
        if self.n_realizations == 0 {
            return Err(HarnessError::Config("n_realizations must be at least 1".into()));
        }
        if !self.eps_list.windows(2).all(|w| w[1] < w[0]) {
            return Err(HarnessError::Config("eps_list must be strictly decreasing".into()));
        }
        for &eps in &self.eps_list {
            lattice_for(eps)?;
        }
        let besov = self.besov.params()?;
        if !besov.is_admissible() {
            return Err(HarnessError::Config(format!(
                "(p, r, s) = ({}, {}, {}) is outside p ≥ 4, −2/(7p) < s < 0",
                besov.p, besov.r, besov.s
            )));
        }
        if let Some(dt) = self.reference_dt {
            IntegratorConfig {
                dt,
                ..self.integrator_config()
            }
            .validate()?;
        }
        Ok(())
    }
}

/// One trajectory of the regularised or the shifted equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub epsilon: f64,
    pub sigma: f64,
    /// Which free field the noise state (and the shifted equation) uses.
    pub flavor: Flavor,
    #[serde(default)]
    pub besov: BesovSpec,
    pub integrator: IntegratorConfig,
    pub initial: InitialCondition,
    #[serde(default = "default_samples_per_unit")]
    pub samples_per_unit: f64,
}

impl SimulateConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text).map_err(json_error(path))
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let mut cfg = self.integrator.clone();
        if cfg.record_times.is_empty() {
            cfg.record_times = uniform_times(cfg.t_end, self.samples_per_unit);
        }
        cfg
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0 / 16.0,
            sigma: 1.0,
            flavor: Flavor::StrongNoise,
            besov: BesovSpec::default(),
            integrator: IntegratorConfig::new(Equation::PhiEps, 2e-3, 1.0),
            initial: InitialCondition::Cosine {
                amplitude: 1.0,
                k1: 1,
                k2: 0,
            },
            samples_per_unit: default_samples_per_unit(),
        }
    }
}
