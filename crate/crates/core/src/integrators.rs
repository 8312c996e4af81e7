//! Exponential time stepping for the three dynamics
//!
//! * `PhiEps`: `du = (Δu + u − u³) dt + σ dW_ε`,
//! * `AuxEps`: the equation for `v = u − z_ε`, with `z_ε` the stationary
//!   stochastic convolution of the state's [`Flavor`],
//! * `PsiLambda`: `∂_t w = Δw + a_λ w − w³` with `a_λ = 1 − 3λ²/8π`.
//!
//! Each is written as `∂_t x = −μ_k x + N(x, t)` mode by mode. The linear part
//! is integrated exactly; `N` is explicit. Exponential Euler uses
//! `x ← e^{−μh}x + hφ₁(−μh) N(x)`. The second-order option is the
//! Cox-Matthews ETD2RK corrector `+ hφ₂(−μh)(N(a) − N(x))` on top of the
//! Euler predictor `a`. Noise enters through the exact Ornstein-Uhlenbeck
//! increment of the linear part, added to the predictor.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::besov::{besov_norm_pair, BesovParams, TrajectoryNorm};
use crate::fft::Transform2d;
use crate::math;
use crate::noise::{add_half_lattice, sample_stationary, NoiseState};
use crate::renorm::{Flavor, RenormState};
use crate::schedule::limit_growth_rate;
use crate::spectral::{Lattice, SpectralField};
use crate::{Error, Result};

/// Spectral magnitude beyond which a run is declared blown up.
pub const BLOW_UP_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Equation {
    #[default]
    PhiEps,
    AuxEps,
    PsiLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    #[default]
    ExponentialEuler,
    /// ETD2RK; second order for deterministic dynamics.
    ExponentialRk2,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    /// `δ`: the sup-norm statistic only looks at `[δ, T]`.
    pub warmup_delta: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub scheme: Scheme,
    /// Sample times; each is rounded to the nearest step.
    #[cfg_attr(feature = "serde", serde(default))]
    pub record_times: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub equation: Equation,
    /// `λ²` for [`Equation::PsiLambda`].
    #[cfg_attr(feature = "serde", serde(default))]
    pub lambda_sq: f64,
    /// Turning this off leaves the linear (and noise) part only.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub cubic: bool,
    /// Exact sub-steps per time step used to build the noise increment.
    #[cfg_attr(feature = "serde", serde(default = "default_one"))]
    pub noise_substeps: u32,
    /// Keep the sampled fields in the record.
    #[cfg_attr(feature = "serde", serde(default))]
    pub keep_fields: bool,
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

#[cfg(feature = "serde")]
fn default_one() -> u32 {
    1
}

/// `0, T/m, 2T/m, …, T` with `m = ⌈samples_per_unit · T⌉`.
pub fn uniform_times(t_end: f64, samples_per_unit: f64) -> Vec<f64> {
    let m = libm::ceil(samples_per_unit * t_end).max(1.0) as usize;
    (0..=m).map(|i| t_end * i as f64 / m as f64).collect()
}

impl IntegratorConfig {
    /// Exponential Euler, `δ = T/10`, 100 samples per unit time.
    pub fn new(equation: Equation, dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            warmup_delta: 0.1 * t_end,
            scheme: Scheme::ExponentialEuler,
            record_times: uniform_times(t_end, 100.0),
            equation,
            lambda_sq: 0.0,
            cubic: true,
            noise_substeps: 1,
            keep_fields: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(
                "dt",
                alloc::format!("must be finite and > 0, got {}", self.dt),
            ));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::invalid(
                "t_end",
                alloc::format!("must be finite and ≥ dt, got {}", self.t_end),
            ));
        }
        if !(self.warmup_delta > 0.0 && self.warmup_delta < self.t_end) {
            return Err(Error::invalid(
                "warmup_delta",
                alloc::format!("must lie in (0, T), got {}", self.warmup_delta),
            ));
        }
        if let Some(t) = self.record_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::invalid("record_times", alloc::format!("{t} is outside [0, T]")));
        }
        if !(self.lambda_sq >= 0.0 && self.lambda_sq.is_finite()) {
            return Err(Error::invalid(
                "lambda_sq",
                alloc::format!("must be finite and ≥ 0, got {}", self.lambda_sq),
            ));
        }
        if self.noise_substeps == 0 {
            return Err(Error::invalid("noise_substeps", "must be at least 1"));
        }
        self.step_count().map(|_| ())
    }

    /// `T/dt`, which has to be an integer.
    pub fn step_count(&self) -> Result<usize> {
        let ratio = self.t_end / self.dt;
        let n = libm::round(ratio);
        if math::abs(ratio - n) > 1e-9 * ratio {
            return Err(Error::invalid(
                "dt",
                alloc::format!("T = {} is not a whole number of steps of {}", self.t_end, self.dt),
            ));
        }
        Ok(n as usize)
    }

    fn record_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = self
            .record_times
            .iter()
            .map(|t| libm::round(t / self.dt) as usize)
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }

    /// Net linear coefficient `a_λ` of the limit equation.
    pub fn a_lambda(&self) -> f64 {
        limit_growth_rate(self.lambda_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlowUp {
    pub time: f64,
    pub magnitude: f64,
}

/// Sampled norms of one trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryRecord {
    pub equation: Equation,
    /// Realisation seed; `None` for deterministic runs.
    pub seed: Option<u64>,
    pub times: Vec<f64>,
    pub besov: Vec<f64>,
    pub besov_bar: Vec<f64>,
    pub l2: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub norm: TrajectoryNorm,
    /// Set when the run stopped early; the samples above are the prefix.
    pub blow_up: Option<BlowUp>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub fields: Vec<SpectralField>,
}

impl TrajectoryRecord {
    pub fn completed(&self) -> bool {
        self.blow_up.is_none()
    }
}

/// `e^{−μh}`, `hφ₁(−μh)` and `hφ₂(−μh)` per lattice mode for `μ = mass + |k|²`.
#[derive(Debug, Clone)]
struct Propagator {
    decay: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl Propagator {
    fn new(lattice: Lattice, mass: f64, h: f64) -> Self {
        let mut decay = Vec::with_capacity(lattice.len());
        let mut phi1 = Vec::with_capacity(lattice.len());
        let mut phi2 = Vec::with_capacity(lattice.len());
        for (k1, k2) in lattice.modes() {
            let z = -(mass + (k1 * k1 + k2 * k2) as f64) * h;
            decay.push(math::exp(z));
            phi1.push(h * math::phi1(z));
            phi2.push(h * math::phi2(z));
        }
        Self { decay, phi1, phi2 }
    }

    fn predict(&self, x: &SpectralField, n: &SpectralField) -> SpectralField {
        let mut out = x.clone();
        for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c = *c * self.decay[i] + n.coeffs()[i] * self.phi1[i];
        }
        out
    }

    fn correct(&self, a: &mut SpectralField, n_a: &SpectralField, n_x: &SpectralField) {
        for (i, c) in a.coeffs_mut().iter_mut().enumerate() {
            *c += (n_a.coeffs()[i] - n_x.coeffs()[i]) * self.phi2[i];
        }
    }
}

/// Linear mass `m` in `μ_k = m + |k|²` for each equation.
fn linear_mass(equation: Equation, renorm: Option<&RenormState>, lambda_sq: f64) -> Result<f64> {
    match equation {
        Equation::PhiEps => Ok(-1.0),
        Equation::PsiLambda => Ok(-limit_growth_rate(lambda_sq)),
        Equation::AuxEps => {
            let r = renorm
                .ok_or_else(|| Error::invalid("renorm", "the shifted equation needs renormalisation constants"))?;
            Ok(match r.flavor {
                Flavor::StrongNoise => r.mass,
                Flavor::WeakNoise => 3.0 * r.d_eps_sq - 1.0,
            })
        }
    }
}

/// Time stepper for one equation on a fixed lattice.
pub struct Integrator {
    lattice: Lattice,
    scheme: Scheme,
    dt: f64,
    cubic: bool,
    renorm: Option<RenormState>,
    prop: Propagator,
    tf: Transform2d,
    time: f64,
}

impl Integrator {
    pub fn new(lattice: Lattice, cfg: &IntegratorConfig, renorm: Option<&RenormState>) -> Result<Self> {
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return Err(Error::invalid(
                "dt",
                alloc::format!("must be finite and > 0, got {}", cfg.dt),
            ));
        }
        let mass = linear_mass(cfg.equation, renorm, cfg.lambda_sq)?;
        Ok(Self {
            lattice,
            scheme: cfg.scheme,
            dt: cfg.dt,
            cubic: cfg.cubic,
            renorm: renorm.copied(),
            prop: Propagator::new(lattice, mass, cfg.dt),
            tf: Transform2d::new(lattice.grid_size()),
            time: 0.0,
        })
    }

    pub fn transform(&mut self) -> &mut Transform2d {
        &mut self.tf
    }

    fn guard(&self, x: &SpectralField) -> Result<()> {
        let magnitude = x.max_abs_coeff();
        if !(magnitude <= BLOW_UP_GUARD) {
            return Err(Error::BlowUp {
                time: self.time,
                magnitude,
            });
        }
        Ok(())
    }

    fn minus_cube(&mut self, u: &SpectralField) -> Result<SpectralField> {
        if !self.cubic {
            return Ok(SpectralField::zeros(self.lattice));
        }
        u.map_pointwise(&mut self.tf, |x| -x * x * x)
    }

    /// Drift of the shifted equation given `v` and `z` on the lattice.
    fn aux_drift(&mut self, v: &SpectralField, z: &SpectralField) -> Result<SpectralField> {
        let renorm = self.renorm.expect("checked in Integrator::new");
        let d2 = renorm.d_eps_sq;
        let zg = z.to_physical(&mut self.tf)?;
        let mut vg = v.to_physical(&mut self.tf)?;
        let linear_z = match renorm.flavor {
            Flavor::StrongNoise => 0.0,
            Flavor::WeakNoise => 2.0 - 3.0 * d2,
        };
        let cubic = if self.cubic { 1.0 } else { 0.0 };
        let values = vg.values_mut();
        for (x, &zz) in values.iter_mut().zip(zg.values()) {
            let v = *x;
            let z2 = zz * zz - d2;
            let z3 = zz * zz * zz - 3.0 * d2 * zz;
            let bracket = v * v * v + 3.0 * v * v * zz + 3.0 * v * z2 + z3;
            *x = linear_z * zz - cubic * bracket;
        }
        SpectralField::from_physical(&vg, self.lattice, &mut self.tf)
    }

    fn check_field(&self, x: &SpectralField) -> Result<()> {
        self.lattice.ensure_same(&x.lattice())
    }

    /// One step of the regularised equation; advances `noise` by `dt`.
    pub fn step_phi_eps(&mut self, u: &SpectralField, noise: &mut NoiseState) -> Result<SpectralField> {
        self.check_field(u)?;
        let increment = noise.coupled_step(self.dt, -1.0)?;
        let n_u = self.minus_cube(u)?;
        let mut next = self.prop.predict(u, &n_u);
        add_half_lattice(&mut next, noise.modes(), &increment, 1.0)?;
        if self.scheme == Scheme::ExponentialRk2 {
            let n_a = self.minus_cube(&next)?;
            self.prop.correct(&mut next, &n_a, &n_u);
        }
        self.time += self.dt;
        self.guard(&next)?;
        Ok(next)
    }

    /// One step of the shifted equation for `v`; `z` is advanced by the
    /// exact Ornstein-Uhlenbeck transition in lockstep.
    pub fn step_aux(&mut self, v: &SpectralField, noise: &mut NoiseState) -> Result<SpectralField> {
        self.check_field(v)?;
        let z = noise.to_field(self.lattice)?;
        let n_v = self.aux_drift(v, &z)?;
        let mut next = self.prop.predict(v, &n_v);
        noise.ou_step(self.dt)?;
        if self.scheme == Scheme::ExponentialRk2 {
            let z_next = noise.to_field(self.lattice)?;
            let n_a = self.aux_drift(&next, &z_next)?;
            self.prop.correct(&mut next, &n_a, &n_v);
        }
        self.time += self.dt;
        self.guard(&next)?;
        Ok(next)
    }

    /// One step of the deterministic limit equation.
    pub fn step_psi(&mut self, w: &SpectralField) -> Result<SpectralField> {
        self.check_field(w)?;
        let n_w = self.minus_cube(w)?;
        let mut next = self.prop.predict(w, &n_w);
        if self.scheme == Scheme::ExponentialRk2 {
            let n_a = self.minus_cube(&next)?;
            self.prop.correct(&mut next, &n_a, &n_w);
        }
        self.time += self.dt;
        self.guard(&next)?;
        Ok(next)
    }
}

fn single_step_config(equation: Equation, dt: f64, scheme: Scheme) -> IntegratorConfig {
    IntegratorConfig {
        scheme,
        record_times: Vec::new(),
        ..IntegratorConfig::new(equation, dt, dt)
    }
}

/// One step of `du = (Δu + u − u³) dt + σ dW_ε` driven by `noise`.
pub fn step_phi_eps(u: &SpectralField, noise: &mut NoiseState, dt: f64, scheme: Scheme) -> Result<SpectralField> {
    let renorm = *noise.renorm();
    let cfg = single_step_config(Equation::PhiEps, dt, scheme);
    Integrator::new(u.lattice(), &cfg, Some(&renorm))?.step_phi_eps(u, noise)
}

/// One step of the shifted equation for `v = u − z_ε`.
pub fn step_aux(v: &SpectralField, noise: &mut NoiseState, dt: f64, scheme: Scheme) -> Result<SpectralField> {
    let renorm = *noise.renorm();
    let cfg = single_step_config(Equation::AuxEps, dt, scheme);
    Integrator::new(v.lattice(), &cfg, Some(&renorm))?.step_aux(v, noise)
}

struct Recorder<'a> {
    besov: BesovParams,
    reference: Option<&'a [SpectralField]>,
    keep_fields: bool,
    record: TrajectoryRecord,
}

impl Recorder<'_> {
    fn sample(&mut self, time: f64, u: &SpectralField, tf: &mut Transform2d) -> Result<()> {
        let index = self.record.times.len();
        let observed = match self.reference {
            Some(reference) => {
                let r = reference.get(index).ok_or_else(|| {
                    Error::invalid("reference", alloc::format!("no reference field for sample {index}"))
                })?;
                u.sub(&r.resample(u.lattice()))?
            }
            None => u.clone(),
        };
        let (b, b_bar) = besov_norm_pair(&observed, &self.besov, tf)?;
        let grid = observed.to_physical(tf)?;
        self.record.times.push(time);
        self.record.besov.push(b);
        self.record.besov_bar.push(b_bar);
        self.record.l2.push(observed.l2_norm());
        self.record.max_abs.push(grid.max_abs());
        if self.keep_fields {
            self.record.fields.push(u.clone());
        }
        Ok(())
    }

    fn finish(mut self, delta: f64, blow_up: Option<BlowUp>) -> TrajectoryRecord {
        let r = &mut self.record;
        r.norm = TrajectoryNorm::from_samples(&r.times, &r.besov, &r.besov_bar, delta, self.besov.p);
        r.blow_up = blow_up;
        self.record
    }
}

/// Runs `cfg.equation` from `u0` over `[0, T]`, sampling the Besov norms of
/// `u` (or of `u − reference[i]` at the `i`-th sample when a reference
/// trajectory is given). For the shifted equation `u = v + z_ε` is
/// reconstructed and `v(0) = u0 − z_ε(0)`.
///
/// A blow-up does not return an error: the record holds the samples taken
/// before it and [`TrajectoryRecord::blow_up`] says when it happened.
pub fn integrate_path(
    u0: &SpectralField,
    renorm: Option<&RenormState>,
    cfg: &IntegratorConfig,
    besov: &BesovParams,
    seed: u64,
    reference: Option<&[SpectralField]>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let steps = cfg.step_count()?;
    let record_steps = cfg.record_steps();
    let lattice = u0.lattice();
    let stochastic = cfg.equation != Equation::PsiLambda;
    if stochastic && renorm.is_none() {
        return Err(Error::invalid(
            "renorm",
            "stochastic equations need a renormalisation state",
        ));
    }
    let mut integrator = Integrator::new(lattice, cfg, renorm)?;
    let mut noise = match renorm {
        Some(r) if stochastic => Some(sample_stationary(r, seed).with_substeps(cfg.noise_substeps)?),
        _ => None,
    };

    let mut recorder = Recorder {
        besov: *besov,
        reference,
        keep_fields: cfg.keep_fields,
        record: TrajectoryRecord {
            equation: cfg.equation,
            seed: stochastic.then_some(seed),
            times: Vec::new(),
            besov: Vec::new(),
            besov_bar: Vec::new(),
            l2: Vec::new(),
            max_abs: Vec::new(),
            norm: TrajectoryNorm::from_samples(&[], &[], &[], cfg.warmup_delta, besov.p),
            blow_up: None,
            fields: Vec::new(),
        },
    };

    let mut x = match (cfg.equation, &noise) {
        (Equation::AuxEps, Some(z)) => u0.sub(&z.to_field(lattice)?)?,
        _ => u0.clone(),
    };
    let observable = |x: &SpectralField, noise: &Option<NoiseState>| -> Result<SpectralField> {
        match (cfg.equation, noise) {
            (Equation::AuxEps, Some(z)) => x.add(&z.to_field(lattice)?),
            _ => Ok(x.clone()),
        }
    };

    let mut next_record = record_steps.iter().peekable();
    let mut blow_up = None;
    for step in 0..=steps {
        if next_record.peek() == Some(&&step) {
            next_record.next();
            let u = observable(&x, &noise)?;
            recorder.sample(step as f64 * cfg.dt, &u, integrator.transform())?;
        }
        if step == steps {
            break;
        }
        let result = match (cfg.equation, noise.as_mut()) {
            (Equation::PhiEps, Some(z)) => integrator.step_phi_eps(&x, z),
            (Equation::AuxEps, Some(z)) => integrator.step_aux(&x, z),
            _ => integrator.step_psi(&x),
        };
        match result {
            Ok(next) => x = next,
            Err(Error::BlowUp { time, magnitude }) => {
                blow_up = Some(BlowUp { time, magnitude });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(recorder.finish(cfg.warmup_delta, blow_up))
}

/// Integrates `∂_t w = Δw + (1 − 3λ²/8π) w − w³` from `u0`.
pub fn integrate_deterministic(
    u0: &SpectralField,
    lambda_sq: f64,
    cfg: &IntegratorConfig,
    besov: &BesovParams,
) -> Result<TrajectoryRecord> {
    let cfg = IntegratorConfig {
        equation: Equation::PsiLambda,
        lambda_sq,
        ..cfg.clone()
    };
    integrate_path(u0, None, &cfg, besov, 0, None)
}

/// `∫ ½|∇w|² − (a/2)w² + ¼w⁴`, the free energy the limit equation descends.
pub fn free_energy(w: &SpectralField, a: f64, tf: &mut Transform2d) -> Result<f64> {
    let lattice = w.lattice();
    let scale = 4.0 * PI * PI;
    let mut grad = 0.0;
    let mut mass = 0.0;
    for (i, c) in w.coeffs().iter().enumerate() {
        let (k1, k2) = lattice.mode(i);
        grad += (k1 * k1 + k2 * k2) as f64 * c.norm_sqr();
        mass += c.norm_sqr();
    }
    let quartic = w.to_physical(tf)?.integrate(|x| x * x * x * x);
    Ok(0.5 * scale * grad - 0.5 * a * scale * mass + 0.25 * quartic)
}

/// Spatially constant solution of `w' = a w − w³` from `w(0) = c`.
pub fn constant_solution(a: f64, c: f64, t: f64) -> f64 {
    if a == 0.0 {
        return c / math::sqrt(1.0 + 2.0 * c * c * t);
    }
    // w² = a c² e^{2at} / (a + c²(e^{2at} − 1))
    let g = math::expm1(2.0 * a * t);
    c * math::exp(a * t) * math::sqrt(a / (a + c * c * g))
}
