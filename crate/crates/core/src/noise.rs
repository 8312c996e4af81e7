//! Truncated cylindrical Wiener process and the stationary stochastic
//! convolution `z_ε`.
//!
//! Noise lives on the disc `|k| ≤ 1/ε` in the orthonormal basis `e_k`. Only
//! the half-lattice `k = 0`, `k₁ > 0`, or `k₁ = 0, k₂ > 0` is stored; the
//! other half is the complex conjugate, so the reality condition holds
//! exactly. The complex Brownian motions satisfy `E|β_k(t)|² = t` with
//! independent real and imaginary parts; `β_0` is real with variance `t`.
//!
//! Each mode of `z` is an Ornstein-Uhlenbeck process with rate
//! `μ_k = Λ + |k|²` and is advanced by its exact Gaussian transition. A step
//! can also return the stochastic integral of the *same* Brownian increment
//! against a second rate (see [`NoiseState::coupled_step`]), which is how the
//! regularised equation and the shifted equation share one noise path.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::Transform2d;
use crate::math;
use crate::renorm::{wick_power, RenormState};
use crate::seed;
use crate::spectral::{Lattice, SpectralField, BASIS_SCALE};
use crate::{Complex64, Error, Result};

/// Half-lattice modes of the disc `|k| ≤ radius`, with `(0, 0)` first.
pub fn half_disc(radius: f64) -> Vec<(i64, i64)> {
    let r = math::floor(radius) as i64;
    let r2 = radius * radius;
    let mut modes = Vec::new();
    modes.push((0, 0));
    for k1 in 0..=r {
        for k2 in -r..=r {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            if ((k1 * k1 + k2 * k2) as f64) <= r2 {
                modes.push((k1, k2));
            }
        }
    }
    modes
}

/// Smallest square cutoff containing the disc `|k| ≤ radius`.
pub fn required_k_max(radius: f64) -> usize {
    math::floor(radius) as usize
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Standard normal with `E|ξ|² = 1`: complex off the origin, real at `k = 0`.
fn mode_normal(rng: &mut ChaCha8Rng, origin: bool) -> Complex64 {
    if origin {
        let re: f64 = StandardNormal.sample(rng);
        Complex64::new(re, 0.0)
    } else {
        complex_normal(rng)
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(
            "h",
            alloc::format!("time step must be finite and > 0, got {h}"),
        ));
    }
    Ok(())
}

/// Current `z_ε` together with its random stream.
#[derive(Debug, Clone)]
pub struct NoiseState {
    renorm: RenormState,
    modes: Vec<(i64, i64)>,
    /// `ẑ_k = (e_k, z)` on the half-lattice.
    values: Vec<Complex64>,
    rng: ChaCha8Rng,
    seed: u64,
    time: f64,
    substeps: u32,
    cache: Option<StepCoefficients>,
}

/// Per-mode transition coefficients for one `(sub-step, companion mass)` pair.
#[derive(Debug, Clone)]
struct StepCoefficients {
    sub: f64,
    companion_mass: f64,
    /// `[e^{−μh}, √v_z, e^{−νh}, c/√v_z, √(v_c − c²/v_z)]`
    per_mode: Vec<[f64; 5]>,
}

/// Draws `z_ε(0)` from the invariant measure `μ_ε`.
pub fn sample_stationary(renorm: &RenormState, seed: u64) -> NoiseState {
    let modes = half_disc(renorm.radius());
    let mut rng = seed::stream(seed);
    let values = modes
        .iter()
        .map(|&(k1, k2)| {
            let xi = mode_normal(&mut rng, k1 == 0 && k2 == 0);
            xi * math::sqrt(stationary_variance(renorm, k1, k2))
        })
        .collect();
    NoiseState {
        renorm: *renorm,
        modes,
        values,
        rng,
        seed,
        time: 0.0,
        substeps: 1,
        cache: None,
    }
}

/// `E|ẑ_k|² = σ²/(2(Λ + |k|²))`.
pub fn stationary_variance(renorm: &RenormState, k1: i64, k2: i64) -> f64 {
    renorm.sigma * renorm.sigma / (2.0 * (renorm.mass + (k1 * k1 + k2 * k2) as f64))
}

impl NoiseState {
    /// Resolves every step of length `h` into `substeps` exact sub-steps of
    /// length `h/substeps`, drawing fresh normals for each. Two runs with
    /// steps `h` and `h/2` and substep counts `2m` and `m` therefore see the
    /// same Brownian path.
    pub fn with_substeps(mut self, substeps: u32) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        self.substeps = substeps;
        Ok(self)
    }

    pub fn renorm(&self) -> &RenormState {
        &self.renorm
    }

    pub fn modes(&self) -> &[(i64, i64)] {
        &self.modes
    }

    /// Basis coordinates `ẑ_k` on the half-lattice, aligned with [`Self::modes`].
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `ẑ_k` for any `k`, using the mirror for the lower half.
    pub fn mode(&self, k1: i64, k2: i64) -> Complex64 {
        let (stored, conj) = if k1 > 0 || (k1 == 0 && k2 >= 0) {
            ((k1, k2), false)
        } else {
            ((-k1, -k2), true)
        };
        match self.modes.iter().position(|&m| m == stored) {
            Some(i) if conj => self.values[i].conj(),
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn rate(&self, i: usize) -> f64 {
        let (k1, k2) = self.modes[i];
        self.renorm.mass + (k1 * k1 + k2 * k2) as f64
    }

    /// Exact transition `ẑ_k ← e^{−μ_k h} ẑ_k + σ √((1 − e^{−2μ_k h})/(2μ_k)) ξ_k`.
    pub fn ou_step(&mut self, h: f64) -> Result<()> {
        self.coupled_step(h, 0.0).map(|_| ())
    }

    /// Advances `z` by `h` and returns, for each stored mode, the integral
    /// `σ ∫_t^{t+h} e^{−ν_k(t+h−s)} dβ_k(s)` with `ν_k = companion_mass + |k|²`
    /// over the same Brownian increment.
    ///
    /// Per (sub)step and mode two normals `(ξ, η)` are drawn whatever the
    /// companion rate is, so the random stream does not depend on it.
    pub fn coupled_step(&mut self, h: f64, companion_mass: f64) -> Result<Vec<Complex64>> {
        check_step(h)?;
        let sigma = self.renorm.sigma;
        let sub = h / self.substeps as f64;
        let coefficients = match self.cache.take() {
            Some(c) if c.sub == sub && c.companion_mass == companion_mass => c,
            _ => self.step_coefficients(sub, companion_mass),
        };
        let mut companion = alloc::vec![Complex64::new(0.0, 0.0); self.modes.len()];
        for _ in 0..self.substeps {
            for (i, &(k1, k2)) in self.modes.iter().enumerate() {
                let origin = k1 == 0 && k2 == 0;
                let xi = mode_normal(&mut self.rng, origin);
                let eta = mode_normal(&mut self.rng, origin);
                let [decay_z, sz, decay_c, beta, rest] = coefficients.per_mode[i];
                self.values[i] = self.values[i] * decay_z + xi * (sigma * sz);
                companion[i] = companion[i] * decay_c + (xi * beta + eta * rest) * sigma;
            }
        }
        self.cache = Some(coefficients);
        self.time += h;
        Ok(companion)
    }

    fn step_coefficients(&self, sub: f64, companion_mass: f64) -> StepCoefficients {
        let per_mode = (0..self.modes.len())
            .map(|i| {
                let (k1, k2) = self.modes[i];
                let mu = self.rate(i);
                let nu = companion_mass + (k1 * k1 + k2 * k2) as f64;
                let var_z = math::decay_integral(2.0 * mu, sub);
                let var_c = math::decay_integral(2.0 * nu, sub);
                let cov = math::decay_integral(mu + nu, sub);
                let sz = math::sqrt(var_z);
                let beta = cov / sz;
                let rest = math::sqrt((var_c - beta * beta).max(0.0));
                [math::exp(-mu * sub), sz, math::exp(-nu * sub), beta, rest]
            })
            .collect();
        StepCoefficients {
            sub,
            companion_mass,
            per_mode,
        }
    }

    /// `z_ε` as a field on `lattice`, which must contain the whole disc.
    pub fn to_field(&self, lattice: Lattice) -> Result<SpectralField> {
        let mut f = SpectralField::zeros(lattice);
        add_half_lattice(&mut f, &self.modes, &self.values, 1.0)?;
        Ok(f)
    }

    /// `:z_εⁿ:` with the state's `D_ε²`.
    pub fn wick_z_powers(&self, n: u32, lattice: Lattice, tf: &mut Transform2d) -> Result<SpectralField> {
        let z = self.to_field(lattice)?;
        wick_power(&z, n, self.renorm.d_eps_sq, tf)
    }
}

/// Adds `scale · Σ v_k e_k` (half-lattice basis coordinates, mirrored) to `f`.
pub fn add_half_lattice(f: &mut SpectralField, modes: &[(i64, i64)], values: &[Complex64], scale: f64) -> Result<()> {
    let lattice = f.lattice();
    if let Some(&(k1, k2)) = modes.iter().find(|&&(k1, k2)| !lattice.contains(k1, k2)) {
        return Err(Error::invalid(
            "lattice",
            alloc::format!("K_max={} does not contain noise mode ({k1}, {k2})", lattice.k_max()),
        ));
    }
    let factor = scale / BASIS_SCALE;
    let coeffs = f.coeffs_mut();
    for (&(k1, k2), v) in modes.iter().zip(values) {
        let c = v * factor;
        coeffs[lattice.index(k1, k2)] += c;
        if k1 != 0 || k2 != 0 {
            coeffs[lattice.index(-k1, -k2)] += c.conj();
        }
    }
    Ok(())
}

/// `σ(W_ε(t + h) − W_ε(t))` on `lattice`: independent increments of
/// variance `h` per mode, mirrored by conjugation.
pub fn wiener_increment(epsilon: f64, sigma: f64, h: f64, seed: u64, lattice: Lattice) -> Result<SpectralField> {
    check_step(h)?;
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", alloc::format!("must be > 0, got {epsilon}")));
    }
    let modes = half_disc(1.0 / epsilon);
    let mut rng = seed::stream(seed);
    let scale = sigma * math::sqrt(h);
    let values: Vec<Complex64> = modes
        .iter()
        .map(|&(k1, k2)| mode_normal(&mut rng, k1 == 0 && k2 == 0) * scale)
        .collect();
    let mut f = SpectralField::zeros(lattice);
    add_half_lattice(&mut f, &modes, &values, 1.0)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::{lattice_point_count, RenormState};
    use crate::stats::Summary;

    fn within(samples: &[f64], target: f64, ses: f64) -> bool {
        let s = Summary::of(samples);
        (s.mean - target).abs() <= ses * s.stderr
    }

    #[test]
    fn half_disc_covers_the_disc_once() {
        for r in [1.0, 2.5, 8.0, 13.0] {
            let half = half_disc(r);
            assert_eq!(2 * half.len() - 1, lattice_point_count(r) as usize);
        }
        assert_eq!(half_disc(1.0), [(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn zero_sigma_gives_zero_modes() {
        let renorm = RenormState::weak_noise(0.25, 0.0).unwrap();
        let mut z = sample_stationary(&renorm, 1);
        assert!(z.values().iter().all(|c| c.norm() == 0.0));
        z.ou_step(0.1).unwrap();
        assert!(z.values().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn pure_decay_without_noise() {
        let renorm = RenormState::weak_noise(0.25, 0.0).unwrap();
        let mut z = sample_stationary(&renorm, 1);
        z.values.iter_mut().for_each(|v| *v = Complex64::new(1.0, -2.0));
        z.ou_step(0.3).unwrap();
        for (&(k1, k2), v) in z.modes().iter().zip(z.values()) {
            let decay = (-(1.0 + (k1 * k1 + k2 * k2) as f64) * 0.3).exp();
            assert!((v - Complex64::new(1.0, -2.0) * decay).norm() < 1e-15);
        }
    }

    #[test]
    fn stationary_variance_matches_formula() {
        let renorm = RenormState::strong_noise(0.25, 1.0).unwrap();
        let probes = [(0, 0), (1, 0), (0, 2), (2, -3), (4, 0)];
        let mut samples = alloc::vec![Vec::new(); probes.len()];
        for trial in 0..10_000 {
            let z = sample_stationary(&renorm, trial);
            for (j, &(k1, k2)) in probes.iter().enumerate() {
                samples[j].push(z.mode(k1, k2).norm_sqr());
            }
        }
        for (j, &(k1, k2)) in probes.iter().enumerate() {
            assert!(
                within(&samples[j], stationary_variance(&renorm, k1, k2), 5.0),
                "k = ({k1}, {k2})"
            );
        }
    }

    #[test]
    fn reality_condition_is_exact() {
        let renorm = RenormState::weak_noise(0.2, 0.7).unwrap();
        let lattice = Lattice::alias_free(5);
        let mut z = sample_stationary(&renorm, 9);
        z.ou_step(0.01).unwrap();
        let f = z.to_field(lattice).unwrap();
        assert_eq!(f.hermitian_defect(), 0.0);
        assert_eq!(z.mode(0, 0).im, 0.0);
        assert_eq!(z.mode(-2, 1), z.mode(2, -1).conj());
    }

    #[test]
    fn to_field_rejects_small_lattice() {
        let renorm = RenormState::weak_noise(0.2, 1.0).unwrap();
        let z = sample_stationary(&renorm, 0);
        assert!(z.to_field(Lattice::alias_free(4)).is_err());
        assert!(z.to_field(Lattice::alias_free(required_k_max(5.0))).is_ok());
    }

    #[test]
    fn rejects_non_positive_steps() {
        let renorm = RenormState::weak_noise(0.5, 1.0).unwrap();
        let mut z = sample_stationary(&renorm, 0);
        assert!(z.ou_step(0.0).is_err());
        assert!(z.ou_step(-1.0).is_err());
        assert!(wiener_increment(0.5, 1.0, 0.0, 0, Lattice::alias_free(2)).is_err());
    }

    #[test]
    fn long_step_forgets_the_start() {
        // h → ∞: decay factor vanishes, update variance is the stationary one.
        let renorm = RenormState::weak_noise(0.5, 1.0).unwrap();
        let mut z = sample_stationary(&renorm, 3);
        z.values.iter_mut().for_each(|v| *v = Complex64::new(1e6, 0.0));
        z.ou_step(1e3).unwrap();
        assert!(z.values().iter().all(|v| v.norm() < 10.0));
    }

    #[test]
    fn two_half_steps_have_the_law_of_one_step() {
        // From a fixed start z0 the exact law of z(h) is Gaussian with mean
        // e^{−μh} z0 and E|z − mean|² = σ²(1 − e^{−2μh})/(2μ).
        let renorm = RenormState::weak_noise(0.5, 1.3).unwrap();
        let h = 0.2;
        let start = Complex64::new(0.8, -0.3);
        let k = (1, 1);
        let mu = renorm.mass + 2.0;
        let mean = start * (-mu * 2.0 * h).exp();
        let var = renorm.sigma * renorm.sigma * (1.0 - (-2.0 * mu * 2.0 * h).exp()) / (2.0 * mu);
        let mut two = (Vec::new(), Vec::new(), Vec::new());
        let mut one = (Vec::new(), Vec::new(), Vec::new());
        for trial in 0..10_000u64 {
            for (path, steps, h) in [(&mut two, 2, h), (&mut one, 1, 2.0 * h)] {
                let mut z = sample_stationary(&renorm, trial * 2 + steps);
                let i = z.modes().iter().position(|&m| m == k).unwrap();
                z.values[i] = start;
                for _ in 0..steps {
                    z.ou_step(h).unwrap();
                }
                let v = z.values()[i];
                path.0.push(v.re);
                path.1.push(v.im);
                path.2.push((v - mean).norm_sqr());
            }
        }
        for path in [&two, &one] {
            assert!(within(&path.0, mean.re, 5.0));
            assert!(within(&path.1, mean.im, 5.0));
            assert!(within(&path.2, var, 5.0));
        }
    }

    #[test]
    fn substeps_compose_exactly() {
        // With σ = 0 a step of h in m substeps is the same decay as one step.
        let renorm = RenormState::weak_noise(0.5, 0.0).unwrap();
        let mut a = sample_stationary(&renorm, 0).with_substeps(4).unwrap();
        let mut b = sample_stationary(&renorm, 0);
        a.values.iter_mut().for_each(|v| *v = Complex64::new(1.0, 1.0));
        b.values.iter_mut().for_each(|v| *v = Complex64::new(1.0, 1.0));
        a.ou_step(0.4).unwrap();
        b.ou_step(0.4).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn companion_with_own_rate_reproduces_z_increment() {
        let renorm = RenormState::weak_noise(0.5, 1.0).unwrap();
        let mut z = sample_stationary(&renorm, 5);
        let before = z.values().to_vec();
        let incr = z.coupled_step(0.05, renorm.mass).unwrap();
        for (i, &(k1, k2)) in z.modes().iter().enumerate() {
            let decay = (-(renorm.mass + (k1 * k1 + k2 * k2) as f64) * 0.05).exp();
            // The conditional part vanishes up to the rounding of v_c − c²/v_z.
            assert!((z.values()[i] - before[i] * decay - incr[i]).norm() < 1e-7);
        }
    }

    #[test]
    fn companion_covariance_matches_exact_law() {
        // Cov(I_z, I_u) = σ²(1 − e^{−(μ+ν)h})/(μ+ν) for the k = 0 mode with ν = −1.
        let renorm = RenormState::weak_noise(0.5, 1.0).unwrap();
        let h = 0.3;
        let mut products = Vec::new();
        let mut var_u = Vec::new();
        for trial in 0..10_000 {
            let mut z = sample_stationary(&renorm, trial);
            let z0 = z.values()[0];
            let incr = z.coupled_step(h, -1.0).unwrap();
            let iz = z.values()[0] - z0 * (-h).exp();
            products.push((iz * incr[0].conj()).re);
            var_u.push(incr[0].norm_sqr());
        }
        let cov = math::decay_integral(0.0, h);
        assert!(within(&products, cov, 5.0));
        assert!(within(&var_u, math::decay_integral(-2.0, h), 5.0));
    }

    #[test]
    fn wiener_increment_energy() {
        let epsilon = 0.25;
        let (sigma, h) = (0.9, 0.01);
        let lattice = Lattice::alias_free(4);
        let count = lattice_point_count(4.0) as f64;
        let samples: Vec<f64> = (0..4000)
            .map(|s| {
                wiener_increment(epsilon, sigma, h, s, lattice)
                    .unwrap()
                    .l2_norm()
                    .powi(2)
            })
            .collect();
        assert!(within(&samples, sigma * sigma * h * count, 5.0));
        let f = wiener_increment(epsilon, sigma, h, 0, lattice).unwrap();
        assert_eq!(f.hermitian_defect(), 0.0);
    }

    #[test]
    fn wick_powers_of_z_are_centred() {
        let renorm = RenormState::weak_noise(0.125, 1.0).unwrap();
        let lattice = Lattice::alias_free(8);
        let mut tf = Transform2d::new(lattice.grid_size());
        let mut second = Vec::new();
        let mut third = Vec::new();
        for trial in 0..1000 {
            let z = sample_stationary(&renorm, trial);
            second.push(z.wick_z_powers(2, lattice, &mut tf).unwrap().mean());
            third.push(z.wick_z_powers(3, lattice, &mut tf).unwrap().mean());
        }
        assert!(within(&second, 0.0, 5.0));
        assert!(within(&third, 0.0, 5.0));
        let z = sample_stationary(&renorm, 0);
        assert_eq!(
            z.wick_z_powers(1, lattice, &mut tf).unwrap(),
            z.to_field(lattice).unwrap()
        );
    }

    #[test]
    fn same_seed_same_path() {
        let renorm = RenormState::strong_noise(0.25, 1.0).unwrap();
        let run = || {
            let mut z = sample_stationary(&renorm, 77);
            for _ in 0..5 {
                z.ou_step(0.01).unwrap();
            }
            z.values().to_vec()
        };
        assert_eq!(run(), run());
    }
}
