//! Renormalisation constants and Wick powers.
//!
//! The free field of the linearised dynamics with mass `Λ` has pointwise
//! variance
//!
//! ```text
//! D² = (σ²/8π²) Σ_{|k| ≤ 1/ε} 1/(Λ + |k|²)
//! ```
//!
//! The strong-noise construction picks `Λ = C_ε − 1` with `C_ε = 3D²`, a
//! fixed-point equation in `C_ε` ([`solve_renorm_constant`]); the weak-noise
//! construction uses `Λ = 1` ([`RenormState::weak_noise`]).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::Transform2d;
use crate::math;
use crate::spectral::SpectralField;
use crate::{Complex64, Error, Result};

/// Rows shorter than this are summed term by term; longer rows sum the first
/// `DIRECT_TERMS` terms directly and the rest by Euler-Maclaurin.
const DIRECT_TERMS: i64 = 16;

/// `B_{2i}/(2i)!` for `i = 1..=4`.
const EM_WEIGHTS: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30_240.0, -1.0 / 1_209_600.0];

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const MAX_BISECTIONS: usize = 200;

/// `Σ_{k ∈ Z², |k| ≤ R} 1/(a + |k|²)` for `a ≥ 1`, `R ≥ 1`.
pub fn lattice_sum(a: f64, radius: f64) -> Result<f64> {
    if !(a >= 1.0) || !a.is_finite() {
        return Err(Error::invalid("a", alloc::format!("must be finite and ≥ 1, got {a}")));
    }
    if !(radius >= 1.0) || !radius.is_finite() {
        return Err(Error::invalid(
            "R",
            alloc::format!("must be finite and ≥ 1, got {radius}"),
        ));
    }
    Ok(lattice_sum_unchecked(a, radius))
}

/// [`lattice_sum`] for any `a > 0` and `R ≥ 0`. The renormalisation solver
/// needs `a = C_ε − 1 ∈ (0, 1)`.
pub fn lattice_sum_unchecked(a: f64, radius: f64) -> f64 {
    debug_assert!(a > 0.0 && radius >= 0.0);
    let r_sq = radius * radius;
    let rows = math::floor(radius) as i64;
    let mut acc = Neumaier::default();
    for k1 in 0..=rows {
        let m = row_half_width(k1, r_sq);
        if m < 0 {
            continue;
        }
        let b = a + (k1 * k1) as f64;
        let row = 1.0 / b + 2.0 * half_row_sum(b, m);
        acc.add(if k1 == 0 { row } else { 2.0 * row });
    }
    acc.total()
}

/// Number of lattice points with `|k| ≤ R`.
pub fn lattice_point_count(radius: f64) -> u64 {
    let r_sq = radius * radius;
    let rows = math::floor(radius) as i64;
    (-rows..=rows)
        .map(|k1| {
            let m = row_half_width(k1, r_sq);
            if m < 0 {
                0
            } else {
                (2 * m + 1) as u64
            }
        })
        .sum()
}

/// Largest `m ≥ 0` with `k1² + m² ≤ R²`, or `−1` when the row is empty.
fn row_half_width(k1: i64, r_sq: f64) -> i64 {
    let rest = r_sq - (k1 * k1) as f64;
    if rest < 0.0 {
        return -1;
    }
    let mut m = math::floor(math::sqrt(rest)) as i64;
    while ((m + 1) * (m + 1)) as f64 <= rest {
        m += 1;
    }
    while m > 0 && (m * m) as f64 > rest {
        m -= 1;
    }
    m
}

/// `Σ_{j=1}^{m} 1/(b + j²)`.
fn half_row_sum(b: f64, m: i64) -> f64 {
    let direct_end = m.min(DIRECT_TERMS);
    let mut sum = 0.0;
    // Smallest terms first.
    for j in (1..=direct_end).rev() {
        sum += 1.0 / (b + (j * j) as f64);
    }
    if m > DIRECT_TERMS {
        sum += euler_maclaurin_tail(b, (DIRECT_TERMS + 1) as f64, m as f64);
    }
    sum
}

/// `Σ_{j=x0}^{x1} 1/(b + j²)` for integers `x0 ≤ x1`, by Euler-Maclaurin with
/// four Bernoulli corrections. With `x0 ≥ 17` the remainder is below `1e-14`
/// relative to the row.
fn euler_maclaurin_tail(b: f64, x0: f64, x1: f64) -> f64 {
    let c = math::sqrt(b);
    // ∫_{x0}^{x1} dx/(b+x²) without cancellation between two arctangents.
    let integral = math::atan(c * (x1 - x0) / (b + x0 * x1)) / c;
    let f = |x: f64| 1.0 / (b + x * x);
    let mut sum = integral + 0.5 * (f(x0) + f(x1));
    for (i, w) in EM_WEIGHTS.iter().enumerate() {
        let order = 2 * i + 1;
        sum += w * (derivative(b, x1, order) - derivative(b, x0, order));
    }
    sum
}

/// `dⁿ/dxⁿ 1/(b + x²)` using `1/(b+x²) = Im(1/(x − i√b))/√b`.
fn derivative(b: f64, x: f64, order: usize) -> f64 {
    let c = math::sqrt(b);
    let z = Complex64::new(x, -c);
    let mut factorial = 1.0;
    for i in 2..=order {
        factorial *= i as f64;
    }
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    let inv = z.powi(-(order as i32 + 1));
    sign * factorial * inv.im / c
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if math::abs(self.sum) >= math::abs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// One cell of the sum-versus-integral comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSumReport {
    pub a: f64,
    pub radius: f64,
    pub sum_value: f64,
    /// `π log(1 + R²/a)`.
    pub integral_value: f64,
    pub discrepancy: f64,
    /// `(1/√a) · min(1, R/√a)`.
    pub bound_rhs_shape: f64,
}

impl LatticeSumReport {
    pub fn evaluate(a: f64, radius: f64) -> Result<Self> {
        let sum_value = lattice_sum(a, radius)?;
        let integral_value = PI * math::ln(1.0 + radius * radius / a);
        let sqrt_a = math::sqrt(a);
        Ok(Self {
            a,
            radius,
            sum_value,
            integral_value,
            discrepancy: math::abs(sum_value - integral_value),
            bound_rhs_shape: (1.0 / sqrt_a) * (radius / sqrt_a).min(1.0),
        })
    }

    pub fn ratio(&self) -> f64 {
        self.discrepancy / self.bound_rhs_shape
    }
}

/// Evaluates every `(a, R)` cell and returns the reports with the empirical
/// constant `max discrepancy / shape`.
pub fn check_log_bound(grid: &[(f64, f64)]) -> Result<(Vec<LatticeSumReport>, f64)> {
    let reports = grid
        .iter()
        .map(|&(a, r)| LatticeSumReport::evaluate(a, r))
        .collect::<Result<Vec<_>>>()?;
    let constant = reports.iter().map(LatticeSumReport::ratio).fold(0.0, f64::max);
    Ok((reports, constant))
}

/// Which linearisation the Wick structure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Flavor {
    /// Mass `C_ε − 1` with `C_ε = 3D_ε²` (strong noise).
    StrongNoise,
    /// Mass `1` (weak noise, critical scaling).
    WeakNoise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RenormState {
    pub epsilon: f64,
    pub sigma: f64,
    pub flavor: Flavor,
    /// `C_ε`; only present for [`Flavor::StrongNoise`].
    pub c_eps: Option<f64>,
    /// Wick variance `D_ε²`.
    pub d_eps_sq: f64,
    /// `Λ` in `A = Δ − Λ`.
    pub mass: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(
            "epsilon",
            alloc::format!("must lie in (0, 1), got {epsilon}"),
        ));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(
            "sigma",
            alloc::format!("must be finite and ≥ 0, got {sigma}"),
        ));
    }
    Ok(())
}

impl RenormState {
    /// Strong-noise state: solves for `C_ε`.
    pub fn strong_noise(epsilon: f64, sigma: f64) -> Result<Self> {
        solve_renorm_constant(epsilon, sigma)
    }

    /// Weak-noise state with `Λ = 1`.
    pub fn weak_noise(epsilon: f64, sigma: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_sigma(sigma)?;
        Ok(Self {
            epsilon,
            sigma,
            flavor: Flavor::WeakNoise,
            c_eps: None,
            d_eps_sq: free_field_variance(epsilon, sigma, Flavor::WeakNoise, None)?,
            mass: 1.0,
        })
    }

    /// Cutoff radius `1/ε` of the noise.
    pub fn radius(&self) -> f64 {
        1.0 / self.epsilon
    }

    /// `|C − (3σ²/8π²) S(C − 1, 1/ε)| / C` for Section-3 states.
    pub fn relative_residual(&self) -> Option<f64> {
        self.c_eps.map(|c| {
            let rhs = fixed_point_rhs(c, self.epsilon, self.sigma);
            math::abs(c - rhs) / c
        })
    }

    /// `C_ε − (3σ²/8π) log(1 + 1/(ε²(C_ε − 1)))`, the bounded remainder left
    /// after replacing the lattice sum by its integral.
    pub fn log_remainder(&self) -> Option<f64> {
        self.c_eps.map(|c| {
            let log_term = math::ln(1.0 + 1.0 / (self.epsilon * self.epsilon * (c - 1.0)));
            c - 3.0 * self.sigma * self.sigma / (8.0 * PI) * log_term
        })
    }
}

fn fixed_point_rhs(c: f64, epsilon: f64, sigma: f64) -> f64 {
    3.0 * sigma * sigma / (8.0 * PI * PI) * lattice_sum_unchecked(c - 1.0, 1.0 / epsilon)
}

/// Unique root `C > 1` of `C = (3σ²/8π²) Σ_{|k|≤1/ε} 1/(C − 1 + |k|²)` by
/// bisection. The right-hand side decreases from `+∞` to `0` as `C` grows
/// from `1`, so the root is bracketed by
/// `1 + κ/(2 + 2κ)` (with `κ = 3σ²/8π²`) and `max(2, κ S(1, 1/ε) + 1)`.
pub fn solve_renorm_constant(epsilon: f64, sigma: f64) -> Result<RenormState> {
    check_epsilon(epsilon)?;
    check_sigma(sigma)?;
    let kappa = 3.0 * sigma * sigma / (8.0 * PI * PI);
    if kappa == 0.0 {
        return Err(Error::NoBracket("σ = 0 leaves no root above 1".into()));
    }
    let radius = 1.0 / epsilon;
    let g = |c: f64| c - fixed_point_rhs(c, epsilon, sigma);

    let mut lo = 1.0 + kappa / (2.0 + 2.0 * kappa);
    let mut hi = (kappa * lattice_sum_unchecked(1.0, radius) + 1.0).max(2.0);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::NoBracket(alloc::format!(
            "g({lo}) = {}, g({hi}) = {}",
            g(lo),
            g(hi)
        )));
    }
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let value = g(mid);
        if !value.is_finite() {
            return Err(Error::NoBracket(alloc::format!("non-finite residual at C = {mid}")));
        }
        if math::abs(value) < best.1 {
            best = (mid, math::abs(value));
        }
        if math::abs(value) < RESIDUAL_TOLERANCE * mid {
            break;
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let (c, residual) = best;
    if residual >= RESIDUAL_TOLERANCE * c {
        return Err(Error::NoBracket(alloc::format!(
            "bisection stalled at C = {c} with residual {residual:e}"
        )));
    }
    Ok(RenormState {
        epsilon,
        sigma,
        flavor: Flavor::StrongNoise,
        c_eps: Some(c),
        d_eps_sq: c / 3.0,
        mass: c - 1.0,
    })
}

/// Pointwise variance `D_ε²` of the free field. Section 3 needs the solved
/// `C_ε` and returns `C_ε/3`; Section 4 evaluates `(σ²/8π²) S(1, 1/ε)`.
pub fn free_field_variance(epsilon: f64, sigma: f64, flavor: Flavor, c_eps: Option<f64>) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(0.0);
    }
    match flavor {
        Flavor::StrongNoise => c_eps
            .map(|c| c / 3.0)
            .ok_or_else(|| Error::invalid("c_eps", "Section-3 variance needs the solved C_ε")),
        Flavor::WeakNoise => Ok(sigma * sigma / (8.0 * PI * PI) * lattice_sum(1.0, 1.0 / epsilon)?),
    }
}

/// `(3/4π) σ² log(1/ε)`, the leading-order growth of `C_ε`.
pub fn asymptotic_c_eps(epsilon: f64, sigma: f64) -> f64 {
    3.0 / (4.0 * PI) * sigma * sigma * math::ln(1.0 / epsilon)
}

/// Hermite-renormalised powers `:u:`, `:u²: = u² − D²`, `:u³: = u³ − 3D²u`.
#[inline]
pub fn wick_scalar(x: f64, n: u32, d_sq: f64) -> f64 {
    match n {
        1 => x,
        2 => x * x - d_sq,
        3 => x * x * x - 3.0 * d_sq * x,
        _ => f64::NAN,
    }
}

/// `:fⁿ:` evaluated in physical space and projected back onto the lattice.
pub fn wick_power(f: &SpectralField, n: u32, d_sq: f64, tf: &mut Transform2d) -> Result<SpectralField> {
    if !(1..=3).contains(&n) {
        return Err(Error::invalid(
            "n",
            alloc::format!("Wick powers are defined for n ∈ {{1,2,3}}, got {n}"),
        ));
    }
    if !(d_sq >= 0.0) || !d_sq.is_finite() {
        return Err(Error::invalid(
            "d_sq",
            alloc::format!("must be finite and ≥ 0, got {d_sq}"),
        ));
    }
    if n == 1 {
        return Ok(f.clone());
    }
    f.map_pointwise(tf, |x| wick_scalar(x, n, d_sq))
}
