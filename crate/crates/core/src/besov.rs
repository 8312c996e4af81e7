//! Littlewood-Paley decomposition and periodic Besov norms
//!
//! ```text
//! ‖u‖_{B^s_{p,r}} = ( Σ_q 2^{qrs} ‖Δ_q u‖_{Lᵖ}^r )^{1/r}
//! ```
//!
//! with `Δ_0` the projection on `k = 0` and `Δ_q` (`q ≥ 1`) the projection on
//! the dyadic annulus `2^{q−1} ≤ |k| < 2^q` (Euclidean `|k|`). `Lᵖ` norms use
//! the collocation quadrature on the lattice grid, which is exact for
//! `p ∈ {2, 4}` when `N > p·K_max`.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::Transform2d;
use crate::math;
use crate::spectral::{Lattice, SpectralField};
use crate::{Complex64, Error, Result};

/// Exponents `(p, r, s)` of `B^s_{p,r}` and the derived `s̄ = 2s + 2/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BesovParams {
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub s_bar: f64,
}

impl BesovParams {
    pub fn new(p: f64, r: f64, s: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("r", r), ("s", s)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, alloc::format!("must be finite, got {v}")));
            }
        }
        if p < 1.0 {
            return Err(Error::invalid("p", alloc::format!("must be ≥ 1, got {p}")));
        }
        if r < 1.0 {
            return Err(Error::invalid("r", alloc::format!("must be ≥ 1, got {r}")));
        }
        Ok(Self {
            p,
            r,
            s,
            s_bar: 2.0 * s + 2.0 / p,
        })
    }

    /// Exponents in the range the convergence theory works with:
    /// `p ≥ 4`, `r ≥ 1`, `−2/(7p) < s < 0`.
    pub fn admissible(p: f64, r: f64, s: f64) -> Result<Self> {
        let params = Self::new(p, r, s)?;
        if !params.is_admissible() {
            return Err(Error::invalid(
                "besov",
                alloc::format!("(p, r, s) = ({p}, {r}, {s}) violates p ≥ 4, −2/(7p) < s < 0"),
            ));
        }
        Ok(params)
    }

    pub fn is_admissible(&self) -> bool {
        self.p >= 4.0 && self.r >= 1.0 && -2.0 / (7.0 * self.p) < self.s && self.s < 0.0
    }

    /// The same `(p, r)` with smoothness `s̄` (the space `B^{s̄}_{p,r}`).
    pub fn at_s_bar(&self) -> Self {
        Self {
            p: self.p,
            r: self.r,
            s: self.s_bar,
            s_bar: 2.0 * self.s_bar + 2.0 / self.p,
        }
    }

    /// Same `(p, r)`, different smoothness.
    pub fn with_smoothness(&self, s: f64) -> Result<Self> {
        Self::new(self.p, self.r, s)
    }
}

/// Littlewood-Paley block containing `k`.
#[inline]
pub fn block_index(k1: i64, k2: i64) -> usize {
    let norm_sq = (k1 * k1 + k2 * k2) as u64;
    if norm_sq == 0 {
        0
    } else {
        // 4^{q−1} ≤ |k|² < 4^q
        (63 - norm_sq.leading_zeros() as usize) / 2 + 1
    }
}

/// Largest block index that intersects the lattice.
pub fn max_block(lattice: Lattice) -> usize {
    let k = lattice.k_max() as i64;
    block_index(k, k)
}

/// `Δ_q f`.
pub fn lp_block(f: &SpectralField, q: usize) -> SpectralField {
    let lattice = f.lattice();
    SpectralField::from_coeff_fn(lattice, |k1, k2| {
        if block_index(k1, k2) == q {
            f.coeff(k1, k2)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `(∫|f|ᵖ)^{1/p}` by collocation quadrature.
pub fn lp_norm(f: &SpectralField, p: f64, tf: &mut Transform2d) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid("p", alloc::format!("must be finite and ≥ 1, got {p}")));
    }
    let grid = f.to_physical(tf)?;
    Ok(lp_of_grid(&grid, p))
}

fn lp_of_grid(grid: &crate::spectral::PhysicalField, p: f64) -> f64 {
    let integral = if p == 2.0 {
        grid.integrate(|v| v * v)
    } else if p == 4.0 {
        grid.integrate(|v| {
            let v2 = v * v;
            v2 * v2
        })
    } else {
        grid.integrate(|v| math::pow(math::abs(v), p))
    };
    math::pow(integral, 1.0 / p)
}

/// Largest `|k_i|` in block `q`.
fn block_extent(q: usize) -> usize {
    if q == 0 {
        0
    } else {
        (1usize << q) - 1
    }
}

/// `‖Δ_q f‖_{Lᵖ}` for `q = 0..=max_block`.
///
/// For `p ∈ {2, 4}` each block is evaluated on the smallest grid on which the
/// quadrature of `|Δ_q f|ᵖ` is still exact, which makes the low blocks cheap.
pub fn block_lp_norms(f: &SpectralField, p: f64, tf: &mut Transform2d) -> Result<Vec<f64>> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid("p", alloc::format!("must be finite and ≥ 1, got {p}")));
    }
    // Hermitian symmetry is checked once; each block inherits it.
    f.to_physical(tf)?;
    let lattice = f.lattice();
    let exact = p == 2.0 || p == 4.0;
    let blocks = max_block(lattice);
    let mut norms = Vec::with_capacity(blocks + 1);
    for q in 0..=blocks {
        let reduced = Lattice::alias_free(block_extent(q).min(lattice.k_max()));
        let target = if exact && reduced.grid_size() < lattice.grid_size() {
            reduced
        } else {
            lattice
        };
        let block = SpectralField::from_coeff_fn(target, |k1, k2| {
            if block_index(k1, k2) == q {
                f.coeff(k1, k2)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        if block.max_abs_coeff() == 0.0 {
            norms.push(0.0);
            continue;
        }
        let grid = block.to_physical_unchecked(tf.sized(target.grid_size()));
        norms.push(lp_of_grid(&grid, p));
    }
    Ok(norms)
}

/// Combines block norms into `(Σ 2^{qrs} n_q^r)^{1/r}`.
pub fn besov_from_blocks(block_norms: &[f64], r: f64, s: f64) -> f64 {
    let sum: f64 = block_norms
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 0.0)
        .map(|(q, n)| math::pow(2.0, q as f64 * r * s) * math::pow(*n, r))
        .sum();
    math::pow(sum, 1.0 / r)
}

pub fn besov_norm(f: &SpectralField, params: &BesovParams, tf: &mut Transform2d) -> Result<f64> {
    let norms = block_lp_norms(f, params.p, tf)?;
    Ok(besov_from_blocks(&norms, params.r, params.s))
}

/// `B^s` and `B^{s̄}` norms from one set of block evaluations.
pub fn besov_norm_pair(f: &SpectralField, params: &BesovParams, tf: &mut Transform2d) -> Result<(f64, f64)> {
    let norms = block_lp_norms(f, params.p, tf)?;
    Ok((
        besov_from_blocks(&norms, params.r, params.s),
        besov_from_blocks(&norms, params.r, params.s_bar),
    ))
}

/// Trajectory statistics in the spirit of the `C([δ,T]; B^s) ∩ Lᵖ(0,T; B^{s̄})` norm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryNorm {
    /// Max of the `B^s` norm over the sampled times in `[δ, T]`.
    pub sup_besov: f64,
    /// `(∫_0^T ‖u‖_{B^{s̄}}ᵖ dt)^{1/p}` by the trapezoidal rule on the samples.
    pub lp_time_besov: f64,
    pub sample_times: Vec<f64>,
}

impl TrajectoryNorm {
    /// `times` must be increasing; `besov` and `besov_bar` are the `B^s` and
    /// `B^{s̄}` norms at those times.
    pub fn from_samples(times: &[f64], besov: &[f64], besov_bar: &[f64], delta: f64, p: f64) -> Self {
        assert_eq!(times.len(), besov.len());
        assert_eq!(times.len(), besov_bar.len());
        let sup_besov = times
            .iter()
            .zip(besov)
            .filter(|(t, _)| **t >= delta - 1e-12)
            .fold(0.0f64, |m, (_, b)| m.max(*b));
        let mut integral = 0.0;
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            integral += 0.5 * dt * (math::pow(besov_bar[i - 1], p) + math::pow(besov_bar[i], p));
        }
        Self {
            sup_besov,
            lp_time_besov: math::pow(integral, 1.0 / p),
            sample_times: times.to_vec(),
        }
    }
}

/// Settings for [`check_smoothing_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingCheck {
    pub trials: usize,
    pub k_max: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub seed: u64,
    /// Largest tolerated log-log growth rate of the ratio as `t → 0`.
    pub max_slope: f64,
}

impl SmoothingCheck {
    pub fn new(trials: usize) -> Self {
        Self {
            trials,
            k_max: 16,
            t_min: 1e-4,
            t_max: 1.0,
            t_points: 17,
            seed: 0x5eed,
            max_slope: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub times: Vec<f64>,
    /// Sup over the trial fields of the normalised ratio at each time.
    pub sup_ratio: Vec<f64>,
    pub overall_sup: f64,
    /// Slope of `log ratio` against `log(1/t)` over the smaller-`t` half of the grid.
    pub small_time_slope: f64,
    pub passed: bool,
}

fn check_smoothing_pair(rough: &BesovParams, smooth: &BesovParams) -> Result<()> {
    if rough.s >= smooth.s {
        return Err(Error::invalid(
            "s_bar",
            alloc::format!("need s̄ < s, got s̄ = {} and s = {}", rough.s, smooth.s),
        ));
    }
    if rough.p != smooth.p || rough.r != smooth.r {
        return Err(Error::invalid("besov", "both parameter sets must share p and r"));
    }
    Ok(())
}

/// `sup_x ‖e^{tΔ}x‖_{B^s} · t^{(s−s̄)/2} / ‖x‖_{B^{s̄}}` over the given fields,
/// for each `t`.
pub fn smoothing_ratio_profile(
    fields: &[SpectralField],
    rough: &BesovParams,
    smooth: &BesovParams,
    times: &[f64],
    tf: &mut Transform2d,
) -> Result<Vec<f64>> {
    check_smoothing_pair(rough, smooth)?;
    let mut sup = alloc::vec![0.0f64; times.len()];
    let exponent = (smooth.s - rough.s) / 2.0;
    for x in fields {
        let denom = besov_norm(x, rough, tf)?;
        if denom == 0.0 {
            continue;
        }
        for (j, &t) in times.iter().enumerate() {
            let heated = x.semigroup_apply(t, 0.0)?;
            let ratio = besov_norm(&heated, smooth, tf)? * math::pow(t, exponent) / denom;
            sup[j] = sup[j].max(ratio);
        }
    }
    Ok(sup)
}

/// Numerical check of `‖e^{tΔ}x‖_{B^s} ≲ t^{(s̄−s)/2} ‖x‖_{B^{s̄}}` on random
/// Gaussian fields. `rough` carries `s̄`, `smooth` carries `s > s̄`.
pub fn check_smoothing_estimate(
    rough: &BesovParams,
    smooth: &BesovParams,
    settings: &SmoothingCheck,
) -> Result<SmoothingReport> {
    check_smoothing_pair(rough, smooth)?;
    if settings.t_points < 4 || !(settings.t_min > 0.0) || settings.t_max <= settings.t_min {
        return Err(Error::invalid("times", "need ≥ 4 points on 0 < t_min < t_max"));
    }
    let lattice = Lattice::alias_free(settings.k_max);
    let mut tf = Transform2d::new(lattice.grid_size());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let fields: Vec<SpectralField> = (0..settings.trials)
        .map(|_| {
            let mut f = SpectralField::from_coeff_fn(lattice, |_, _| {
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            f.symmetrize();
            f
        })
        .collect();
    let (lo, hi) = (math::ln(settings.t_min), math::ln(settings.t_max));
    let times: Vec<f64> = (0..settings.t_points)
        .map(|i| math::exp(lo + (hi - lo) * i as f64 / (settings.t_points - 1) as f64))
        .collect();
    let sup_ratio = smoothing_ratio_profile(&fields, rough, smooth, &times, &mut tf)?;
    let half = settings.t_points / 2 + 1;
    let xs: Vec<f64> = times[..half].iter().map(|t| -math::ln(*t)).collect();
    let ys: Vec<f64> = sup_ratio[..half].iter().map(|r| math::ln(r.max(1e-300))).collect();
    let slope = crate::stats::least_squares_slope(&xs, &ys);
    let overall_sup = sup_ratio.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(SmoothingReport {
        passed: slope <= settings.max_slope && overall_sup.is_finite(),
        times,
        sup_ratio,
        overall_sup,
        small_time_slope: slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn basis_vector(lattice: Lattice, k1: i64, k2: i64) -> SpectralField {
        // The real combination e_k + e_{−k} = cos(k·x)/π.
        SpectralField::from_basis_fn(lattice, |a, b| {
            if (a, b) == (k1, k2) || (a, b) == (-k1, -k2) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn block_membership() {
        assert_eq!(block_index(0, 0), 0);
        assert_eq!(block_index(1, 0), 1);
        assert_eq!(block_index(1, 1), 1);
        assert_eq!(block_index(2, 0), 2);
        assert_eq!(block_index(3, 0), 2);
        assert_eq!(block_index(0, -4), 3);
        assert_eq!(block_index(2, 2), 2); // |k| = 2.83
        assert_eq!(block_index(3, 3), 3); // |k| = 4.24
        assert_eq!(block_index(8, 8), 4); // |k| = 11.3
    }

    #[test]
    fn block_projection_examples() {
        let lat = Lattice::alias_free(4);
        let f = basis_vector(lat, 3, 0);
        assert_eq!(lp_block(&f, 2), f);
        assert!(lp_block(&f, 3).max_abs_coeff() == 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let lat = Lattice::alias_free(3);
        let mut tf = Transform2d::new(lat.grid_size());
        let c = -0.7;
        let constant = SpectralField::constant(lat, c);
        for p in [1.0, 2.0, 3.5, 4.0] {
            let expected = c.abs() * (4.0 * PI * PI).powf(1.0 / p);
            assert!((lp_norm(&constant, p, &mut tf).unwrap() - expected).abs() < 1e-12);
        }
        let mut cosine = SpectralField::zeros(lat);
        cosine.set_coeff(1, 0, Complex64::new(0.5, 0.0));
        cosine.set_coeff(-1, 0, Complex64::new(0.5, 0.0));
        let l2 = lp_norm(&cosine, 2.0, &mut tf).unwrap();
        assert!((l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        // ∫cos⁴ over one period by a fine midpoint rule, times 2π for the other axis.
        let m = 20_000;
        let one_d: f64 = (0..m)
            .map(|i| ((i as f64 + 0.5) * 2.0 * PI / m as f64).cos().powi(4))
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        let l4 = lp_norm(&cosine, 4.0, &mut tf).unwrap();
        assert!((l4 - (2.0 * PI * one_d).powf(0.25)).abs() < 1e-10);
        assert!((l4 - (4.0 * PI * PI * 3.0 / 8.0).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn besov_norm_single_blocks() {
        let lat = Lattice::alias_free(5);
        let mut tf = Transform2d::new(lat.grid_size());
        let params = BesovParams::new(4.0, 2.0, -0.3).unwrap();
        let c = 2.5;
        let f = SpectralField::from_basis_fn(lat, |k1, k2| {
            if (k1, k2) == (0, 0) {
                Complex64::new(c, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let expected = c / (2.0 * PI) * (4.0 * PI * PI).powf(0.25);
        assert!((besov_norm(&f, &params, &mut tf).unwrap() - expected).abs() < 1e-12);

        // e_k + e_{−k} with |k| = 3 sits in block q = 2.
        let g = basis_vector(lat, 3, 0);
        let cos_norm = lp_norm(&g, 4.0, &mut tf).unwrap();
        let expected = 2f64.powf(2.0 * params.s) * cos_norm;
        assert!((besov_norm(&g, &params, &mut tf).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn parseval_for_b022() {
        let lat = Lattice::alias_free(6);
        let mut tf = Transform2d::new(lat.grid_size());
        let f = crate::spectral::tests::random_field(lat, 21);
        let params = BesovParams::new(2.0, 2.0, 0.0).unwrap();
        let b = besov_norm(&f, &params, &mut tf).unwrap();
        let l2 = lp_norm(&f, 2.0, &mut tf).unwrap();
        assert!((b - l2).abs() < 1e-10 * l2);
        assert!((l2 - f.l2_norm()).abs() < 1e-10 * l2);
    }

    #[test]
    fn parameter_validation() {
        assert!(BesovParams::new(f64::NAN, 2.0, 0.0).is_err());
        assert!(BesovParams::new(4.0, f64::INFINITY, 0.0).is_err());
        assert!(BesovParams::new(0.5, 2.0, 0.0).is_err());
        let ok = BesovParams::admissible(4.0, 2.0, -1.0 / 16.0).unwrap();
        assert_eq!(ok.s_bar, 2.0 * (-1.0 / 16.0) + 0.5);
        assert!(BesovParams::admissible(4.0, 2.0, -0.1).is_err()); // below −1/14
        assert!(BesovParams::admissible(2.0, 2.0, -0.01).is_err());
        assert!(BesovParams::admissible(4.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn smoothing_rejects_degenerate_pair() {
        let a = BesovParams::new(4.0, 2.0, -0.05).unwrap();
        assert!(check_smoothing_estimate(&a, &a, &SmoothingCheck::new(2)).is_err());
    }

    #[test]
    fn smoothing_ratio_vanishes_for_constants() {
        let lat = Lattice::alias_free(4);
        let mut tf = Transform2d::new(lat.grid_size());
        let rough = BesovParams::new(4.0, 2.0, -0.55).unwrap();
        let smooth = BesovParams::new(4.0, 2.0, -0.05).unwrap();
        let times = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        let sup =
            smoothing_ratio_profile(&[SpectralField::constant(lat, 1.0)], &rough, &smooth, &times, &mut tf).unwrap();
        for (t, r) in times.iter().zip(&sup) {
            assert!((r - t.powf(0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn trajectory_norm_statistics() {
        let times = [0.0, 0.5, 1.0];
        let tn = TrajectoryNorm::from_samples(&times, &[9.0, 2.0, 3.0], &[1.0, 1.0, 1.0], 0.5, 4.0);
        assert_eq!(tn.sup_besov, 3.0);
        assert!((tn.lp_time_besov - 1.0).abs() < 1e-15);
    }
}
