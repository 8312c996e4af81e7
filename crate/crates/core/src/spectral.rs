//! Band-limited real scalar fields on the torus `T² = [0, 2π)²`.
//!
//! # Normalisation
//!
//! A [`SpectralField`] stores plain Fourier coefficients `c_k` of
//! `f(x) = Σ_k c_k e^{ik·x}` on the square lattice `|k₁|, |k₂| ≤ K_max`.
//! The orthonormal basis of `L²(T²)` is `e_k(x) = e^{ik·x}/(2π)`, so the
//! coordinates of `f` in that basis are `(e_k, f) = 2π·c_k`
//! ([`BASIS_SCALE`]). Every conversion between the two conventions goes
//! through [`SpectralField::basis_coeff`] / [`SpectralField::from_basis_fn`];
//! norms are computed from physical-space values or from Parseval
//! `‖f‖²_{L²} = 4π² Σ|c_k|²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::fft::{fast_even_size, Transform2d};
use crate::math;
use crate::{Error, Result};

/// `(e_k, f) = BASIS_SCALE · c_k`.
pub const BASIS_SCALE: f64 = 2.0 * PI;

/// Tolerance on `|c_{−k} − conj(c_k)|` (relative to `max(1, max|c|)`).
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Square Fourier lattice `|k_i| ≤ k_max` together with its collocation grid
/// of `n × n` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lattice {
    k_max: usize,
    n: usize,
}

impl Lattice {
    /// Requires `n ≥ 2·k_max + 2` so that every retained mode is resolved
    /// without aliasing by the grid.
    pub fn new(k_max: usize, n: usize) -> Result<Self> {
        if n < 2 * k_max + 2 {
            return Err(Error::invalid(
                "grid_size",
                alloc::format!("N={n} must be at least 2·K_max+2={}", 2 * k_max + 2),
            ));
        }
        Ok(Self { k_max, n })
    }

    /// Lattice whose grid is large enough for cubic products to be computed
    /// without aliasing: the smallest even 5-smooth `N ≥ 4·k_max + 2`.
    pub fn alias_free(k_max: usize) -> Self {
        Self {
            k_max,
            n: fast_even_size(4 * k_max + 2),
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    /// Number of retained modes per dimension, `2·k_max + 1`.
    pub fn side(&self) -> usize {
        2 * self.k_max + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Products of up to three fields are alias-free on retained modes.
    pub fn is_alias_free_cubic(&self) -> bool {
        self.n > 4 * self.k_max
    }

    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        let k = self.k_max as i64;
        k1.abs() <= k && k2.abs() <= k
    }

    /// Storage index of `(k1, k2)`; row-major in `k1`, then `k2`, both running
    /// from `−k_max` to `k_max`.
    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> usize {
        debug_assert!(self.contains(k1, k2));
        let k = self.k_max as i64;
        ((k1 + k) as usize) * self.side() + (k2 + k) as usize
    }

    /// Index of `−k` given the index of `k`.
    #[inline]
    pub fn mirror_index(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    /// Inverse of [`Lattice::index`].
    #[inline]
    pub fn mode(&self, index: usize) -> (i64, i64) {
        let k = self.k_max as i64;
        let side = self.side();
        ((index / side) as i64 - k, (index % side) as i64 - k)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    #[inline]
    fn grid_index(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        (k1.rem_euclid(n) as usize) * self.n + k2.rem_euclid(n) as usize
    }

    pub(crate) fn ensure_same(&self, other: &Lattice) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LatticeMismatch {
                expected_k: self.k_max,
                expected_n: self.n,
                got_k: other.k_max,
                got_n: other.n,
            })
        }
    }
}

/// Values of a real field on the uniform `N × N` grid
/// `x = (2π i₁/N, 2π i₂/N)`, row-major in `i₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    n: usize,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid(
                "values",
                alloc::format!("expected {} values, got {}", n * n, values.len()),
            ));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i1 in 0..n {
            for i2 in 0..n {
                values.push(f(i1 as f64 * h, i2 as f64 * h));
            }
        }
        Self { n, values }
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.n + i2]
    }

    /// Coordinate of grid index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    /// Collocation quadrature `(2π/N)² Σ g(f(x_i))`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        h * h * self.values.iter().map(|&v| g(v)).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }
}

/// Fourier coefficients of a real field, truncated to a square lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    /// The constant field `value`.
    pub fn constant(lattice: Lattice, value: f64) -> Self {
        let mut f = Self::zeros(lattice);
        f.coeffs[lattice.index(0, 0)] = Complex64::new(value, 0.0);
        f
    }

    /// Builds a field from plain coefficients (`f = Σ c_k e^{ik·x}`).
    pub fn from_coeff_fn(lattice: Lattice, mut c: impl FnMut(i64, i64) -> Complex64) -> Self {
        let coeffs = lattice.modes().map(|(k1, k2)| c(k1, k2)).collect();
        Self { lattice, coeffs }
    }

    /// Builds a field from coordinates in the orthonormal basis `e_k`.
    pub fn from_basis_fn(lattice: Lattice, mut c: impl FnMut(i64, i64) -> Complex64) -> Self {
        Self::from_coeff_fn(lattice, |k1, k2| c(k1, k2) / BASIS_SCALE)
    }

    pub fn from_coeffs(lattice: Lattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::invalid(
                "coefficients",
                alloc::format!("expected {} coefficients, got {}", lattice.len(), coeffs.len()),
            ));
        }
        Ok(Self { lattice, coeffs })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Plain coefficient `c_k`; zero outside the lattice.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        if self.lattice.contains(k1, k2) {
            self.coeffs[self.lattice.index(k1, k2)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let i = self.lattice.index(k1, k2);
        self.coeffs[i] = value;
    }

    /// `(e_k, f)`, the coordinate in the orthonormal basis.
    pub fn basis_coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeff(k1, k2) * BASIS_SCALE
    }

    /// Largest `|c_{−k} − conj(c_k)|`, including `|Im c_0|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let mirror = self.coeffs[self.lattice.mirror_index(i)];
            worst = worst.max((mirror - c.conj()).norm());
        }
        worst
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOLERANCE * self.max_abs_coeff().max(1.0) {
            Err(Error::NotHermitian { defect })
        } else {
            Ok(())
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `‖f‖_{L²(T²)}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        BASIS_SCALE * math::sqrt(self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>())
    }

    /// Spatial mean `(1/4π²)∫f = c_0`.
    pub fn mean(&self) -> f64 {
        self.coeffs[self.lattice.index(0, 0)].re
    }

    /// Collocation values on the `N × N` grid.
    pub fn to_physical(&self, tf: &mut Transform2d) -> Result<PhysicalField> {
        self.check_hermitian()?;
        Ok(self.to_physical_unchecked(tf))
    }

    pub(crate) fn to_physical_unchecked(&self, tf: &mut Transform2d) -> PhysicalField {
        let n = self.lattice.n;
        assert_eq!(tf.size(), n, "transform size does not match the lattice grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, c) in self.coeffs.iter().enumerate() {
            let (k1, k2) = self.lattice.mode(i);
            buf[self.lattice.grid_index(k1, k2)] = *c;
        }
        tf.inverse_band(&mut buf, self.lattice.k_max);
        PhysicalField {
            n,
            values: buf.into_iter().map(|z| z.re).collect(),
        }
    }

    /// Projects grid values onto the lattice; the result is exactly Hermitian.
    pub fn from_physical(grid: &PhysicalField, lattice: Lattice, tf: &mut Transform2d) -> Result<Self> {
        let n = lattice.n;
        if grid.n != n {
            return Err(Error::invalid(
                "grid",
                alloc::format!("grid has N={}, lattice expects N={n}", grid.n),
            ));
        }
        assert_eq!(tf.size(), n, "transform size does not match the lattice grid");
        let mut buf: Vec<Complex64> = grid.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        tf.forward_band(&mut buf, lattice.k_max);
        let scale = 1.0 / (n * n) as f64;
        let mut out = Self::from_coeff_fn(lattice, |k1, k2| buf[lattice.grid_index(k1, k2)] * scale);
        out.symmetrize();
        Ok(out)
    }

    /// Replaces `c_k` by `(c_k + conj(c_{−k}))/2`.
    pub fn symmetrize(&mut self) {
        let lattice = self.lattice;
        for i in 0..self.coeffs.len() {
            let j = lattice.mirror_index(i);
            if j < i {
                continue;
            }
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        let zero = lattice.index(0, 0);
        self.coeffs[zero].im = 0.0;
    }

    /// Applies `g` pointwise in physical space and projects back onto the
    /// lattice (modes outside are discarded). The product is exact on
    /// retained modes whenever `g` is a polynomial of degree `d` and
    /// `N > (d+1)·K_max`.
    pub fn map_pointwise(&self, tf: &mut Transform2d, g: impl Fn(f64) -> f64) -> Result<Self> {
        let mut grid = self.to_physical(tf)?;
        for v in grid.values.iter_mut() {
            *v = g(*v);
        }
        Self::from_physical(&grid, self.lattice, tf)
    }

    /// `u³`, truncated back to the lattice.
    pub fn pointwise_cube(&self, tf: &mut Transform2d) -> Result<Self> {
        self.map_pointwise(tf, |v| v * v * v)
    }

    /// `e^{tA} f` with `A = Δ − mass`: multiplies `c_k` by
    /// `exp(−t(mass + |k|²))`.
    pub fn semigroup_apply(&self, t: f64, mass: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(
                "t",
                alloc::format!("time must be finite and ≥ 0, got {t}"),
            ));
        }
        let lattice = self.lattice;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (k1, k2) = lattice.mode(i);
                c * math::exp(-t * (mass + (k1 * k1 + k2 * k2) as f64))
            })
            .collect();
        Ok(Self { lattice, coeffs })
    }

    /// Copies the modes common to both lattices into a field on `target`.
    pub fn resample(&self, target: Lattice) -> Self {
        Self::from_coeff_fn(target, |k1, k2| self.coeff(k1, k2))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lattice.ensure_same(&other.lattice)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self {
            lattice: self.lattice,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lattice.ensure_same(&other.lattice)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self {
            lattice: self.lattice,
            coeffs,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}
