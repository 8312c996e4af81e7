//! Square two-dimensional complex DFTs of side `N`.
//!
//! Conventions: [`Transform2d::forward`] computes `F(k) = Σ_x f(x) e^{−2πi k·x/N}`
//! and [`Transform2d::inverse`] computes `f(x) = Σ_k F(k) e^{+2πi k·x/N}`; neither
//! is normalised. Data are row-major, index `i1·N + i2`.
//!
//! A `Transform2d` owns its scratch buffers. Create one per worker.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[cfg(feature = "std")]
use alloc::sync::Arc;

pub struct Transform2d {
    n: usize,
    others: Vec<Transform2d>,
    transposed: Vec<Complex64>,
    #[cfg(feature = "std")]
    forward: Arc<dyn rustfft::Fft<f64>>,
    #[cfg(feature = "std")]
    inverse: Arc<dyn rustfft::Fft<f64>>,
    #[cfg(feature = "std")]
    scratch: Vec<Complex64>,
    #[cfg(not(feature = "std"))]
    twiddles: Vec<Complex64>,
    #[cfg(not(feature = "std"))]
    row: Vec<Complex64>,
}

impl core::fmt::Debug for Transform2d {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Transform2d").field("n", &self.n).finish()
    }
}

impl Transform2d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform size must be positive");
        #[cfg(feature = "std")]
        {
            let mut planner = rustfft::FftPlanner::new();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
            Self {
                n,
                others: Vec::new(),
                transposed: vec![Complex64::new(0.0, 0.0); n * n],
                forward,
                inverse,
                scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            }
        }
        #[cfg(not(feature = "std"))]
        {
            let twiddles = (0..n)
                .map(|j| {
                    let theta = -2.0 * core::f64::consts::PI * j as f64 / n as f64;
                    Complex64::new(libm::cos(theta), libm::sin(theta))
                })
                .collect();
            Self {
                n,
                others: Vec::new(),
                transposed: vec![Complex64::new(0.0, 0.0); n * n],
                twiddles,
                row: vec![Complex64::new(0.0, 0.0); n],
            }
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// A transform of side `n`: `self` if the size matches, otherwise one
    /// created on first use and kept for later calls.
    pub fn sized(&mut self, n: usize) -> &mut Transform2d {
        if n == self.n {
            return self;
        }
        let i = match self.others.iter().position(|t| t.n == n) {
            Some(i) => i,
            None => {
                self.others.push(Transform2d::new(n));
                self.others.len() - 1
            }
        };
        &mut self.others[i]
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.apply(data, Direction::Forward, None);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.apply(data, Direction::Inverse, None);
    }

    /// Forward transform in which only outputs with `|k₁|, |k₂| ≤ band`
    /// (indices taken mod `N`) are computed; the rest of `data` is left with
    /// unspecified values.
    pub fn forward_band(&mut self, data: &mut [Complex64], band: usize) {
        self.apply(data, Direction::Forward, Some(band));
    }

    /// Inverse transform of data that vanish outside `|k₁|, |k₂| ≤ band`.
    pub fn inverse_band(&mut self, data: &mut [Complex64], band: usize) {
        self.apply(data, Direction::Inverse, Some(band));
    }

    // The first pass runs along the second index, the second pass along the
    // first. For a band-limited input only the rows with `k₁` in the band
    // are non-zero; for a band-limited output only the rows with `k₂` in
    // the band are needed after the first pass.
    fn apply(&mut self, data: &mut [Complex64], dir: Direction, band: Option<usize>) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match transform size");
        let band = band.filter(|k| 2 * k + 1 < n);
        match (dir, band) {
            (Direction::Inverse, Some(k)) => self.band_rows(data, dir, k),
            _ => self.rows(data, dir),
        }
        transpose(data, &mut self.transposed, n);
        let mut cols = core::mem::take(&mut self.transposed);
        match (dir, band) {
            (Direction::Forward, Some(k)) => self.band_rows(&mut cols, dir, k),
            _ => self.rows(&mut cols, dir),
        }
        transpose(&cols, data, n);
        self.transposed = cols;
    }

    fn band_rows(&mut self, data: &mut [Complex64], dir: Direction, band: usize) {
        let n = self.n;
        let (low, rest) = data.split_at_mut((band + 1) * n);
        self.rows(low, dir);
        let skip = rest.len() - band * n;
        self.rows(&mut rest[skip..], dir);
    }

    #[cfg(feature = "std")]
    fn rows(&mut self, data: &mut [Complex64], dir: Direction) {
        if data.is_empty() {
            return;
        }
        let plan = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        plan.process_with_scratch(data, &mut self.scratch);
    }

    #[cfg(not(feature = "std"))]
    fn rows(&mut self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        for chunk in data.chunks_exact_mut(n) {
            for (k, out) in self.row.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, x) in chunk.iter().enumerate() {
                    let w = self.twiddles[(j * k) % n];
                    let w = match dir {
                        Direction::Forward => w,
                        Direction::Inverse => w.conj(),
                    };
                    acc += x * w;
                }
                *out = acc;
            }
            chunk.copy_from_slice(&self.row);
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const TILE: usize = 32;
    for i0 in (0..n).step_by(TILE) {
        for j0 in (0..n).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                for j in j0..(j0 + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Smallest even `m ≥ n` whose only prime factors are 2, 3 and 5.
pub fn fast_even_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m.is_multiple_of(2) {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}
