//! Small Monte-Carlo helpers.

use alloc::vec::Vec;

use crate::math;

/// Mean, standard error of the mean and empirical 90th percentile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub p90: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                stderr: f64::NAN,
                p90: f64::NAN,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            math::sqrt(var / n as f64)
        } else {
            f64::NAN
        };
        Self {
            n,
            mean,
            stderr,
            p90: quantile(samples, 0.9),
        }
    }
}

/// Nearest-rank quantile.
pub fn quantile(samples: &[f64], level: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = libm::ceil(level * sorted.len() as f64) as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Outcome of a monotone-trend check on a sequence of Monte-Carlo means.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendCheck {
    /// `mean[i+1] − mean[i] − tolerance·√(se[i]² + se[i+1]²)` per consecutive pair;
    /// non-positive means the pair passes.
    pub excess: Vec<f64>,
    pub non_increasing: bool,
    /// `mean[last] / mean[first]`.
    pub final_over_initial: f64,
}

/// Checks `mean[i+1] ≤ mean[i] + tolerance · √(se[i]² + se[i+1]²)`.
pub fn check_non_increasing(summaries: &[Summary], tolerance: f64) -> TrendCheck {
    let excess: Vec<f64> = summaries
        .windows(2)
        .map(|w| {
            let pooled = math::sqrt(w[0].stderr * w[0].stderr + w[1].stderr * w[1].stderr);
            w[1].mean - w[0].mean - tolerance * pooled
        })
        .collect();
    let non_increasing = excess.iter().all(|e| *e <= 0.0);
    let final_over_initial = match (summaries.first(), summaries.last()) {
        (Some(a), Some(b)) => b.mean / a.mean,
        _ => f64::NAN,
    };
    TrendCheck {
        excess,
        non_increasing,
        final_over_initial,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        // sample variance 5/3
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.p90, 4.0);
        assert_eq!(quantile(&[5.0, 1.0, 3.0], 0.5), 3.0);
    }

    #[test]
    fn trend_tolerates_noise_within_pooled_error() {
        let a = Summary {
            n: 10,
            mean: 1.0,
            stderr: 0.1,
            p90: 0.0,
        };
        let b = Summary {
            n: 10,
            mean: 1.2,
            stderr: 0.1,
            p90: 0.0,
        };
        assert!(check_non_increasing(&[a, b], 2.0).non_increasing);
        let c = Summary {
            n: 10,
            mean: 1.4,
            stderr: 0.1,
            p90: 0.0,
        };
        assert!(!check_non_increasing(&[a, c], 2.0).non_increasing);
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.5).abs() < 1e-14);
    }
}
