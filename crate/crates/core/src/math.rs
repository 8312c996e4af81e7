//! `libm` wrappers so that the same code path (and the same bits) is used with
//! and without `std`.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

/// `(e^z − 1)/z`, continuous at zero.
#[inline]
pub fn phi1(z: f64) -> f64 {
    if abs(z) < 1e-8 {
        1.0 + 0.5 * z
    } else {
        expm1(z) / z
    }
}

/// `(e^z − 1 − z)/z²`, continuous at zero.
#[inline]
pub fn phi2(z: f64) -> f64 {
    if abs(z) < 1e-2 {
        // Taylor series; the truncation error is below 1e-16 on this range.
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 3..10 {
            term *= z / n as f64;
            sum += term;
        }
        sum
    } else {
        (expm1(z) - z) / (z * z)
    }
}

/// `∫_0^h e^{−rate·s} ds = (1 − e^{−rate·h})/rate`, continuous at `rate = 0`.
#[inline]
pub fn decay_integral(rate: f64, h: f64) -> f64 {
    let x = rate * h;
    if abs(x) < 1e-12 {
        h * (1.0 - 0.5 * x)
    } else {
        -expm1(-x) / rate
    }
}
