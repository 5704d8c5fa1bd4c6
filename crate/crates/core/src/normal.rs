//! Standard normal density and distribution function, and the mean of a
//! folded normal variable.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Φ(x) = erfc(-x/√2) / 2`; keeps full relative accuracy in the lower tail.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `E|Y - s|` for `Y ~ N(mean, sd^2)`.
///
/// Equals `(s - μ)(2Φ((s - μ)/σ) - 1) + 2σ φ((s - μ)/σ)`; `2Φ(z) - 1` is
/// evaluated as `erf(z/√2)` to avoid cancellation near the mean. A zero
/// standard deviation gives `|s - μ|`.
pub fn folded_mean(mean: f64, sd: f64, s: f64) -> f64 {
    let d = s - mean;
    if sd == 0.0 {
        return d.abs();
    }
    let z = d / sd;
    d * libm::erf(z * FRAC_1_SQRT_2) + 2.0 * sd * pdf(z)
}
