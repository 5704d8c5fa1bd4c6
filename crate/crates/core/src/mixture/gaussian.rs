//! Folding ratios of Gaussian mixtures.
//!
//! For `X ~ Σ ε_i N(μ_i, σ_i²)`,
//!
//! ```text
//! Var|X - s| = Var X + (E X - s)² - (Σ ε_i h(μ_i, σ_i, s))²
//! ```
//!
//! where `h` is the mean of the folded normal `|N(μ_i, σ_i²) - s|`. The SFR
//! at `s` is `4 Var|X - s| / Var X`. Zero variances reduce to Dirac masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::folded_mean;
use crate::optimize::golden_section;
use crate::sample::Moments;

const PIVOT_TOL: f64 = 1e-10;
const CROSSING_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
    moments: Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSfr {
    pub sfr: f64,
    pub pivot: f64,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || variances.len() != k {
            return Err(Error::InvalidParameter(format!(
                "mixture needs matching non-empty weights/means/variances, got {}/{}/{}",
                k,
                means.len(),
                variances.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight {w} must be positive")));
        }
        if let Some(v) = variances.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("variance {v} must be >= 0")));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mean".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();

        let mean: f64 = weights.iter().zip(&means).map(|(w, m)| w * m).sum();
        let (mut variance, mut third_central, mut third_raw) = (0.0, 0.0, 0.0);
        for ((w, m), v) in weights.iter().zip(&means).zip(&variances) {
            let d = m - mean;
            variance += w * (d * d + v);
            third_central += w * (d * d * d + 3.0 * d * v);
            third_raw += w * (m * m * m + 3.0 * m * v);
        }
        if !(variance > 0.0) {
            return Err(Error::DegenerateSample("mixture has zero variance".into()));
        }
        Ok(GaussianMixture { weights, means, variances, moments: Moments { mean, variance, third_central, third_raw } })
    }

    /// Same weights and means, every component variance set to `variance`.
    pub fn with_common_variance(&self, variance: f64) -> Result<Self> {
        Self::new(self.weights.clone(), self.means.clone(), vec![variance; self.weights.len()])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    /// `W = Σ ε_i σ_i²`
    pub fn within_variance(&self) -> f64 {
        self.weights.iter().zip(&self.variances).map(|(w, v)| w * v).sum()
    }

    pub fn between_variance(&self) -> f64 {
        let m = self.moments.mean;
        self.weights.iter().zip(&self.means).map(|(w, x)| w * (x - m) * (x - m)).sum()
    }

    /// `1/W`, undefined for a pure Dirac mixture.
    pub fn snr(&self) -> Option<f64> {
        let w = self.within_variance();
        (w > 0.0).then(|| 1.0 / w)
    }

    /// `Var|X - s|`
    pub fn var_fold(&self, s: f64) -> f64 {
        let h: f64 = self
            .weights
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((w, m), v)| w * folded_mean(*m, v.sqrt(), s))
            .sum();
        let d = self.moments.mean - s;
        (self.moments.variance + d * d - h * h).clamp(0.0, self.moments.variance)
    }

    /// Standardized folding ratio at pivot `s`.
    pub fn phi(&self, s: f64) -> f64 {
        4.0 * self.var_fold(s) / self.moments.variance
    }

    /// Minimum of [`phi`](Self::phi) over all pivots.
    ///
    /// One golden-section search per interval between consecutive distinct
    /// means, plus `[μ_1 - 3σ_max, μ_1]` and `[μ_k, μ_k + 3σ_max]`; the
    /// smallest value wins, ties going to the smaller pivot.
    pub fn sfr_exact(&self) -> GaussianSfr {
        let mut centers = self.means.clone();
        centers.sort_by(f64::total_cmp);
        centers.dedup();
        let spread = 3.0 * self.variances.iter().cloned().fold(0.0, f64::max).sqrt();
        let mut brackets = Vec::with_capacity(centers.len() + 1);
        let (first, last) = (centers[0], centers[centers.len() - 1]);
        if spread > 0.0 {
            brackets.push((first - spread, first));
        }
        brackets.extend(centers.windows(2).map(|w| (w[0], w[1])));
        if spread > 0.0 {
            brackets.push((last, last + spread));
        }

        let mut best: Option<GaussianSfr> = None;
        for (lo, hi) in brackets {
            let m = golden_section(|s| self.phi(s), lo, hi, PIVOT_TOL);
            match best {
                Some(b) if m.value >= b.sfr - 4.0 * crate::folding::TIE_TOLERANCE => {}
                _ => best = Some(GaussianSfr { sfr: m.value, pivot: m.x }),
            }
        }
        best.expect("at least one bracket")
    }

    /// SFR at the approximate pivot `Cov(X, X²) / (2 Var X)`.
    pub fn sfr_approx(&self) -> GaussianSfr {
        let pivot = self.approximate_pivot();
        GaussianSfr { sfr: self.phi(pivot), pivot }
    }

    pub fn approximate_pivot(&self) -> f64 {
        let m = self.moments;
        m.mean + m.third_central / (2.0 * m.variance)
    }
}

/// Common variance `σ²` in `[lo, hi]` at which the exact SFR of the family
/// `Σ ε_i N(μ_i, σ²)` crosses 1, by bisection to width `1e-4`.
pub fn find_sfr_crossing(template: &GaussianMixture, lo: f64, hi: f64) -> Result<f64> {
    if !(lo >= 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
    }
    let excess = |v: f64| -> Result<f64> { Ok(template.with_common_variance(v)?.sfr_exact().sfr - 1.0) };
    let (f_lo, f_hi) = (excess(lo)?, excess(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoCrossing { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a >= CROSSING_WIDTH {
        let mid = 0.5 * (a + b);
        if excess(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn two_gauss(variance: f64) -> GaussianMixture {
        GaussianMixture::new(vec![0.3, 0.7], vec![-2.8, 1.2], vec![variance; 2]).unwrap()
    }

    #[test]
    fn standard_normal() {
        let n = GaussianMixture::new(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        let folded = 4.0 * (1.0 - 2.0 / PI);
        close(n.phi(0.0), folded, 1e-14);
        let e = n.sfr_exact();
        close(e.sfr, folded, 1e-12);
        close(e.pivot, 0.0, 1e-6);
    }

    #[test]
    fn single_component_approx_pivot_is_mean() {
        let n = GaussianMixture::new(vec![1.0], vec![3.5], vec![2.0]).unwrap();
        close(n.sfr_approx().pivot, 3.5, 1e-15);
    }

    #[test]
    fn symmetric_mixture_approx_pivot_is_center() {
        let m = GaussianMixture::new(vec![1.0, 1.0], vec![-1.0, 1.0], vec![0.3, 0.3]).unwrap();
        close(m.sfr_approx().pivot, 0.0, 1e-15);
    }

    #[test]
    fn rejects_negative_variance() {
        assert!(matches!(GaussianMixture::new(vec![1.0], vec![0.0], vec![-0.1]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn variance_decomposition() {
        let m = GaussianMixture::new(vec![0.2, 0.5, 0.3], vec![-1.0, 0.5, 4.0], vec![0.1, 1.0, 0.4]).unwrap();
        close(m.moments().variance, m.between_variance() + m.within_variance(), 1e-13);
        close(m.snr().unwrap(), 1.0 / m.within_variance(), 1e-15);
    }

    #[test]
    fn two_gaussian_family() {
        assert!(two_gauss(0.25).sfr_exact().sfr < 1.0);
        assert!(two_gauss(2.0).sfr_exact().sfr > 1.0);
        let v = find_sfr_crossing(&two_gauss(1.0), 0.05, 2.5).unwrap();
        close(v, 1.34, 0.02);
    }

    #[test]
    fn crossing_absent() {
        assert!(matches!(find_sfr_crossing(&two_gauss(1.0), 2.0, 3.0), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn unbalanced_three_point_family_crosses() {
        let t = GaussianMixture::new(vec![0.2, 0.4, 0.4], vec![-2.0, 0.0, 2.0], vec![0.0; 3]).unwrap();
        let v = find_sfr_crossing(&t, 1e-6, 10.0).unwrap();
        assert!(v > 0.0 && v < 10.0);
    }

    #[test]
    fn small_variance_limit_matches_dirac() {
        let m = GaussianMixture::new(vec![0.2, 0.4, 0.4], vec![-2.0, 0.0, 2.0], vec![1e-8; 3]).unwrap();
        close(m.sfr_exact().sfr, 0.952_380_952_380_952_4, 1e-3);
        close(m.sfr_approx().sfr, 1.422_740_524_781_341, 1e-3);
    }
}
