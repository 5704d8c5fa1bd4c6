//! Closed-form folding ratios of Dirac mixtures and their failure regions.
//!
//! All prefix quantities refer to the standardized mixture. An SFR "fails"
//! when it is at least 1 although the mixture is multimodal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::WeightedSample;

/// Points this close to the ellipse or the line count as failures (`Φ = 1`).
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracSfr {
    pub sfr: f64,
    /// `g*` (exact) or `g**` (approximate).
    pub gap: usize,
    /// Pivot in the mixture's own coordinates.
    pub pivot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureVerdict {
    pub exact_fails: bool,
    pub approx_fails: bool,
    pub g_star: usize,
    pub g_double_star: usize,
    pub alpha_g_star: f64,
    pub eta_g_star: f64,
    pub alpha_g_double_star: f64,
    pub eta_g_double_star: f64,
    pub gamma: f64,
    pub sfr_exact: f64,
    pub sfr_approx: f64,
    /// `α²/(√3/4)² + (η - 1/2)²/(1/2)² - 1` at `g*`; `<= 0` inside the
    /// failure ellipse.
    pub ellipse_residual: f64,
    /// `4α - (2η - 1)γ + √(γ² + 3)` at `g**`; `>= 0` on the failing side.
    pub line_residual: f64,
}

fn prefix(m: &WeightedSample, g: usize) -> (f64, f64) {
    if g == 0 {
        (0.0, 0.0)
    } else if g >= m.len() {
        (0.0, 1.0)
    } else {
        (m.standardized_prefix_first()[g - 1], m.prefix_mass()[g - 1])
    }
}

/// `Φ* = 4(1 - α²_{g*} / (η_{g*}(1 - η_{g*})))`.
pub fn dirac_sfr_exact(m: &WeightedSample) -> DiracSfr {
    let out = m.exact_pivot();
    let (alpha, eta) = prefix(m, out.gap);
    let tail = m.tail_mass()[out.gap - 1];
    DiracSfr { sfr: 4.0 * (1.0 - alpha * alpha / (eta * tail)), gap: out.gap, pivot: out.pivot }
}

/// `Φ** = 4(1 - 4α² - 2α(1 - 2η)γ + η(1 - η)γ²)` at `g** = #{μ_i <= γ/2}`.
///
/// When the pivot lies outside the support the folded variance equals the
/// variance and `Φ** = 4`.
pub fn dirac_sfr_approx(m: &WeightedSample) -> DiracSfr {
    let gamma = m.moments().standardized_third();
    let t = 0.5 * gamma;
    let pivot = m.from_standard(t);
    let gap = m.count_at_or_below(pivot);
    let sfr = if gap == 0 || gap == m.len() {
        4.0 * m.var_fold(pivot) / m.variance()
    } else {
        let (a, e) = prefix(m, gap);
        let tail = m.tail_mass()[gap - 1];
        4.0 * (1.0 - 4.0 * a * a - 2.0 * a * (tail - e) * gamma + e * tail * gamma * gamma)
    };
    DiracSfr { sfr, gap, pivot }
}

/// True iff `α ∈ [-(√3/2)√(η(1-η)), 0]`, i.e. `Φ* >= 1`.
pub fn exact_failure_predicate(alpha_g: f64, eta_g: f64) -> Result<bool> {
    if !(eta_g > 0.0 && eta_g < 1.0) {
        return Err(Error::InvalidParameter(format!("eta {eta_g} outside (0, 1)")));
    }
    if alpha_g > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "prefix moment {alpha_g} must be <= 0 for a standardized mixture"
        )));
    }
    let bound = -(3.0f64.sqrt() / 2.0) * (eta_g * (1.0 - eta_g)).sqrt();
    Ok(alpha_g >= bound - BOUNDARY_TOL)
}

/// True iff `4α - (2η - 1)γ + √(γ² + 3) >= 0`, i.e. `Φ** >= 1`.
pub fn approx_failure_predicate(alpha_g: f64, eta_g: f64, gamma: f64) -> bool {
    line_residual(alpha_g, eta_g, gamma) >= -BOUNDARY_TOL
}

fn line_residual(alpha: f64, eta: f64, gamma: f64) -> f64 {
    4.0 * alpha - (2.0 * eta - 1.0) * gamma + (gamma * gamma + 3.0).sqrt()
}

pub fn failure_verdict(m: &WeightedSample) -> FailureVerdict {
    let exact = dirac_sfr_exact(m);
    let approx = dirac_sfr_approx(m);
    let gamma = m.moments().standardized_third();
    let (a1, e1) = prefix(m, exact.gap);
    let (a2, e2) = prefix(m, approx.gap);
    let exact_fails = exact_failure_predicate(a1, e1).unwrap_or(exact.sfr >= 1.0);
    // Outside the support Φ** = 4, which always fails.
    let approx_fails =
        if approx.gap == 0 || approx.gap == m.len() { true } else { approx_failure_predicate(a2, e2, gamma) };
    FailureVerdict {
        exact_fails,
        approx_fails,
        g_star: exact.gap,
        g_double_star: approx.gap,
        alpha_g_star: a1,
        eta_g_star: e1,
        alpha_g_double_star: a2,
        eta_g_double_star: e2,
        gamma,
        sfr_exact: exact.sfr,
        sfr_approx: approx.sfr,
        ellipse_residual: a1 * a1 / (3.0 / 16.0) + (e1 - 0.5) * (e1 - 0.5) / 0.25 - 1.0,
        line_residual: line_residual(a2, e2, gamma),
    }
}
