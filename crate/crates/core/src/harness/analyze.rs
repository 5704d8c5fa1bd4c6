use std::fmt::Write as _;

use serde::Serialize;

use super::format::sig6;
use crate::error::{Error, Result};
use crate::hypothesis::second_step;
use crate::mixture::{dirac_sfr_approx, dirac_sfr_exact, failure_verdict, FailureVerdict, Mixture};

/// Second step of the double-folding procedure on a Dirac mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleFold {
    pub fold_pivot: f64,
    pub sfr: f64,
    /// `None` when the fold collapses to one point (`sfr = 0`).
    pub pivot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub spec: String,
    pub mean: f64,
    pub variance: f64,
    /// Standardized third moment.
    pub gamma: f64,
    pub sfr_exact: f64,
    pub pivot_exact: f64,
    pub sfr_approx: f64,
    pub pivot_approx: f64,
    /// Closed-form diagnostics, Dirac mixtures only.
    pub verdict: Option<FailureVerdict>,
    pub second_step: Option<DoubleFold>,
}

impl AnalysisReport {
    /// `key: value` lines with six significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        line("spec", self.spec.clone());
        line("mean", sig6(self.mean));
        line("variance", sig6(self.variance));
        line("gamma", sig6(self.gamma));
        line("sfr_exact", sig6(self.sfr_exact));
        line("pivot_exact", sig6(self.pivot_exact));
        line("sfr_approx", sig6(self.sfr_approx));
        line("pivot_approx", sig6(self.pivot_approx));
        if let Some(v) = &self.verdict {
            line("g_star", v.g_star.to_string());
            line("g_double_star", v.g_double_star.to_string());
            line("exact_fails", v.exact_fails.to_string());
            line("approx_fails", v.approx_fails.to_string());
            line("ellipse_residual", sig6(v.ellipse_residual));
            line("line_residual", sig6(v.line_residual));
        }
        if let Some(s) = &self.second_step {
            line("second_fold_pivot", sig6(s.fold_pivot));
            line("second_sfr_exact", sig6(s.sfr));
            line("second_pivot", s.pivot.map_or("none".into(), sig6));
        }
        out
    }
}

/// Population analytics of a Dirac or Gaussian mixture: both SFRs, and
/// for Dirac mixtures the failure diagnostics and the double-folded SFR.
pub fn analyze(mixture: &Mixture) -> Result<AnalysisReport> {
    let spec = mixture.to_string();
    if let Some(sample) = mixture.as_dirac() {
        let sample = sample?;
        let m = sample.moments();
        let exact = dirac_sfr_exact(&sample);
        let approx = dirac_sfr_approx(&sample);
        let second = second_step(&sample);
        return Ok(AnalysisReport {
            spec,
            mean: m.mean,
            variance: m.variance,
            gamma: m.standardized_third(),
            sfr_exact: exact.sfr,
            pivot_exact: exact.pivot,
            sfr_approx: approx.sfr,
            pivot_approx: approx.pivot,
            verdict: Some(failure_verdict(&sample)),
            second_step: Some(DoubleFold { fold_pivot: second.fold_pivot, sfr: second.sfr, pivot: second.pivot }),
        });
    }
    let g = mixture
        .as_gaussian()
        .ok_or_else(|| Error::InvalidParameter("analysis supports Dirac and Gaussian components only".into()))??;
    let m = g.moments();
    let exact = g.sfr_exact();
    let approx = g.sfr_approx();
    Ok(AnalysisReport {
        spec,
        mean: m.mean,
        variance: m.variance,
        gamma: m.standardized_third(),
        sfr_exact: exact.sfr,
        pivot_exact: exact.pivot,
        sfr_approx: approx.sfr,
        pivot_approx: approx.pivot,
        verdict: None,
        second_step: None,
    })
}
