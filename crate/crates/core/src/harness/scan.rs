use std::fmt::Write as _;

use serde::Serialize;

use super::format::sig6;
use crate::error::{Error, Result};
use crate::mixture::{find_sfr_crossing, Mixture};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaRow {
    pub variance: f64,
    pub sfr: f64,
    pub pivot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaScan {
    pub rows: Vec<SigmaRow>,
    /// Common variance at which the exact SFR crosses 1.
    pub crossing: Option<f64>,
    /// Why no crossing was reported.
    pub crossing_note: Option<String>,
}

impl SigmaScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma2,sfr_exact,pivot\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", sig6(r.variance), sig6(r.sfr), sig6(r.pivot));
        }
        match (self.crossing, &self.crossing_note) {
            (Some(v), _) => {
                let _ = writeln!(out, "# crossing sigma2 = {}", sig6(v));
            }
            (None, Some(note)) => {
                let _ = writeln!(out, "# {note}");
            }
            (None, None) => {}
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| sigma2 | SFR (exact) | pivot |\n|---:|---:|---:|\n");
        for r in &self.rows {
            let _ = writeln!(out, "| {} | {} | {} |", sig6(r.variance), sig6(r.sfr), sig6(r.pivot));
        }
        match (self.crossing, &self.crossing_note) {
            (Some(v), _) => {
                let _ = writeln!(out, "\nCrossing of 1 at sigma2 = {}", sig6(v));
            }
            (None, Some(note)) => {
                let _ = writeln!(out, "\n{note}");
            }
            (None, None) => {}
        }
        out
    }
}

/// Exact SFR of `Σ ε_i N(μ_i, σ²)` on `steps` equally spaced values of the
/// common variance `σ²` in `[lo, hi]`, plus the crossing of 1 when the
/// family has one in that range. Component variances in `family` are
/// ignored; Dirac components count as zero-variance Gaussians.
pub fn scan_sigma(family: &Mixture, lo: f64, hi: f64, steps: usize) -> Result<SigmaScan> {
    let template = family
        .as_gaussian()
        .ok_or_else(|| Error::InvalidParameter("a variance scan needs Gaussian or Dirac components".into()))??;
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    let rows = (0..steps)
        .map(|i| {
            let variance = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            let out = template.with_common_variance(variance)?.sfr_exact();
            Ok(SigmaRow { variance, sfr: out.sfr, pivot: out.pivot })
        })
        .collect::<Result<Vec<_>>>()?;
    let (crossing, crossing_note) = match find_sfr_crossing(&template, lo, hi) {
        Ok(v) => (Some(v), None),
        Err(e @ Error::NoCrossing { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(SigmaScan { rows, crossing, crossing_note })
}
