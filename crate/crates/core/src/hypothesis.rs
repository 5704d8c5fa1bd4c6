//! Folding tests of unimodality and Monte Carlo calibration.
//!
//! The single-step test (FTU) rejects unimodality when the SFR of the data
//! falls below a critical value. The double-folding test (DFTU) runs the
//! exact SFR on the data first; if that does not reject, it folds the data
//! at the approximate pivot and runs the exact SFR again on the folded data.
//! With per-step levels `α₁`, `α₂` the overall level is
//! `α = α₁ + (1 - α₁) α₂`.
//!
//! Critical values are empirical quantiles of the statistics under uniform
//! samples of the same size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::folding::PivotKind;
use crate::rng::substream;
use crate::sample::WeightedSample;

pub const DEFAULT_REPLICATES: usize = 10_000;
pub const MIN_REPLICATES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Unimodal,
    Multimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    FtuExact,
    FtuApprox,
    Dftu,
}

impl TestKind {
    pub fn label(self) -> &'static str {
        match self {
            TestKind::FtuExact => "FTU-exact",
            TestKind::FtuApprox => "FTU-approx",
            TestKind::Dftu => "DFTU",
        }
    }
}

/// How the second-step critical value is read off the null replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecondStepQuantile {
    /// Over replicates that survive step 1, `P(Φ₂ < q₂ | Φ₁ >= q₁)`.
    #[default]
    Conditional,
    /// Over all replicates.
    Unconditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub q1: f64,
    pub q2: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub pivot_policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub test: TestKind,
    pub verdict: Verdict,
    pub sfr1: f64,
    pub pivot1_exact: f64,
    /// Approximate pivot, when it was used (FTU-approx or DFTU step 2).
    pub pivot1_approx: Option<f64>,
    pub sfr2: Option<f64>,
    /// `None` when step 2 ran on a fold that collapsed to a single point.
    pub pivot2: Option<f64>,
    pub step_stopped: u8,
    pub q1: f64,
    pub q2: Option<f64>,
}

/// `α₂` such that `α = α₁ + (1 - α₁) α₂`.
pub fn split_alpha(alpha: f64, alpha1: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    if !(alpha1 > 0.0 && alpha1 < alpha) {
        return Err(Error::InvalidParameter(format!("alpha1 {alpha1} must lie in (0, alpha={alpha})")));
    }
    Ok((alpha - alpha1) / (1.0 - alpha1))
}

/// Lower empirical quantile: the order statistic of rank `ceil(p·m)`.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("quantile of an empty list".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile order {p} outside (0, 1)")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Result of folding at the approximate pivot and taking the exact SFR of
/// the folded sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondStep {
    pub fold_pivot: f64,
    pub sfr: f64,
    pub pivot: Option<f64>,
}

/// A fold that collapses every mass onto one point has `Φ₂ = 0`.
pub fn second_step(sample: &WeightedSample) -> SecondStep {
    let fold_pivot = sample.approximate_pivot().pivot;
    match sample.fold(fold_pivot) {
        Ok(folded) => {
            let out = folded.exact_pivot();
            SecondStep { fold_pivot, sfr: out.sfr, pivot: Some(out.pivot) }
        }
        Err(_) => SecondStep { fold_pivot, sfr: 0.0, pivot: None },
    }
}

/// Statistics of one uniform replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullReplicate {
    pub sfr_exact: f64,
    pub sfr_approx: f64,
    pub sfr_second: f64,
}

/// Null distribution of the folding statistics for uniform samples of size
/// `n`. Replicate `i` uses stream `i` of `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub n: usize,
    pub seed: u64,
    pub replicates: Vec<NullReplicate>,
}

impl NullDistribution {
    pub fn simulate(n: usize, replicates: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("sample size {n} < 2")));
        }
        if replicates < MIN_REPLICATES {
            return Err(Error::InvalidParameter(format!("{replicates} replicates, need at least {MIN_REPLICATES}")));
        }
        let replicates = (0..replicates as u64)
            .into_par_iter()
            .map(|i| {
                use rand::Rng;
                let mut rng = substream(seed, i);
                let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let sample = WeightedSample::from_values(&data)?;
                Ok(NullReplicate {
                    sfr_exact: sample.exact_pivot().sfr,
                    sfr_approx: sample.approximate_pivot().sfr,
                    sfr_second: second_step(&sample).sfr,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NullDistribution { n, seed, replicates })
    }

    fn column(&self, f: impl Fn(&NullReplicate) -> f64) -> Vec<f64> {
        self.replicates.iter().map(f).collect()
    }

    /// Single-step critical value at level `alpha`.
    pub fn ftu_critical_value(&self, alpha: f64, kind: PivotKind) -> Result<f64> {
        let col = match kind {
            PivotKind::Exact => self.column(|r| r.sfr_exact),
            PivotKind::Approximate => self.column(|r| r.sfr_approx),
        };
        quantile(&col, alpha)
    }

    pub fn critical_values(&self, alpha: f64, alpha1: f64, policy: SecondStepQuantile) -> Result<CriticalValues> {
        let alpha2 = split_alpha(alpha, alpha1)?;
        let q1 = quantile(&self.column(|r| r.sfr_exact), alpha1)?;
        let second: Vec<f64> = match policy {
            SecondStepQuantile::Conditional => {
                self.replicates.iter().filter(|r| r.sfr_exact >= q1).map(|r| r.sfr_second).collect()
            }
            SecondStepQuantile::Unconditional => self.column(|r| r.sfr_second),
        };
        let q2 = quantile(&second, alpha2)?;
        let policy_name = match policy {
            SecondStepQuantile::Conditional => "conditional",
            SecondStepQuantile::Unconditional => "unconditional",
        };
        Ok(CriticalValues {
            alpha,
            alpha1,
            alpha2,
            q1,
            q2,
            n: self.n,
            replicates: self.replicates.len(),
            seed: self.seed,
            pivot_policy: format!("step1=exact; fold=approximate; step2=exact; q2={policy_name}"),
        })
    }
}

/// Calibrates DFTU critical values on uniform samples of size `n`, with the
/// conditional second-step quantile.
pub fn calibrate(n: usize, alpha: f64, alpha1: f64, replicates: usize, seed: u64) -> Result<CriticalValues> {
    split_alpha(alpha, alpha1)?;
    NullDistribution::simulate(n, replicates, seed)?.critical_values(alpha, alpha1, SecondStepQuantile::Conditional)
}

/// Single-step folding test with critical value `q`.
pub fn ftu(data: &[f64], kind: PivotKind, q: f64) -> Result<Decision> {
    ftu_sample(&WeightedSample::from_values(data)?, kind, q)
}

pub fn ftu_sample(sample: &WeightedSample, kind: PivotKind, q: f64) -> Result<Decision> {
    let exact = sample.exact_pivot();
    let (sfr1, pivot1_approx, test) = match kind {
        PivotKind::Exact => (exact.sfr, None, TestKind::FtuExact),
        PivotKind::Approximate => {
            let approx = sample.approximate_pivot();
            (approx.sfr, Some(approx.pivot), TestKind::FtuApprox)
        }
    };
    Ok(Decision {
        test,
        verdict: if sfr1 < q { Verdict::Multimodal } else { Verdict::Unimodal },
        sfr1,
        pivot1_exact: exact.pivot,
        pivot1_approx,
        sfr2: None,
        pivot2: None,
        step_stopped: 1,
        q1: q,
        q2: None,
    })
}

/// Double folding test with critical values `q1`, `q2`.
pub fn dftu(data: &[f64], cv: &CriticalValues) -> Result<Decision> {
    Ok(dftu_sample(&WeightedSample::from_values(data)?, cv.q1, cv.q2))
}

pub fn dftu_sample(sample: &WeightedSample, q1: f64, q2: f64) -> Decision {
    let first = sample.exact_pivot();
    let mut decision = Decision {
        test: TestKind::Dftu,
        verdict: Verdict::Multimodal,
        sfr1: first.sfr,
        pivot1_exact: first.pivot,
        pivot1_approx: None,
        sfr2: None,
        pivot2: None,
        step_stopped: 1,
        q1,
        q2: Some(q2),
    };
    if first.sfr < q1 {
        return decision;
    }
    let second = second_step(sample);
    decision.pivot1_approx = Some(second.fold_pivot);
    decision.sfr2 = Some(second.sfr);
    decision.pivot2 = second.pivot;
    decision.step_stopped = 2;
    if second.sfr >= q2 {
        decision.verdict = Verdict::Unimodal;
    }
    decision
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_order_statistics() {
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[5.0], 0.03).unwrap(), 5.0);
        let grid: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(quantile(&grid, 0.03).unwrap(), 3.0);
        assert!(matches!(quantile(&[], 0.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(quantile(&[1.0], 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn alpha_split() {
        let a2 = split_alpha(0.05, 0.03).unwrap();
        assert!((a2 - 0.02 / 0.97).abs() < 1e-15);
        assert!((a2 - 0.020_619).abs() < 1e-6);
        assert!(split_alpha(0.05, 0.05).is_err());
        assert!(split_alpha(0.05, 0.0).is_err());
    }

    #[test]
    fn calibration_rejects_bad_levels() {
        assert!(matches!(calibrate(100, 0.05, 0.06, 1000, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(calibrate(100, 0.05, 0.03, 999, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate(200, 0.05, 0.03, 1000, 5).unwrap();
        let b = calibrate(200, 0.05, 0.03, 1000, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.q1 < 1.0 && a.q1 > 0.0);
        assert!(a.q2 > 0.0 && a.q2 <= 4.0);
        assert!(((a.alpha2 - (a.alpha - a.alpha1) / (1.0 - a.alpha1)).abs()) < 1e-12);
    }

    #[test]
    fn balanced_three_point_data() {
        let data: Vec<f64> = [-2.0, 0.0, 2.0].iter().flat_map(|&x| std::iter::repeat_n(x, 333)).collect();
        for kind in [PivotKind::Exact, PivotKind::Approximate] {
            assert_eq!(ftu(&data, kind, 0.95).unwrap().verdict, Verdict::Unimodal);
        }
        let d = dftu_sample(&WeightedSample::from_values(&data).unwrap(), 0.95, 0.9);
        assert_eq!(d.verdict, Verdict::Multimodal);
        assert_eq!(d.step_stopped, 2);
        assert!(d.sfr2.unwrap().abs() < 1e-9);
        assert!((d.pivot2.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn first_step_rejection_stops() {
        let data = [0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.1];
        let d = dftu_sample(&WeightedSample::from_values(&data).unwrap(), 0.9, 0.9);
        assert_eq!(d.verdict, Verdict::Multimodal);
        assert_eq!(d.step_stopped, 1);
        assert!(d.sfr2.is_none() && d.pivot1_approx.is_none());
    }

    #[test]
    fn degenerate_data() {
        assert!(matches!(ftu(&[1.0, 1.0], PivotKind::Exact, 0.9), Err(Error::DegenerateSample(_))));
    }
}
