use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::format::{csv_field, sig6};
use super::registry::{default_distributions, Distribution};
use crate::error::{Error, Result};
use crate::folding::PivotKind;
use crate::hypothesis::{
    dftu_sample, ftu_sample, CriticalValues, NullDistribution, SecondStepQuantile, TestKind, Verdict,
    DEFAULT_REPLICATES,
};
use crate::rng::{cell_stream, substream};
use crate::sample::WeightedSample;

const TESTS: [TestKind; 3] = [TestKind::FtuExact, TestKind::FtuApprox, TestKind::Dftu];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub distributions: Vec<Distribution>,
    pub datasets: usize,
    pub n: usize,
    pub alpha: f64,
    pub alpha1: f64,
    pub seed: u64,
    /// Null replicates per calibration.
    pub replicates: usize,
    pub policy: SecondStepQuantile,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        SimulationPlan {
            distributions: default_distributions(),
            datasets: 100,
            n: 1000,
            alpha: 0.05,
            alpha1: 0.03,
            seed: 20_250_101,
            replicates: DEFAULT_REPLICATES,
            policy: SecondStepQuantile::Conditional,
        }
    }
}

impl SimulationPlan {
    fn validate(&self) -> Result<()> {
        if self.distributions.is_empty() || self.datasets == 0 || self.n < 2 {
            return Err(Error::InvalidParameter(
                "a plan needs at least one distribution, one dataset and n >= 2".into(),
            ));
        }
        crate::hypothesis::split_alpha(self.alpha, self.alpha1)?;
        Ok(())
    }

    /// Dataset `replicate` of distribution `index`, as used by [`simulate`].
    pub fn dataset(&self, index: usize, replicate: usize) -> Result<Vec<f64>> {
        let d = self
            .distributions
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no distribution #{index}")))?;
        let mut rng = substream(self.seed, cell_stream(index as u64, replicate as u64));
        d.mixture.sample(self.n, &mut rng)
    }
}

/// Critical values for one sample size. Sizes can differ from `n` because
/// stratified counts are rounded per component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub n: usize,
    pub q_ftu_exact: f64,
    pub q_ftu_approx: f64,
    pub dftu: CriticalValues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub id: String,
    pub label: String,
    /// Unimodal verdicts for FTU-exact, FTU-approx and DFTU.
    pub uni_counts: [u32; 3],
    pub failed: usize,
    pub reference_counts: Option<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub distribution: String,
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub datasets: usize,
    pub n: usize,
    pub alpha: f64,
    pub alpha1: f64,
    pub seed: u64,
    pub calibrations: Vec<Calibration>,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distribution,test,uni_count\n");
        for row in &self.rows {
            for (t, c) in TESTS.iter().zip(row.uni_counts) {
                let _ = writeln!(out, "{},{},{}", csv_field(&row.id), t.label(), c);
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "Unimodal verdicts out of {} datasets (n = {}, alpha = {}, alpha1 = {})\n\n",
            self.datasets,
            self.n,
            sig6(self.alpha),
            sig6(self.alpha1)
        );
        out.push_str("| Distribution | FTU-exact | FTU-approx | DFTU |\n|---|---:|---:|---:|\n");
        for row in &self.rows {
            let [a, b, c] = row.uni_counts;
            let _ = write!(out, "| {} | {a} | {b} | {c} |", row.label.replace('|', "\\|"));
            if row.failed > 0 {
                let _ = write!(out, " ({} failed)", row.failed);
            }
            out.push('\n');
        }
        if !self.failures.is_empty() {
            let _ = writeln!(out, "\n{} cell(s) failed; see the JSON report for details.", self.failures.len());
        }
        out
    }
}

fn calibration(plan: &SimulationPlan, n: usize) -> Result<Calibration> {
    let null = NullDistribution::simulate(n, plan.replicates, plan.seed)?;
    Ok(Calibration {
        n,
        q_ftu_exact: null.ftu_critical_value(plan.alpha, PivotKind::Exact)?,
        q_ftu_approx: null.ftu_critical_value(plan.alpha, PivotKind::Approximate)?,
        dftu: null.critical_values(plan.alpha, plan.alpha1, plan.policy)?,
    })
}

fn run_cell(plan: &SimulationPlan, index: usize, replicate: usize, cal: &Calibration) -> Result<[bool; 3]> {
    let data = plan.dataset(index, replicate)?;
    let sample = WeightedSample::from_values(&data)?;
    let uni = |v: Verdict| v == Verdict::Unimodal;
    Ok([
        uni(ftu_sample(&sample, PivotKind::Exact, cal.q_ftu_exact)?.verdict),
        uni(ftu_sample(&sample, PivotKind::Approximate, cal.q_ftu_approx)?.verdict),
        uni(dftu_sample(&sample, cal.dftu.q1, cal.dftu.q2).verdict),
    ])
}

/// Runs FTU-exact, FTU-approx and DFTU on `datasets` stratified samples of
/// every distribution and counts unimodal verdicts.
///
/// Cell `(d, r)` draws from stream `cell_stream(d, r)` of the plan seed, so
/// the table does not depend on the number of worker threads. A failing
/// cell is recorded and excluded from the counts.
pub fn simulate(plan: &SimulationPlan) -> Result<ResultTable> {
    plan.validate()?;
    let sizes: Vec<usize> =
        plan.distributions.iter().map(|d| d.mixture.stratified_counts(plan.n).iter().sum()).collect();
    let mut calibrations: BTreeMap<usize, std::result::Result<Calibration, String>> = BTreeMap::new();
    for &m in &sizes {
        calibrations.entry(m).or_insert_with(|| calibration(plan, m).map_err(|e| e.to_string()));
    }

    let cells: Vec<(usize, usize)> =
        (0..plan.distributions.len()).flat_map(|d| (0..plan.datasets).map(move |r| (d, r))).collect();
    let outcomes: Vec<std::result::Result<[bool; 3], String>> = cells
        .par_iter()
        .map(|&(d, r)| match &calibrations[&sizes[d]] {
            Ok(cal) => run_cell(plan, d, r, cal).map_err(|e| e.to_string()),
            Err(msg) => Err(format!("calibration failed: {msg}")),
        })
        .collect();

    let mut rows: Vec<ResultRow> = plan
        .distributions
        .iter()
        .map(|d| ResultRow {
            id: d.id.clone(),
            label: d.label.clone(),
            uni_counts: [0; 3],
            failed: 0,
            reference_counts: d.reference_counts,
        })
        .collect();
    let mut failures = Vec::new();
    for (&(d, r), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(flags) => {
                for (count, flag) in rows[d].uni_counts.iter_mut().zip(flags) {
                    *count += flag as u32;
                }
            }
            Err(message) => {
                rows[d].failed += 1;
                failures.push(CellFailure { distribution: rows[d].id.clone(), replicate: r, message });
            }
        }
    }
    Ok(ResultTable {
        datasets: plan.datasets,
        n: plan.n,
        alpha: plan.alpha,
        alpha1: plan.alpha1,
        seed: plan.seed,
        calibrations: calibrations.into_values().filter_map(|c| c.ok()).collect(),
        rows,
        failures,
    })
}
