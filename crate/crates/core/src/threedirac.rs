//! Numerical checks of the 3-Dirac analysis of double folding.
//!
//! A standardized 3-Dirac mixture is determined by `(μ₁, ε₁, ε₃)`. On this
//! parameterization the exact pivot lies in the first gap iff
//! `μ₁ <= U(ε₁, ε₃)`, and then the exact SFR fails iff `μ₁ >= F(ε₁)`.
//! The second step of the double-folding procedure is checked by minimizing
//! four objectives over the first-step failure region; all four being
//! positive means the second step always detects multimodality.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::dirac_sfr_exact;
use crate::optimize::golden_section;
use crate::rng::substream;
use crate::sample::WeightedSample;

/// Strict inequalities on the parameters are enforced with this margin.
pub const MARGIN: f64 = 1e-9;
/// Tolerance used when comparing against the `U` and `F` bounds.
pub const BOUND_TOL: f64 = 1e-9;

pub const MU1_RANGE: (f64, f64) = (-10.0, 0.0);
pub const EPS_RANGE: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeDiracConfig {
    pub mu: [f64; 3],
    pub eps: [f64; 3],
}

impl ThreeDiracConfig {
    pub fn sample(&self) -> WeightedSample {
        WeightedSample::new(&[(self.mu[0], self.eps[0]), (self.mu[1], self.eps[1]), (self.mu[2], self.eps[2])])
            .expect("reconstructed configurations are valid samples")
    }

    /// `γ = E[X³]`
    pub fn gamma(&self) -> f64 {
        self.mu.iter().zip(&self.eps).map(|(m, e)| e * m * m * m).sum()
    }
}

/// `[-√((1-ε₁)/ε₁), -√(ε₃/(1-ε₃))]`
pub fn admissible_mu1(eps1: f64, eps3: f64) -> (f64, f64) {
    (-((1.0 - eps1) / eps1).sqrt(), -(eps3 / (1.0 - eps3)).sqrt())
}

/// Standardized 3-Dirac mixture with first location `mu1` and outer
/// weights `eps1`, `eps3`.
pub fn reconstruct(mu1: f64, eps1: f64, eps3: f64) -> Result<ThreeDiracConfig> {
    let eps2 = 1.0 - eps1 - eps3;
    if !(eps1 > MARGIN && eps3 > MARGIN && eps2 > MARGIN) {
        return Err(Error::Infeasible(format!("weights ({eps1}, {eps2}, {eps3}) not all positive")));
    }
    if !(mu1 < 0.0) {
        return Err(Error::Infeasible(format!("mu1 = {mu1} must be negative")));
    }
    let disc = 1.0 - eps1 * (1.0 + mu1 * mu1);
    if !(disc > 0.0) {
        return Err(Error::Infeasible(format!("mu1 = {mu1} below admissible interval (discriminant {disc})")));
    }
    let mu2 = -eps1 / (1.0 - eps1) * mu1 - (eps3 / eps2).sqrt() * disc.sqrt() / (1.0 - eps1);
    let mu3 = -(eps1 * mu1 + eps2 * mu2) / eps3;
    if !(mu1 < mu2 && mu2 < mu3) {
        return Err(Error::Infeasible(format!("locations ({mu1}, {mu2}, {mu3}) not increasing")));
    }
    Ok(ThreeDiracConfig { mu: [mu1, mu2, mu3], eps: [eps1, eps2, eps3] })
}

/// `count` feasible configurations with `ε₁, ε₃` uniform on the weight box
/// and `μ₁` uniform on its admissible interval.
pub fn random_configs(count: usize, seed: u64) -> Result<Vec<ThreeDiracConfig>> {
    let mut rng = substream(seed, 1);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > count.saturating_mul(1000).max(10_000) {
            return Err(Error::InvalidParameter("could not draw feasible configurations".into()));
        }
        let eps1 = rng.random_range(EPS_RANGE.0..EPS_RANGE.1);
        let eps3 = rng.random_range(EPS_RANGE.0..EPS_RANGE.1);
        let (lo, hi) = admissible_mu1(eps1, eps3);
        let mu1 = lo + (hi - lo) * rng.random::<f64>();
        if let Ok(c) = reconstruct(mu1, eps1, eps3) {
            out.push(c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub u1: f64,
    pub u2: f64,
    /// `max(u1, u2)`
    pub u: f64,
    pub f: f64,
}

pub fn bounds(eps1: f64, eps3: f64) -> Bounds {
    let eps2 = 1.0 - eps1 - eps3;
    let r1 = (1.0 - eps1) / eps1;
    let r3 = eps3 / (1.0 - eps3);
    let u1 = -(0.5f64.sqrt()) * (r1 + r1.sqrt() * r3.sqrt()).sqrt();
    let c = 4.0 * eps1 * eps3;
    let u2 = -(2.0 * eps2 + c) / (c * (eps2 + c)).sqrt() * r3.sqrt();
    Bounds { u1, u2, u: u1.max(u2), f: -(3.0f64.sqrt() / 2.0) * r1.sqrt() }
}

/// `Var|X - s|` by direct summation.
fn direct_var_fold(c: &ThreeDiracConfig, s: f64) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, w) in c.mu.iter().zip(&c.eps) {
        m1 += w * (x - s).abs();
        m2 += w * (x - s) * (x - s);
    }
    m2 - m1 * m1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub config: ThreeDiracConfig,
    pub bounds: Bounds,
    /// `μ₁ <= U`
    pub predicted_first_gap: bool,
    /// The smallest minimizer found by brute force lies in `[μ₁, μ₂]`.
    pub oracle_first_gap: bool,
    pub oracle_pivot: f64,
    pub oracle_sfr: f64,
    /// `μ₁ >= F`, meaningful only in the first-gap branch.
    pub predicted_fails: Option<bool>,
    pub oracle_fails: Option<bool>,
    pub location_agrees: bool,
    pub failure_agrees: bool,
}

/// Compares the `U`/`F` predicates against a brute-force search of the
/// exact pivot (golden section of the directly summed folded variance on
/// each gap).
pub fn check_bounds(config: &ThreeDiracConfig) -> BoundsCheck {
    let [mu1, mu2, mu3] = config.mu;
    let b = bounds(config.eps[0], config.eps[2]);
    let f = |s| direct_var_fold(config, s);
    let first = golden_section(f, mu1, mu2, 1e-13);
    let second = golden_section(f, mu2, mu3, 1e-13);
    let oracle_first_gap = first.value <= second.value + 1e-12;
    let (oracle_pivot, min_var) = if oracle_first_gap { (first.x, first.value) } else { (second.x, second.value) };
    let oracle_sfr = 4.0 * min_var;

    let predicted_first_gap = mu1 <= b.u + BOUND_TOL;
    let (predicted_fails, oracle_fails) = if oracle_first_gap {
        (Some(mu1 >= b.f - BOUND_TOL), Some(oracle_sfr >= 1.0 - BOUND_TOL))
    } else {
        (None, None)
    };
    BoundsCheck {
        config: *config,
        bounds: b,
        predicted_first_gap,
        oracle_first_gap,
        oracle_pivot,
        oracle_sfr,
        predicted_fails,
        oracle_fails,
        location_agrees: predicted_first_gap == oracle_first_gap,
        failure_agrees: predicted_fails == oracle_fails,
    }
}

/// Interval of `μ₁` on which the first step fails with the pivot in the
/// first gap: `[F, U]` intersected with the admissible interval.
pub fn failure_interval(eps1: f64, eps3: f64) -> Option<(f64, f64)> {
    if !(1.0 - eps1 - eps3 > MARGIN) {
        return None;
    }
    let b = bounds(eps1, eps3);
    let (lo_adm, hi_adm) = admissible_mu1(eps1, eps3);
    let lo = b.f.max(lo_adm + MARGIN).max(MU1_RANGE.0);
    let hi = b.u.min(hi_adm - MARGIN).min(MU1_RANGE.1);
    (lo <= hi).then_some((lo, hi))
}

pub const OBJECTIVE_NAMES: [&str; 4] =
    ["gamma - mu1 - mu2", "mu2 + mu3 - gamma", "U(eps2_1, eps2_3) - mu2_1", "F(eps2_1) - mu2_1"];

/// The four second-step objectives at `(μ₁, ε₁, ε₃)`.
///
/// `None` when the configuration is infeasible or the fold at `γ/2` does
/// not leave three distinct locations.
pub fn second_step_objectives(mu1: f64, eps1: f64, eps3: f64) -> Option<[f64; 4]> {
    let c = reconstruct(mu1, eps1, eps3).ok()?;
    let gamma = c.gamma();
    let [m1, m2, m3] = c.mu;
    let folded = c.sample().fold(gamma / 2.0).ok()?;
    if folded.len() != 3 {
        return None;
    }
    let z = folded.standardize();
    let (w, loc) = (z.weights(), z.locations());
    let b = bounds(w[0], w[2]);
    Some([gamma - m1 - m2, m2 + m3 - gamma, b.u - loc[0], b.f - loc[0]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveMin {
    pub minimum: f64,
    /// `(μ₁, ε₁, ε₃)`
    pub argmin: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondStepReport {
    pub grid_resolution: usize,
    pub restarts: usize,
    pub feasible_points: usize,
    pub skipped_points: usize,
    pub objectives: Vec<(String, ObjectiveMin)>,
    pub all_positive: bool,
    pub wall_time_secs: f64,
}

fn grid(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Point in the failure region from unit coordinates: `tau` positions `μ₁`
/// inside the failure interval of `(ε₁, ε₃)`.
fn region_point(tau: f64, eps1: f64, eps3: f64) -> Option<f64> {
    let (lo, hi) = failure_interval(eps1, eps3)?;
    Some(lo + tau.clamp(0.0, 1.0) * (hi - lo))
}

type Candidate = (f64, [f64; 3]);

fn keep_best(list: &mut Vec<Candidate>, k: usize) {
    list.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.partial_cmp(&b.1).unwrap()));
    list.truncate(k);
}

fn coordinate_descent(objective: usize, start: [f64; 3], step0: [f64; 3]) -> Candidate {
    // coordinates: (tau, eps1, eps3)
    let eval = |p: [f64; 3]| -> Option<f64> {
        if !(0.0..=1.0).contains(&p[0])
            || !(EPS_RANGE.0..=EPS_RANGE.1).contains(&p[1])
            || !(EPS_RANGE.0..=EPS_RANGE.1).contains(&p[2])
        {
            return None;
        }
        let mu1 = region_point(p[0], p[1], p[2])?;
        second_step_objectives(mu1, p[1], p[2]).map(|o| o[objective])
    };
    let mut p = start;
    let mut best = eval(p).unwrap_or(f64::INFINITY);
    let mut step = step0;
    for _ in 0..20_000 {
        let mut improved = false;
        for d in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut q = p;
                q[d] += sign * step[d];
                if let Some(v) = eval(q) {
                    if v < best {
                        best = v;
                        p = q;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step.iter().all(|&s| s < 1e-12) {
                break;
            }
        }
    }
    let mu1 = region_point(p[0], p[1], p[2]).unwrap_or(f64::NAN);
    (best, [mu1, p[1], p[2]])
}

/// Minimizes the four second-step objectives over the first-step failure
/// region: a `resolution³` grid over `(ε₁, ε₃)` and `μ₁` (the `μ₁` axis
/// spans the failure interval of each weight pair), then coordinate descent
/// from the best `restarts` grid points of each objective.
pub fn verify_second_step(resolution: usize, restarts: usize) -> Result<SecondStepReport> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!("grid resolution {resolution} < 2")));
    }
    let started = Instant::now();
    let keep = restarts.max(1);
    let n = resolution;

    type Acc = ([Vec<Candidate>; 4], usize, usize);
    let empty = || -> Acc { (Default::default(), 0, 0) };
    let merge = |mut a: Acc, b: Acc| -> Acc {
        for (x, y) in a.0.iter_mut().zip(b.0) {
            x.extend(y);
            keep_best(x, keep);
        }
        (a.0, a.1 + b.1, a.2 + b.2)
    };
    let (best, feasible, skipped) = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps1 = grid(EPS_RANGE.0, EPS_RANGE.1, n, i);
            let mut acc = empty();
            for j in 0..n {
                let eps3 = grid(EPS_RANGE.0, EPS_RANGE.1, n, j);
                if failure_interval(eps1, eps3).is_none() {
                    continue;
                }
                for l in 0..n {
                    let tau = grid(0.0, 1.0, n, l);
                    let mu1 = region_point(tau, eps1, eps3).unwrap();
                    match second_step_objectives(mu1, eps1, eps3) {
                        Some(obj) => {
                            acc.1 += 1;
                            for (list, v) in acc.0.iter_mut().zip(obj) {
                                list.push((v, [tau, eps1, eps3]));
                            }
                        }
                        None => acc.2 += 1,
                    }
                }
                for list in acc.0.iter_mut() {
                    if list.len() > 4 * keep {
                        keep_best(list, keep);
                    }
                }
            }
            for list in acc.0.iter_mut() {
                keep_best(list, keep);
            }
            acc
        })
        .reduce(empty, merge);

    if feasible == 0 {
        return Err(Error::InvalidParameter(format!(
            "no feasible point in the failure region at resolution {resolution}"
        )));
    }

    let eps_step = (EPS_RANGE.1 - EPS_RANGE.0) / (n - 1) as f64;
    let step0 = [1.0 / (n - 1) as f64, eps_step, eps_step];
    let objectives: Vec<(String, ObjectiveMin)> = best
        .iter()
        .enumerate()
        .map(|(o, starts)| {
            let refined: Vec<Candidate> =
                starts.par_iter().map(|(_, start)| coordinate_descent(o, *start, step0)).collect();
            let grid_best = starts.first().map(|(v, p)| (*v, [region_point(p[0], p[1], p[2]).unwrap(), p[1], p[2]]));
            let (minimum, argmin) = refined
                .into_iter()
                .chain(grid_best)
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.partial_cmp(&b.1).unwrap()))
                .unwrap();
            (OBJECTIVE_NAMES[o].to_string(), ObjectiveMin { minimum, argmin })
        })
        .collect();

    let all_positive = objectives.iter().all(|(_, m)| m.minimum > 0.0);
    Ok(SecondStepReport {
        grid_resolution: resolution,
        restarts,
        feasible_points: feasible,
        skipped_points: skipped,
        objectives,
        all_positive,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeverFailsReport {
    pub trials: usize,
    pub counterexamples: usize,
    pub min_first_sfr: f64,
    pub max_second_sfr: f64,
    /// A counterexample configuration, if any was found.
    pub worst: Option<ThreeDiracConfig>,
}

/// Population-level outcome of the double-folding procedure on a 3-Dirac
/// mixture: `(Φ*₁, Some(Φ*₂))`, or `(Φ*₁, None)` when step 1 already
/// rejects (`Φ*₁ < 1`).
pub fn double_fold_population(c: &ThreeDiracConfig) -> (f64, Option<f64>) {
    let sample = c.sample();
    let first = dirac_sfr_exact(&sample).sfr;
    if first < 1.0 - BOUND_TOL {
        return (first, None);
    }
    let pivot = sample.approximate_pivot().pivot;
    let second = match sample.fold(pivot) {
        Ok(folded) => dirac_sfr_exact(&folded).sfr,
        Err(_) => 0.0,
    };
    (first, Some(second))
}

/// Draws `trials` configurations uniformly inside the first-step failure
/// region and counts those for which the second step also fails.
pub fn dftu_never_fails_3dirac(trials: usize, seed: u64) -> Result<NeverFailsReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut rng = substream(seed, 0);
    let mut report = NeverFailsReport {
        trials: 0,
        counterexamples: 0,
        min_first_sfr: f64::INFINITY,
        max_second_sfr: f64::NEG_INFINITY,
        worst: None,
    };
    let mut attempts = 0usize;
    while report.trials < trials {
        attempts += 1;
        if attempts > trials.saturating_mul(10_000).max(1_000_000) {
            return Err(Error::InvalidParameter("failure region too small to sample".into()));
        }
        let eps1 = rng.random_range(EPS_RANGE.0..EPS_RANGE.1);
        let eps3 = rng.random_range(EPS_RANGE.0..EPS_RANGE.1);
        let Some((lo, hi)) = failure_interval(eps1, eps3) else { continue };
        let mu1 = lo + (hi - lo) * rng.random::<f64>();
        let Ok(config) = reconstruct(mu1, eps1, eps3) else { continue };
        let (first, second) = double_fold_population(&config);
        let Some(second) = second else { continue };
        report.trials += 1;
        report.min_first_sfr = report.min_first_sfr.min(first);
        if second > report.max_second_sfr {
            report.max_second_sfr = second;
        }
        if second >= 1.0 {
            report.counterexamples += 1;
            report.worst.get_or_insert(config);
        }
    }
    Ok(report)
}
