use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::folding::PivotKind;
use crate::hypothesis::{split_alpha, CriticalValues, NullDistribution, SecondStepQuantile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    /// No cache directory was given.
    Disabled,
    Hit(PathBuf),
    /// Freshly calibrated and written to this file.
    Stored(PathBuf),
}

/// File name for the key `(n, α₁, α₂, replicates, seed)` and the
/// second-step quantile policy.
pub fn cache_file_name(
    n: usize,
    alpha1: f64,
    alpha2: f64,
    replicates: usize,
    seed: u64,
    policy: SecondStepQuantile,
) -> String {
    let suffix = match policy {
        SecondStepQuantile::Conditional => "",
        SecondStepQuantile::Unconditional => "_uncond",
    };
    format!("cv_n{n}_a1-{alpha1:?}_a2-{alpha2:?}_r{replicates}_s{seed}{suffix}.json")
}

fn matches_key(cv: &CriticalValues, n: usize, alpha: f64, alpha1: f64, replicates: usize, seed: u64) -> bool {
    cv.n == n && cv.alpha == alpha && cv.alpha1 == alpha1 && cv.replicates == replicates && cv.seed == seed
}

/// Loads critical values from `dir` when a file with a matching key exists,
/// otherwise calibrates and, if `dir` is given, stores the result.
///
/// Unreadable or mismatching cache files are recomputed and overwritten.
pub fn load_or_calibrate(
    dir: Option<&Path>,
    n: usize,
    alpha: f64,
    alpha1: f64,
    replicates: usize,
    seed: u64,
    policy: SecondStepQuantile,
) -> Result<(CriticalValues, CacheOutcome)> {
    let alpha2 = split_alpha(alpha, alpha1)?;
    let path = dir.map(|d| d.join(cache_file_name(n, alpha1, alpha2, replicates, seed, policy)));
    if let Some(path) = &path {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(cv) = serde_json::from_str::<CriticalValues>(&text) {
                if matches_key(&cv, n, alpha, alpha1, replicates, seed) {
                    return Ok((cv, CacheOutcome::Hit(path.clone())));
                }
            }
        }
    }
    let cv = NullDistribution::simulate(n, replicates, seed)?.critical_values(alpha, alpha1, policy)?;
    let Some(path) = path else { return Ok((cv, CacheOutcome::Disabled)) };
    store(&path, &serde_json::to_string_pretty(&cv)?)?;
    Ok((cv, CacheOutcome::Stored(path)))
}

/// Cached single-step critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtuCriticalValue {
    pub n: usize,
    pub alpha: f64,
    pub pivot_kind: PivotKind,
    pub replicates: usize,
    pub seed: u64,
    pub q: f64,
}

/// Single-step analogue of [`load_or_calibrate`].
pub fn load_or_calibrate_ftu(
    dir: Option<&Path>,
    n: usize,
    alpha: f64,
    pivot_kind: PivotKind,
    replicates: usize,
    seed: u64,
) -> Result<(FtuCriticalValue, CacheOutcome)> {
    let kind = match pivot_kind {
        PivotKind::Exact => "exact",
        PivotKind::Approximate => "approx",
    };
    let path = dir.map(|d| d.join(format!("ftu_{kind}_n{n}_a-{alpha:?}_r{replicates}_s{seed}.json")));
    let key = |c: &FtuCriticalValue| {
        c.n == n && c.alpha == alpha && c.pivot_kind == pivot_kind && c.replicates == replicates && c.seed == seed
    };
    if let Some(path) = &path {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(c) = serde_json::from_str::<FtuCriticalValue>(&text) {
                if key(&c) {
                    return Ok((c, CacheOutcome::Hit(path.clone())));
                }
            }
        }
    }
    let q = NullDistribution::simulate(n, replicates, seed)?.ftu_critical_value(alpha, pivot_kind)?;
    let c = FtuCriticalValue { n, alpha, pivot_kind, replicates, seed, q };
    match path {
        Some(path) => {
            store(&path, &serde_json::to_string_pretty(&c)?)?;
            Ok((c, CacheOutcome::Stored(path)))
        }
        None => Ok((c, CacheOutcome::Disabled)),
    }
}

fn store(path: &Path, json: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, format!("{json}\n"))?;
    fs::rename(&tmp, path)?;
    Ok(())
}
