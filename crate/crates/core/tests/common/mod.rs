//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use unifold::optimize::golden_section;
use unifold::rng::substream;
use unifold::WeightedSample;

/// `Var|X - s|` summed directly over the point masses.
pub fn direct_var_fold(points: &[(f64, f64)], s: f64) -> f64 {
    let total: f64 = points.iter().map(|p| p.1).sum();
    let (mut m1, mut m2) = (0.0, 0.0);
    for &(x, w) in points {
        let d = (x - s).abs();
        m1 += w * d;
        m2 += w * d * d;
    }
    m2 / total - (m1 / total).powi(2)
}

/// Brute-force minimum of the folded variance: a dense grid over the
/// support, then golden-section refinement around every grid-local minimum.
pub fn grid_min_var_fold(points: &[(f64, f64)], grid: usize) -> (f64, f64) {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| lo + step * i as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&s| direct_var_fold(points, s)).collect();
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..grid {
        let left = if i == 0 { f64::INFINITY } else { vs[i - 1] };
        let right = if i + 1 == grid { f64::INFINITY } else { vs[i + 1] };
        if vs[i] <= left && vs[i] <= right {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(grid - 1)];
            let m = golden_section(|s| direct_var_fold(points, s), a, b, 1e-13);
            if m.value < best.1 {
                best = (m.x, m.value);
            }
        }
    }
    best
}

/// Random point masses: `2..=max_k` locations in `[-5, 5]`, weights in
/// `[0.05, 1]`.
pub fn random_points(seed: u64, index: u64, max_k: usize) -> Vec<(f64, f64)> {
    let mut rng = substream(seed, index);
    let k = rng.random_range(2..=max_k);
    (0..k).map(|_| (rng.random_range(-5.0..5.0), rng.random_range(0.05..1.0))).collect()
}

pub fn random_sample(seed: u64, index: u64, max_k: usize) -> WeightedSample {
    WeightedSample::new(&random_points(seed, index, max_k)).expect("distinct random locations")
}
