//! Folding pivots, folded variances and standardized folding ratios.
//!
//! On a standardized sample with ordered locations `z_1 < … < z_k`, the map
//! `t ↦ Var|Z - t|` is continuous and equal, on each gap `[z_g, z_{g+1}]`,
//! to the convex parabola
//!
//! ```text
//! 1 - 4 (α_g - η_g t) (α_g + (1 - η_g) t)
//! ```
//!
//! whose vertex is `s_g = (α_g / 2) (1/η_g - 1/(1 - η_g))`. The exact pivot
//! is the best clamped vertex over all gaps; outside `[z_1, z_k]` the folded
//! variance equals the full variance. The approximate pivot minimizes
//! `Var (X - s)^2` and is `Cov(X, X^2) / (2 Var X)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sample::WeightedSample;

/// Folded variances closer than this are treated as equal; the smaller
/// pivot wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotKind {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldingOutcome {
    /// Pivot in the sample's own coordinates.
    pub pivot: f64,
    /// `Var|X - pivot|`
    pub folded_variance: f64,
    /// Folding ratio `Var|X - pivot| / Var X`.
    pub phi: f64,
    /// Standardized folding ratio, `4 * phi`.
    pub sfr: f64,
    pub pivot_kind: PivotKind,
    /// Number of locations at or below the pivot for the approximate pivot;
    /// the minimizing gap `g*` (1-based) for the exact pivot.
    pub gap: usize,
}

impl FoldingOutcome {
    fn new(sample: &WeightedSample, t: f64, phi: f64, kind: PivotKind, gap: usize) -> Self {
        let phi = phi.clamp(0.0, 1.0);
        FoldingOutcome {
            pivot: sample.from_standard(t),
            folded_variance: phi * sample.variance(),
            phi,
            sfr: 4.0 * phi,
            pivot_kind: kind,
            gap,
        }
    }
}

/// Vertex of the folded-variance parabola on gap `g`.
pub fn gap_vertex(alpha: f64, eta: f64, tail: f64) -> f64 {
    0.5 * alpha * (1.0 / eta - 1.0 / tail)
}

/// Value of the folded-variance parabola of a standardized sample.
fn gap_parabola(alpha: f64, eta: f64, tail: f64, t: f64) -> f64 {
    1.0 - 4.0 * (alpha - eta * t) * (alpha + tail * t)
}

impl WeightedSample {
    /// Standardized folded variance `Var|Z - t|` at a standardized pivot.
    pub(crate) fn standardized_var_fold(&self, t: f64) -> f64 {
        let z = self.std_location_bound(t);
        if z == 0 || z == self.len() {
            return 1.0;
        }
        let g = z - 1;
        let v = gap_parabola(self.standardized_prefix_first()[g], self.prefix_mass()[g], self.tail_mass()[g], t);
        v.clamp(0.0, 1.0)
    }

    fn std_location_bound(&self, t: f64) -> usize {
        self.count_at_or_below(self.from_standard(t))
    }

    /// `Var|X - pivot|`, always within `[0, Var X]`.
    pub fn var_fold(&self, pivot: f64) -> f64 {
        self.variance() * self.standardized_var_fold(self.to_standard(pivot))
    }

    /// Unclamped parabola vertices `s_1 < … < s_{k-1}` in standardized
    /// coordinates.
    pub fn gap_vertices(&self) -> Vec<f64> {
        self.standardized_prefix_first()
            .iter()
            .zip(self.prefix_mass())
            .zip(self.tail_mass())
            .map(|((&a, &e), &t)| gap_vertex(a, e, t))
            .collect()
    }

    /// Exact folding pivot: the smallest global minimizer of `Var|X - s|`.
    pub fn exact_pivot(&self) -> FoldingOutcome {
        let mut best: Option<(usize, f64, f64)> = None;
        let alphas = self.standardized_prefix_first();
        let etas = self.prefix_mass();
        let tails = self.tail_mass();
        let lo_hi = |g: usize| (self.to_standard(self.locations()[g]), self.to_standard(self.locations()[g + 1]));
        for g in 0..self.len() - 1 {
            let (lo, hi) = lo_hi(g);
            let t = gap_vertex(alphas[g], etas[g], tails[g]).clamp(lo, hi);
            let v = gap_parabola(alphas[g], etas[g], tails[g], t);
            match best {
                Some((_, _, bv)) if v >= bv - TIE_TOLERANCE => {}
                _ => best = Some((g, t, v)),
            }
        }
        let (g, t, v) = best.expect("a valid sample has at least one gap");
        FoldingOutcome::new(self, t, v, PivotKind::Exact, g + 1)
    }

    /// Approximate folding pivot `Cov(X, X^2) / (2 Var X)`.
    pub fn approximate_pivot(&self) -> FoldingOutcome {
        let t = 0.5 * self.moments().standardized_third();
        let v = self.standardized_var_fold(t);
        let gap = self.std_location_bound(t);
        FoldingOutcome::new(self, t, v, PivotKind::Approximate, gap)
    }

    pub fn pivot(&self, kind: PivotKind) -> FoldingOutcome {
        match kind {
            PivotKind::Exact => self.exact_pivot(),
            PivotKind::Approximate => self.approximate_pivot(),
        }
    }

    /// Distribution of `|X - pivot|`; colliding images are merged.
    ///
    /// Fails with `DegenerateSample` when every mass lands on one point.
    pub fn fold(&self, pivot: f64) -> Result<WeightedSample> {
        let split = self.locations().partition_point(|&x| x < pivot);
        let (left_x, right_x) = self.locations().split_at(split);
        let (left_w, right_w) = self.weights().split_at(split);

        // Left images pivot - x increase when walking the left part backwards.
        let mut left = left_x.iter().rev().zip(left_w.iter().rev()).map(|(x, w)| (pivot - x, *w)).peekable();
        let mut right = right_x.iter().zip(right_w).map(|(x, w)| (x - pivot, *w)).peekable();
        let mut locations = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        loop {
            let next = match (left.peek(), right.peek()) {
                (Some(a), Some(b)) => {
                    if a.0 <= b.0 {
                        left.next()
                    } else {
                        right.next()
                    }
                }
                (Some(_), None) => left.next(),
                (None, Some(_)) => right.next(),
                (None, None) => break,
            };
            let (x, w) = next.unwrap();
            locations.push(x);
            weights.push(w);
        }
        WeightedSample::from_sorted(locations, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn balanced(a: f64) -> WeightedSample {
        WeightedSample::new(&[(-a, 1.0), (0.0, 1.0), (a, 1.0)]).unwrap()
    }

    #[test]
    fn symmetric_two_point_folds_to_zero() {
        let s = WeightedSample::new(&[(-1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(s.var_fold(0.0), 0.0);
    }

    #[test]
    fn pathological_var_fold_at_quarter() {
        let a = 1.5f64.sqrt();
        let s = balanced(a);
        close(s.var_fold(a / 4.0), 0.25, 1e-14);
        close(s.var_fold(-a / 4.0), 0.25, 1e-14);
    }

    #[test]
    fn var_fold_outside_support_is_full_variance() {
        let s = WeightedSample::new(&[(-2.0, 0.2), (0.0, 0.4), (2.0, 0.4)]).unwrap();
        close(s.var_fold(-10.0), s.variance(), 1e-12);
        close(s.var_fold(7.0), s.variance(), 1e-12);
    }

    #[test]
    fn two_point_exact_and_approximate_are_zero() {
        for (w1, x2) in [(0.5, 1.0), (0.1, 3.0), (0.93, -0.2)] {
            let s = WeightedSample::new(&[(0.0, w1), (x2, 1.0 - w1)]).unwrap();
            close(s.exact_pivot().sfr, 0.0, 1e-12);
            close(s.exact_pivot().pivot, x2 / 2.0, 1e-12);
            close(s.approximate_pivot().sfr, 0.0, 1e-12);
        }
    }

    #[test]
    fn pathological_exact_pivot_is_smallest_minimizer() {
        let a = 1.5f64.sqrt();
        let out = balanced(a).exact_pivot();
        close(out.sfr, 1.0, 1e-12);
        close(out.pivot, -a / 4.0, 1e-12);
        assert_eq!(out.gap, 1);
        assert_eq!(out.pivot_kind, PivotKind::Exact);
    }

    #[test]
    fn pathological_approximate_pivot() {
        let out = balanced(2.0).approximate_pivot();
        close(out.pivot, 0.0, 1e-15);
        close(out.sfr, 4.0 / 3.0, 1e-12);
    }

    #[test]
    fn example_values() {
        let a = WeightedSample::new(&[(-2.0, 0.2), (0.0, 0.4), (2.0, 0.4)]).unwrap();
        let b = WeightedSample::new(&[(-3.0, 0.2), (-1.5, 0.2), (2.5, 0.2), (4.0, 0.2), (11.0, 0.2)]).unwrap();
        // Dense-grid and closed-form evaluations agree on these values.
        close(a.exact_pivot().sfr, 0.952_380_952_380_952_4, 1e-9);
        close(a.approximate_pivot().sfr, 1.422_740_524_781_341, 1e-9);
        close(b.exact_pivot().sfr, 1.077_050_538_525_27, 1e-8);
        close(b.approximate_pivot().sfr, 1.382_216_422_628_774, 1e-9);
        assert!((b.exact_pivot().sfr - 1.07).abs() < 0.01);
        assert!((b.approximate_pivot().sfr - 1.38).abs() < 0.01);
        assert!((a.exact_pivot().sfr - 0.95).abs() < 0.01);
    }

    #[test]
    fn approximate_pivot_matches_covariance_formula() {
        let pts = [(-1.0, 0.1), (0.5, 0.6), (4.0, 0.3)];
        let s = WeightedSample::new(&pts).unwrap();
        let ex = |f: &dyn Fn(f64) -> f64| pts.iter().map(|&(x, w)| w * f(x)).sum::<f64>();
        let m = ex(&|x| x);
        let var = ex(&|x| x * x) - m * m;
        let cov = ex(&|x| x * x * x) - m * ex(&|x| x * x);
        close(s.approximate_pivot().pivot, cov / (2.0 * var), 1e-12);
    }

    #[test]
    fn fold_pathological_at_zero() {
        let a = 2.0;
        let f = balanced(a).fold(0.0).unwrap();
        assert_eq!(f.locations(), &[0.0, a]);
        close(f.weights()[0], 1.0 / 3.0, 1e-15);
        close(f.weights()[1], 2.0 / 3.0, 1e-15);
        close(f.exact_pivot().sfr, 0.0, 1e-12);
        close(f.exact_pivot().pivot, a / 2.0, 1e-12);
    }

    #[test]
    fn fold_below_support_is_a_shift() {
        let s = WeightedSample::new(&[(1.0, 0.3), (2.0, 0.3), (5.0, 0.4)]).unwrap();
        let f = s.fold(-1.0).unwrap();
        assert_eq!(f.locations(), &[2.0, 3.0, 6.0]);
        assert_eq!(f.weights(), s.weights());
    }

    #[test]
    fn fold_above_support_reverses() {
        let s = WeightedSample::new(&[(1.0, 0.3), (2.0, 0.3), (5.0, 0.4)]).unwrap();
        let f = s.fold(6.0).unwrap();
        assert_eq!(f.locations(), &[1.0, 4.0, 5.0]);
        assert_eq!(f.weights(), &[0.4, 0.3, 0.3]);
    }

    #[test]
    fn fold_collision_is_degenerate() {
        let s = WeightedSample::new(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(s.fold(0.5), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn pivot_reported_in_original_coordinates() {
        let base = balanced(1.0);
        let moved = base.affine(3.0, 10.0).unwrap();
        close(moved.exact_pivot().pivot, 3.0 * base.exact_pivot().pivot + 10.0, 1e-12);
        close(moved.exact_pivot().sfr, base.exact_pivot().sfr, 1e-12);
    }
}
