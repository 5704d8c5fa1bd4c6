//! Weighted point-mass samples.
//!
//! A [`WeightedSample`] is a finite discrete distribution: strictly increasing
//! locations carrying positive weights that sum to one. Empirical data enter
//! as equal-weight masses, Dirac mixtures with their proportions. Prefix sums
//! of the weights and of the weighted locations are cached at construction so
//! that every folding quantity can be evaluated per gap in constant time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First three moments of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `E[(X - mean)^3]`
    pub third_central: f64,
    /// `E[X^3]`
    pub third_raw: f64,
}

impl Moments {
    /// Third moment of the standardized variable, `E[((X - mean)/sd)^3]`.
    pub fn standardized_third(&self) -> f64 {
        self.third_central / self.variance.powf(1.5)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    locations: Vec<f64>,
    weights: Vec<f64>,
    // α_g = Σ_{i≤g} ε_i μ_i and η_g = Σ_{i≤g} ε_i for g = 1..k-1 (index g-1).
    prefix_first: Vec<f64>,
    prefix_mass: Vec<f64>,
    // Σ_{i>g} ε_i, kept separately so that 1 - η_g never cancels.
    tail_mass: Vec<f64>,
    // α_g of the standardized sample.
    std_prefix_first: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl WeightedSample {
    /// Builds a sample from `(location, weight)` pairs.
    ///
    /// Locations are sorted, exactly equal locations merged (weights added)
    /// and weights rescaled to sum to one.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        for &(location, weight) in points {
            if !location.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite location {location}")));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::InvalidWeight { location, weight });
            }
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (locations, weights): (Vec<f64>, Vec<f64>) = sorted.into_iter().unzip();
        Self::from_sorted(locations, weights)
    }

    /// Equal-weight sample from raw observations.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value {bad}")));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let weights = vec![1.0; sorted.len()];
        Self::from_sorted(sorted, weights)
    }

    /// `locations` must be sorted ascending; adjacent equal entries are merged.
    pub(crate) fn from_sorted(locations: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(locations.len(), weights.len());
        let mut locs: Vec<f64> = Vec::with_capacity(locations.len());
        let mut ws: Vec<f64> = Vec::with_capacity(weights.len());
        for (x, w) in locations.into_iter().zip(weights) {
            match locs.last() {
                Some(&last) if last == x => *ws.last_mut().unwrap() += w,
                _ => {
                    locs.push(x);
                    ws.push(w);
                }
            }
        }
        if locs.len() < 2 {
            return Err(Error::DegenerateSample(format!("{} distinct location(s), need at least 2", locs.len())));
        }
        let total: f64 = ws.iter().sum();
        ws.iter_mut().for_each(|w| *w /= total);

        let mean: f64 = locs.iter().zip(&ws).map(|(x, w)| w * x).sum();
        let variance: f64 = locs.iter().zip(&ws).map(|(x, w)| w * (x - mean) * (x - mean)).sum();
        if !(variance > 0.0) {
            return Err(Error::DegenerateSample("zero variance".into()));
        }
        let sd = variance.sqrt();

        let k = locs.len();
        let mut prefix_first = Vec::with_capacity(k - 1);
        let mut prefix_mass = Vec::with_capacity(k - 1);
        let mut std_prefix_first = Vec::with_capacity(k - 1);
        let (mut a, mut e, mut az) = (0.0, 0.0, 0.0);
        for i in 0..k - 1 {
            a += ws[i] * locs[i];
            e += ws[i];
            az += ws[i] * (locs[i] - mean) / sd;
            prefix_first.push(a);
            prefix_mass.push(e);
            std_prefix_first.push(az);
        }
        let mut tail_mass = vec![0.0; k - 1];
        let mut t = 0.0;
        for i in (1..k).rev() {
            t += ws[i];
            tail_mass[i - 1] = t;
        }

        Ok(WeightedSample {
            locations: locs,
            weights: ws,
            prefix_first,
            prefix_mass,
            tail_mass,
            std_prefix_first,
            mean,
            variance,
        })
    }

    /// Number of distinct locations `k`.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Prefix first moments `α_1..α_{k-1}` in the sample's own coordinates.
    pub fn prefix_first(&self) -> &[f64] {
        &self.prefix_first
    }

    /// Cumulative weights `η_1..η_{k-1}`.
    pub fn prefix_mass(&self) -> &[f64] {
        &self.prefix_mass
    }

    /// Prefix first moments of the standardized sample.
    pub fn standardized_prefix_first(&self) -> &[f64] {
        &self.std_prefix_first
    }

    pub(crate) fn tail_mass(&self) -> &[f64] {
        &self.tail_mass
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn moments(&self) -> Moments {
        let m = self.mean;
        let (mut third_central, mut third_raw) = (0.0, 0.0);
        for (x, w) in self.points() {
            let d = x - m;
            third_central += w * d * d * d;
            third_raw += w * x * x * x;
        }
        Moments { mean: m, variance: self.variance, third_central, third_raw }
    }

    /// Maps a location to standardized coordinates.
    pub fn to_standard(&self, x: f64) -> f64 {
        (x - self.mean) / self.std_dev()
    }

    pub fn from_standard(&self, z: f64) -> f64 {
        self.mean + self.std_dev() * z
    }

    /// Same masses at `(μ_i - mean)/sd`: mean 0, variance 1.
    pub fn standardize(&self) -> Self {
        let sd = self.std_dev();
        let locations = self.locations.iter().map(|x| (x - self.mean) / sd).collect();
        Self::from_sorted(locations, self.weights.clone()).expect("standardizing a valid sample keeps it valid")
    }

    /// Image under `x ↦ a·x + b`, `a ≠ 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("affine map needs finite a != 0, got a={a}, b={b}")));
        }
        let mut pts: Vec<(f64, f64)> = self.points().map(|(x, w)| (a * x + b, w)).collect();
        if a < 0.0 {
            pts.reverse();
        }
        let (locations, weights) = pts.into_iter().unzip();
        Self::from_sorted(locations, weights)
    }

    /// Number of locations `<= x`.
    pub(crate) fn count_at_or_below(&self, x: f64) -> usize {
        self.locations.partition_point(|&m| m <= x)
    }
}
