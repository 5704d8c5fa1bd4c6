//! Mixture distributions: Dirac, Gaussian and uniform components.
//!
//! The textual form used on the command line is a `+`-separated list of
//! groups, each introduced by its family:
//!
//! ```text
//! dirac:w1@m1,w2@m2,...
//! gauss:w1@m1:v1,w2@m2:v2,...     (v = variance)
//! unif:w1@lo1:hi1,...
//! ```
//!
//! e.g. `gauss:0.6@0:0.5+unif:0.4@4:8`. Weights are rescaled to sum to one.

mod dirac;
mod gaussian;
mod spec;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::WeightedSample;

pub use dirac::{
    approx_failure_predicate, dirac_sfr_approx, dirac_sfr_exact, exact_failure_predicate, failure_verdict, DiracSfr,
    FailureVerdict,
};
pub use gaussian::{find_sfr_crossing, GaussianMixture, GaussianSfr};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Component {
    Dirac { location: f64 },
    Gauss { mean: f64, variance: f64 },
    Unif { lo: f64, hi: f64 },
}

impl Component {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Component::Dirac { location } => location,
            Component::Gauss { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            Component::Unif { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, Component)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("mixture has no components".into()));
        }
        for (w, c) in &parts {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("component weight {w} must be positive")));
            }
            match *c {
                Component::Dirac { location } if !location.is_finite() => {
                    return Err(Error::InvalidParameter("non-finite Dirac location".into()))
                }
                Component::Gauss { mean, variance }
                    if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() =>
                {
                    return Err(Error::InvalidParameter(format!(
                        "Gaussian component needs finite mean and variance >= 0, got ({mean}, {variance})"
                    )))
                }
                Component::Unif { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                    return Err(Error::InvalidParameter(format!("uniform component needs lo < hi, got [{lo}, {hi}]")))
                }
                _ => {}
            }
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let (weights, components) = parts.into_iter().map(|(w, c)| (w / total, c)).unzip();
        Ok(Mixture { weights, components })
    }

    pub fn parse(text: &str) -> Result<Self> {
        spec::parse(text)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Component)> {
        self.weights.iter().copied().zip(&self.components)
    }

    /// Point-mass representation when every component is a Dirac mass.
    pub fn as_dirac(&self) -> Option<Result<WeightedSample>> {
        let pts: Option<Vec<(f64, f64)>> = self
            .iter()
            .map(|(w, c)| match *c {
                Component::Dirac { location } => Some((location, w)),
                _ => None,
            })
            .collect();
        pts.map(|p| WeightedSample::new(&p))
    }

    /// Gaussian representation (Dirac masses become zero-variance
    /// components) when there is no uniform component.
    pub fn as_gaussian(&self) -> Option<Result<GaussianMixture>> {
        let mut weights = Vec::new();
        let mut means = Vec::new();
        let mut variances = Vec::new();
        for (w, c) in self.iter() {
            let (m, v) = match *c {
                Component::Dirac { location } => (location, 0.0),
                Component::Gauss { mean, variance } => (mean, variance),
                Component::Unif { .. } => return None,
            };
            weights.push(w);
            means.push(m);
            variances.push(v);
        }
        Some(GaussianMixture::new(weights, means, variances))
    }

    /// Stratified counts: `round(n * ε_i)` draws for component `i`.
    pub fn stratified_counts(&self, n: usize) -> Vec<usize> {
        self.weights.iter().map(|w| (n as f64 * w).round() as usize).collect()
    }

    /// Stratified sample: exactly `round(n * ε_i)` draws from each
    /// component, in component order.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("sample size {n} < 2")));
        }
        let counts = self.stratified_counts(n);
        let mut out = Vec::with_capacity(counts.iter().sum());
        for (c, &count) in self.components.iter().zip(&counts) {
            out.extend((0..count).map(|_| c.draw(rng)));
        }
        Ok(out)
    }
}

impl From<&WeightedSample> for Mixture {
    fn from(s: &WeightedSample) -> Self {
        Mixture {
            weights: s.weights().to_vec(),
            components: s.locations().iter().map(|&location| Component::Dirac { location }).collect(),
        }
    }
}

impl From<&GaussianMixture> for Mixture {
    fn from(g: &GaussianMixture) -> Self {
        Mixture {
            weights: g.weights().to_vec(),
            components: g
                .means()
                .iter()
                .zip(g.variances())
                .map(|(&mean, &variance)| Component::Gauss { mean, variance })
                .collect(),
        }
    }
}

impl fmt::Display for Mixture {
    /// Consecutive components of one family share a group.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut previous: Option<std::mem::Discriminant<Component>> = None;
        for (w, c) in self.iter() {
            let family = std::mem::discriminant(c);
            let name = match c {
                Component::Dirac { .. } => "dirac:",
                Component::Gauss { .. } => "gauss:",
                Component::Unif { .. } => "unif:",
            };
            match previous {
                Some(p) if p == family => f.write_str(",")?,
                Some(_) => write!(f, "+{name}")?,
                None => f.write_str(name)?,
            }
            previous = Some(family);
            match *c {
                Component::Dirac { location } => write!(f, "{w}@{location}")?,
                Component::Gauss { mean, variance } => write!(f, "{w}@{mean}:{variance}")?,
                Component::Unif { lo, hi } => write!(f, "{w}@{lo}:{hi}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn dirac_sample_has_exact_counts() {
        let m = Mixture::parse("dirac:0.2@-2,0.4@0,0.4@2").unwrap();
        let x = m.sample(1000, &mut substream(7, 0)).unwrap();
        assert_eq!(x.len(), 1000);
        assert_eq!(x.iter().filter(|&&v| v == -2.0).count(), 200);
        assert_eq!(x.iter().filter(|&&v| v == 0.0).count(), 400);
        assert_eq!(x.iter().filter(|&&v| v == 2.0).count(), 400);
    }

    #[test]
    fn thirds_round_down() {
        let m = Mixture::parse("dirac:1@-2,1@0,1@2").unwrap();
        assert_eq!(m.stratified_counts(1000), vec![333, 333, 333]);
    }

    #[test]
    fn standard_normal_moments() {
        let m = Mixture::parse("gauss:1@0:1").unwrap();
        let x = m.sample(100_000, &mut substream(11, 3)).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn uniform_draws_stay_in_range() {
        let m = Mixture::parse("unif:1@4:8").unwrap();
        let x = m.sample(5000, &mut substream(1, 1)).unwrap();
        assert!(x.iter().all(|&v| (4.0..8.0).contains(&v)));
    }

    #[test]
    fn same_seed_same_sample() {
        let m = Mixture::parse("gauss:0.6@0:0.5+unif:0.4@1:4").unwrap();
        let a = m.sample(1000, &mut substream(42, 9)).unwrap();
        let b = m.sample(1000, &mut substream(42, 9)).unwrap();
        let c = m.sample(1000, &mut substream(42, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn conversions() {
        let m = Mixture::parse("dirac:0.5@-1,0.5@1").unwrap();
        let s = m.as_dirac().unwrap().unwrap();
        assert_eq!(s.locations(), &[-1.0, 1.0]);
        let g = m.as_gaussian().unwrap().unwrap();
        assert_eq!(g.variances(), &[0.0, 0.0]);
        assert!(Mixture::parse("unif:1@0:1").unwrap().as_gaussian().is_none());
        assert!(Mixture::parse("gauss:1@0:1").unwrap().as_dirac().is_none());
    }

    #[test]
    fn display_round_trips() {
        let m = Mixture::parse("gauss:0.6@0:0.5+unif:0.4@4:8+dirac:1e-3@-2.5").unwrap();
        let back = Mixture::parse(&m.to_string()).unwrap();
        assert_eq!(back.components(), m.components());
        for (a, b) in back.weights().iter().zip(m.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = Mixture::parse("dirac:0.25@-1,0.75@2+gauss:1@0:1").unwrap();
        assert_eq!(d.to_string(), "dirac:0.125@-1,0.375@2+gauss:0.5@0:1");
    }
}
