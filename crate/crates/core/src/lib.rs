//! Folding-ratio tests of unimodality.
//!
//! * [`sample`] and [`folding`]: weighted point masses, exact and
//!   approximate folding pivots, standardized folding ratios (SFR).
//! * [`mixture`]: closed forms for Dirac and Gaussian mixtures, failure
//!   regions, stratified sampling and the textual mixture format.
//! * [`hypothesis`]: the single-step folding test (FTU), the double-folding
//!   test (DFTU) and Monte Carlo calibration of their critical values.
//! * [`threedirac`]: numerical checks of the 3-Dirac double-folding analysis.
//! * [`harness`]: simulation study, variance scans and report generation
//!   behind the `unifold` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod folding;
pub mod harness;
pub mod hypothesis;
pub mod mixture;
pub mod normal;
pub mod optimize;
pub mod rng;
pub mod sample;
pub mod threedirac;

pub use error::{Error, Result};
pub use folding::{FoldingOutcome, PivotKind};
pub use hypothesis::{calibrate, dftu, ftu, CriticalValues, Decision, TestKind, Verdict};
pub use mixture::{GaussianMixture, Mixture};
pub use sample::{Moments, WeightedSample};
