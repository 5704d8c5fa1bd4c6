//! Simulation study, variance scans, reports and the small amount of I/O
//! behind the `unifold` binary.

mod analyze;
mod cache;
mod data;
mod format;
mod registry;
mod scan;
mod simulate;

pub use analyze::{analyze, AnalysisReport, DoubleFold};
pub use cache::{cache_file_name, load_or_calibrate, load_or_calibrate_ftu, CacheOutcome, FtuCriticalValue};
pub use data::{parse_values, read_values, write_values};
pub use format::{csv_field, sig6};
pub use registry::{default_distributions, lookup, registry, Distribution};
pub use scan::{scan_sigma, SigmaRow, SigmaScan};
pub use simulate::{simulate, Calibration, CellFailure, ResultRow, ResultTable, SimulationPlan};
