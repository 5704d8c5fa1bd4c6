//! `unifold`: folding tests of unimodality from the command line.
//!
//! Exit codes: 0 success, 1 verdict differs from `--expect` or a
//! verification check failed, 2 usage, input or parameter error, 3 numeric
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unifold::folding::PivotKind;
use unifold::harness::{self, sig6, SimulationPlan};
use unifold::hypothesis::{dftu_sample, ftu_sample, SecondStepQuantile, DEFAULT_REPLICATES};
use unifold::threedirac::{self, check_bounds, dftu_never_fails_3dirac, verify_second_step};
use unifold::{Decision, Error, Mixture, Verdict, WeightedSample};

#[derive(Parser, Debug)]
#[command(name = "unifold", version, about = "Folding tests of unimodality (FTU, DFTU)")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, env = "UNIFOLD_SEED", default_value_t = 42)]
    seed: u64,

    /// Directory for cached critical values.
    #[arg(long, global = true, env = "UNIFOLD_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Levels {
    /// Overall significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// First-step level of the double-folding test.
    #[arg(long, default_value_t = 0.03)]
    alpha1: f64,

    /// Null replicates per calibration.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    reps: usize,

    /// Take the second-step quantile over all null replicates instead of
    /// those surviving step 1.
    #[arg(long)]
    unconditional_q2: bool,
}

impl Levels {
    fn policy(&self) -> SecondStepQuantile {
        if self.unconditional_q2 {
            SecondStepQuantile::Unconditional
        } else {
            SecondStepQuantile::Conditional
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TestChoice {
    Ftu,
    Dftu,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PivotChoice {
    Exact,
    Approx,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Md,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Expect {
    Unimodal,
    Multimodal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run FTU or DFTU on one column of a data file.
    Test {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "dftu")]
        test: TestChoice,
        /// Pivot of the single-step test.
        #[arg(long, value_enum, default_value = "exact")]
        pivot: PivotChoice,
        /// 1-based column to read.
        #[arg(long, default_value_t = 1)]
        column: usize,
        #[command(flatten)]
        levels: Levels,
        /// Exit with status 1 when the verdict differs.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count unimodal verdicts of FTU-exact, FTU-approx and DFTU over
    /// simulated datasets.
    Simulate {
        /// Registered distribution id or mixture spec; repeatable. `all`
        /// selects every registered distribution. Defaults to the eight
        /// standard rows.
        #[arg(long = "dist")]
        dists: Vec<String>,
        /// Datasets per distribution.
        #[arg(long, default_value_t = 100)]
        datasets: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        levels: Levels,
        /// Write PREFIX.csv, PREFIX.md and PREFIX.json.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
        /// Write every generated dataset to this directory.
        #[arg(long, value_name = "DIR")]
        dump: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
    },
    /// Exact SFR of a Gaussian family as a function of the common variance.
    ScanSigma {
        /// Mixture spec; component variances are replaced by the scan value.
        spec: String,
        #[arg(long, default_value_t = 0.05)]
        lo: f64,
        #[arg(long, default_value_t = 2.5)]
        hi: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Population SFRs and failure diagnostics of a mixture.
    Analyze {
        spec: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical checks of the 3-Dirac double-folding analysis.
    Verify {
        /// Grid points per axis of the second-step search.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Grid points refined by coordinate descent.
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        /// Random configurations for the pivot-location and failure bounds.
        #[arg(long = "bounds", default_value_t = 1000)]
        bounds_configs: usize,
        /// Random failure-region configurations run through both steps.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate DFTU critical values and store them in the cache.
    Calibrate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        levels: Levels,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Mismatch(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoCrossing { .. } | Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn decision_markdown(d: &Decision) -> String {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), sig6);
    let verdict = match d.verdict {
        Verdict::Unimodal => "unimodal",
        Verdict::Multimodal => "multimodal",
    };
    format!(
        "| test | verdict | sfr1 | q1 | sfr2 | q2 | step |\n|---|---|---:|---:|---:|---:|---:|\n| {} | {} | {} | {} | {} | {} | {} |\n",
        d.test.label(),
        verdict,
        sig6(d.sfr1),
        sig6(d.q1),
        opt(d.sfr2),
        opt(d.q2),
        d.step_stopped
    )
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed;
    let cache = cli.cache_dir.as_deref();
    match cli.command {
        Command::Test { file, test, pivot, column, levels, expect, format, out } => {
            let values = harness::read_values(&file, column)?;
            let sample = WeightedSample::from_values(&values)?;
            let n = values.len();
            let decision = match test {
                TestChoice::Dftu => {
                    let (cv, _) = harness::load_or_calibrate(
                        cache,
                        n,
                        levels.alpha,
                        levels.alpha1,
                        levels.reps,
                        seed,
                        levels.policy(),
                    )?;
                    dftu_sample(&sample, cv.q1, cv.q2)
                }
                TestChoice::Ftu => {
                    let kind = match pivot {
                        PivotChoice::Exact => PivotKind::Exact,
                        PivotChoice::Approx => PivotKind::Approximate,
                    };
                    let (c, _) = harness::load_or_calibrate_ftu(cache, n, levels.alpha, kind, levels.reps, seed)?;
                    ftu_sample(&sample, kind, c.q)?
                }
            };
            let text = match format {
                Format::Md => decision_markdown(&decision),
                Format::Csv | Format::Json => json(&decision)?,
            };
            emit(&text, out.as_deref())?;
            if let Some(expect) = expect {
                let wanted = match expect {
                    Expect::Unimodal => Verdict::Unimodal,
                    Expect::Multimodal => Verdict::Multimodal,
                };
                if decision.verdict != wanted {
                    return Err(Failure::Mismatch(format!("expected {expect:?}, got {:?}", decision.verdict)));
                }
            }
        }
        Command::Simulate { dists, datasets, n, levels, out, dump, format } => {
            let distributions = if dists.is_empty() {
                harness::default_distributions()
            } else if dists.iter().any(|d| d == "all") {
                harness::registry()
            } else {
                dists.iter().map(|d| harness::lookup(d)).collect::<Result<_, _>>()?
            };
            let plan = SimulationPlan {
                distributions,
                datasets,
                n,
                alpha: levels.alpha,
                alpha1: levels.alpha1,
                seed,
                replicates: levels.reps,
                policy: levels.policy(),
            };
            let table = harness::simulate(&plan)?;
            if let Some(dir) = dump {
                fs::create_dir_all(&dir)?;
                for d in 0..plan.distributions.len() {
                    for r in 0..plan.datasets {
                        if let Ok(values) = plan.dataset(d, r) {
                            harness::write_values(&dir.join(format!("d{d}_r{r}.txt")), &values)?;
                        }
                    }
                }
            }
            if let Some(prefix) = out {
                let with = |ext: &str| {
                    let mut p = prefix.clone().into_os_string();
                    p.push(ext);
                    PathBuf::from(p)
                };
                fs::write(with(".csv"), table.to_csv())?;
                fs::write(with(".md"), table.to_markdown())?;
                fs::write(with(".json"), json(&table)?)?;
            }
            for f in &table.failures {
                eprintln!("cell {} #{} failed: {}", f.distribution, f.replicate, f.message);
            }
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => json(&table)?,
                Format::Md => table.to_markdown(),
            };
            print!("{text}");
        }
        Command::ScanSigma { spec, lo, hi, steps, format, out } => {
            let family = Mixture::parse(&spec)?;
            let scan = harness::scan_sigma(&family, lo, hi, steps)?;
            let text = match format {
                Format::Csv => scan.to_csv(),
                Format::Json => json(&scan)?,
                Format::Md => scan.to_markdown(),
            };
            emit(&text, out.as_deref())?;
        }
        Command::Analyze { spec, format, out } => {
            let report = harness::analyze(&Mixture::parse(&spec)?)?;
            let text = match format {
                Format::Json => json(&report)?,
                Format::Csv | Format::Md => report.to_text(),
            };
            emit(&text, out.as_deref())?;
        }
        Command::Verify { grid, restarts, bounds_configs, trials, out } => {
            let report = verify(grid, restarts, bounds_configs, trials, seed)?;
            emit(&json(&report)?, out.as_deref())?;
            if !report.passed {
                return Err(Failure::Mismatch("verification failed".into()));
            }
        }
        Command::Calibrate { n, levels, out } => {
            let (cv, outcome) =
                harness::load_or_calibrate(cache, n, levels.alpha, levels.alpha1, levels.reps, seed, levels.policy())?;
            if let harness::CacheOutcome::Stored(p) | harness::CacheOutcome::Hit(p) = &outcome {
                eprintln!("cache: {}", p.display());
            }
            emit(&json(&cv)?, out.as_deref())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsSummary {
    configs: usize,
    location_agreement: usize,
    failure_agreement: usize,
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    bounds: Option<BoundsSummary>,
    second_step: threedirac::SecondStepReport,
    never_fails: Option<threedirac::NeverFailsReport>,
}

fn verify(
    grid: usize,
    restarts: usize,
    bounds_configs: usize,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport, Failure> {
    let second_step = verify_second_step(grid, restarts)?;
    let bounds = (bounds_configs > 0)
        .then(|| -> Result<BoundsSummary, Error> {
            let configs = threedirac::random_configs(bounds_configs, seed)?;
            let checks: Vec<_> = configs.iter().map(check_bounds).collect();
            Ok(BoundsSummary {
                configs: checks.len(),
                location_agreement: checks.iter().filter(|c| c.location_agrees).count(),
                failure_agreement: checks.iter().filter(|c| c.failure_agrees).count(),
            })
        })
        .transpose()?;
    let never_fails = (trials > 0).then(|| dftu_never_fails_3dirac(trials, seed)).transpose()?;
    let passed = second_step.all_positive
        && bounds.as_ref().is_none_or(|p| p.location_agreement == p.configs && p.failure_agreement == p.configs)
        && never_fails.as_ref().is_none_or(|r| r.counterexamples == 0);
    Ok(VerifyReport { passed, bounds, second_step, never_fails })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("unifold: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("unifold: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
