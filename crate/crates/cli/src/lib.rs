//! Scenario runner behind the `ktm` binary.
//!
//! A scenario is a TOML file naming one `kind` of run together with its
//! parameters. Each run writes CSV (and for Stern-Gerlach, JSON) reports to
//! an output directory; see the README for the schema and columns.

pub mod acceptance;
pub mod amplify;
pub mod error;
pub mod measure;
pub mod relations;
pub mod report;
pub mod scenario;
pub mod sg;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use error::{CliError, CliResult};
pub use scenario::{Kind, Scenario};

pub const DEFAULT_OUTPUT_DIR: &str = "out";
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's `output_dir`.
    pub out: Option<PathBuf>,
    /// Overrides the scenario's `seed`.
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

/// Runs a scenario and writes its reports. Reports are written before the
/// run's invariants are checked, so a breach still leaves them on disk.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let dir = opts.out.clone().or_else(|| s.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let seed = opts.seed.or(s.seed).unwrap_or(DEFAULT_SEED);
    let dir: &Path = &dir;
    // `Scenario::parse` guarantees the table for the kind is present
    let missing = || CliError::input(format!("missing [{}] table", s.kind.name()));
    match s.kind {
        Kind::Relations => {
            let (csv, rows) = relations::run(s.relations.as_ref().ok_or_else(missing)?)?;
            let path = csv.write(dir, "relations.csv")?;
            relations::check(&rows)?;
            Ok(vec![path])
        }
        Kind::Measure => {
            let r = measure::run(s.measure.as_ref().ok_or_else(missing)?, seed)?;
            let mut paths = vec![r.table.write(dir, "measure.csv")?];
            if let Some(random) = &r.random {
                paths.push(random.write(dir, "measure_random.csv")?);
            }
            measure::check(&r)?;
            Ok(paths)
        }
        Kind::Amplify => {
            let r = amplify::run(s.amplify.as_ref().ok_or_else(missing)?)?;
            let path = r.table.write(dir, "amplify.csv")?;
            amplify::check(&r)?;
            Ok(vec![path])
        }
        Kind::Sterngerlach => {
            let r = sg::run(s.sterngerlach.as_ref().ok_or_else(missing)?, true)?;
            let paths = vec![
                r.timeseries().write(dir, "timeseries.csv")?,
                report::write_file(dir, "summary.json", &r.summary_json())?,
            ];
            sg::check(&r)?;
            Ok(paths)
        }
        Kind::Sweep => {
            let r = sweep::run(s.sweep.as_ref().ok_or_else(missing)?, opts.jobs)?;
            Ok(vec![r.table().write(dir, "sweep.csv")?])
        }
    }
}
