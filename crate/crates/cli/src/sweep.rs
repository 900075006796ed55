//! Parameter sweeps over Stern-Gerlach runs.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::report::{num, Csv};
use crate::scenario::SweepParams;
use crate::sg;

pub const TAIL_COLUMNS: [&str; 4] = ["u_fi", "flip_probability", "kick_error_up", "kick_error_down"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: Vec<f64>,
    pub u_fi: f64,
    /// Flip probability of the run that starts spin up.
    pub flip_probability: f64,
    pub kick_error_up: f64,
    pub kick_error_down: f64,
}

pub struct SweepReport {
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn table(&self) -> Csv {
        let header: Vec<&str> = self.axes.iter().map(String::as_str).chain(TAIL_COLUMNS).collect();
        let mut csv = Csv::new(&header);
        for r in &self.rows {
            let mut row: Vec<String> = r.point.iter().map(|&v| num(v)).collect();
            row.extend([num(r.u_fi), num(r.flip_probability), num(r.kick_error_up), num(r.kick_error_down)]);
            csv.push(row);
        }
        csv
    }
}

/// Runs every grid point, at most `jobs` at a time (all cores if `None`).
/// Rows come back in axis order whatever the scheduling.
pub fn run(params: &SweepParams, jobs: Option<usize>) -> CliResult<SweepReport> {
    params.validate()?;
    let points = params.points();
    let work = || -> CliResult<Vec<SweepRow>> {
        points
            .par_iter()
            .map(|point| {
                let p = params.params_at(point)?;
                let r = sg::run(&p, false)?;
                sg::check(&r)?;
                Ok(SweepRow {
                    point: point.clone(),
                    u_fi: r.summary.u_fi,
                    flip_probability: r.summary.flip_probability_up,
                    kick_error_up: r.summary.kick_error_up,
                    kick_error_down: r.summary.kick_error_down,
                })
            })
            .collect()
    };
    let rows = match jobs {
        Some(0) => return Err(CliError::input("--jobs: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::input(format!("--jobs: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(SweepReport { axes: params.axes.iter().map(|a| a.field.clone()).collect(), rows })
}
