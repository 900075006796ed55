//! Projective instrument on a scenario state, cross-checked against the
//! coupled picture.

use kt_measure::measurement::{instrument, verify_instrument_equals_coupled_expectation, Outcome};
use kt_measure::random::{random_hermitian, random_state, random_subset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_within, CliResult};
use crate::report::{num, Csv};
use crate::scenario::{build_observable, build_outcomes, build_representation, build_state, MeasureParams};

/// Tolerance on `|coupled - instrument|`.
pub const COUPLED_TOL: f64 = 1e-12;

pub const COLUMNS: [&str; 5] = ["outcome_set", "probability", "expectation_re", "expectation_im", "coupled_residual"];
pub const RANDOM_COLUMNS: [&str; 3] = ["case", "outcome_set", "coupled_residual"];

pub struct MeasureReport {
    pub table: Csv,
    /// Present when random checks were requested.
    pub random: Option<Csv>,
    pub worst_residual: f64,
}

pub fn run(params: &MeasureParams, seed: u64) -> CliResult<MeasureReport> {
    let rep = build_representation(&params.representation, "measure.representation")?;
    let xi = build_state(&params.state, rep.system_dim(), "measure.state")?;
    let b = build_observable(&params.observable, rep.system_dim(), "measure.observable")?;
    let outcomes = build_outcomes(&params.outcomes, rep.group(), "measure.outcomes")?;

    let mut worst: f64 = 0.0;
    let mut table = Csv::new(&COLUMNS);
    for d in &outcomes {
        let r = instrument(&rep, d, &xi, &b)?;
        let residual = verify_instrument_equals_coupled_expectation(&rep, d, &xi, &b)?;
        worst = worst.max(residual);
        table.push(vec![
            d.to_string(),
            num(r.probability),
            num(r.conditional_expectation.re),
            num(r.conditional_expectation.im),
            num(residual),
        ]);
    }

    let random = (params.random_checks > 0).then(|| -> CliResult<Csv> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut csv = Csv::new(&RANDOM_COLUMNS);
        for case in 0..params.random_checks {
            let xi = random_state(&mut rng, rep.system_space());
            let b = random_hermitian(&mut rng, rep.system_space());
            let d = Outcome::new(rep.group(), &random_subset(&mut rng, rep.group().size()))?;
            let residual = verify_instrument_equals_coupled_expectation(&rep, &d, &xi, &b)?;
            worst = worst.max(residual);
            csv.push(vec![case.to_string(), d.to_string(), num(residual)]);
        }
        Ok(csv)
    });
    let random = random.transpose()?;
    Ok(MeasureReport { table, random, worst_residual: worst })
}

pub fn check(report: &MeasureReport) -> CliResult<()> {
    ensure_within("instrument vs coupled expectation", report.worst_residual, COUPLED_TOL)
}
