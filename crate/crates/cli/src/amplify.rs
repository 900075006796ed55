//! The amplified instrument for a range of cascade lengths.

use kt_measure::amplification::{
    amplified_instrument, check_instrument_equality, intertwiner_chain_check, CascadeConfig,
};

use crate::error::{ensure_within, CliError, CliResult};
use crate::report::{num, Csv};
use crate::scenario::{build_observable, build_outcomes, build_representation, build_state, AmplifyParams};

pub const EQUALITY_TOL: f64 = 1e-12;
pub const CHAIN_TOL: f64 = 1e-12;

pub const COLUMNS: [&str; 5] = ["N", "outcome", "probability", "equality_residual", "chain_residual"];

pub struct AmplifyReport {
    pub table: Csv,
    pub worst_equality: f64,
    pub worst_chain: f64,
}

pub fn run(params: &AmplifyParams) -> CliResult<AmplifyReport> {
    let rep = build_representation(&params.representation, "amplify.representation")?;
    let xi = build_state(&params.state, rep.system_dim(), "amplify.state")?;
    let b = build_observable(&params.observable, rep.system_dim(), "amplify.observable")?;
    let outcomes = build_outcomes(&params.outcomes, rep.group(), "amplify.outcomes")?;
    if params.probes.is_empty() {
        return Err(CliError::input("amplify.probes: list at least one cascade length"));
    }

    let mut table = Csv::new(&COLUMNS);
    let (mut worst_equality, mut worst_chain) = (0.0f64, 0.0f64);
    for (k, &n) in params.probes.iter().enumerate() {
        let field = format!("amplify.probes[{k}]");
        let cfg = CascadeConfig::new(rep.clone(), n).map_err(|e| CliError::input(format!("{field}: {e}")))?;
        cfg.dim().map_err(|e| CliError::input(format!("{field}: {e}")))?;
        let chain = if params.chain {
            let mut worst = 0.0f64;
            for gamma in rep.group().characters() {
                let r = intertwiner_chain_check(rep.group(), &gamma, n)
                    .map_err(|e| CliError::input(format!("{field}: {e} (set chain = false to skip)")))?;
                worst = worst.max(r);
            }
            worst_chain = worst_chain.max(worst);
            num(worst)
        } else {
            String::new()
        };
        for d in &outcomes {
            let p = amplified_instrument(&cfg, d, &xi, &b)?.probability;
            let eq = check_instrument_equality(&cfg, d, &xi, &b)?;
            worst_equality = worst_equality.max(eq);
            table.push(vec![n.to_string(), d.to_string(), num(p), num(eq), chain.clone()]);
        }
    }
    Ok(AmplifyReport { table, worst_equality, worst_chain })
}

pub fn check(report: &AmplifyReport) -> CliResult<()> {
    ensure_within("instrument vs amplified instrument", report.worst_equality, EQUALITY_TOL)?;
    ensure_within("intertwiner chain", report.worst_chain, CHAIN_TOL)
}
