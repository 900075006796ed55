//! Residual table for the W/V relations and for represented couplings.

use kt_measure::group::FiniteAbelianGroup;
use kt_measure::kt::{
    build_utilde_v, represented_intertwining_residual, represented_pentagonal_residual, utilde_v_by_conjugation,
    verify_intertwining, verify_pentagonal, KtOperatorPair, Orientation,
};

use crate::error::{ensure_within, CliError, CliResult};
use crate::report::{num, Csv};
use crate::scenario::{build_representation, RelationsParams};

pub const RELATION_TOL: f64 = 1e-12;
pub const FOURIER_TOL: f64 = 1e-10;

pub const COLUMNS: [&str; 3] = ["subject", "relation", "residual"];

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub subject: String,
    pub relation: &'static str,
    pub value: f64,
    pub tol: f64,
}

pub fn group_residuals(orders: &[usize]) -> CliResult<Vec<Residual>> {
    let g = FiniteAbelianGroup::new(orders)?;
    let pair = KtOperatorPair::new(g.clone())?;
    let subject = g.to_string();
    let (wu, vu) = pair.unitarity_residuals();
    let rows = [
        ("w_unitarity", wu, RELATION_TOL),
        ("v_unitarity", vu, RELATION_TOL),
        ("w_pentagonal", verify_pentagonal(&pair.w, Orientation::WType)?, RELATION_TOL),
        ("v_pentagonal", verify_pentagonal(&pair.v, Orientation::VType)?, RELATION_TOL),
        ("w_intertwining", verify_intertwining(&pair.w, &g, Orientation::WType)?, RELATION_TOL),
        ("v_intertwining", verify_intertwining(&pair.v, &g, Orientation::VType)?, RELATION_TOL),
        ("fourier_conjugation", pair.fourier_residual()?, FOURIER_TOL),
    ];
    Ok(rows
        .into_iter()
        .map(|(relation, value, tol)| Residual { subject: subject.clone(), relation, value, tol })
        .collect())
}

pub fn run(params: &RelationsParams) -> CliResult<(Csv, Vec<Residual>)> {
    if params.groups.is_empty() && params.representations.is_empty() {
        return Err(CliError::input("relations.groups: nothing to check"));
    }
    let mut all = Vec::new();
    for (k, orders) in params.groups.iter().enumerate() {
        all.extend(group_residuals(orders).map_err(|e| CliError::input(format!("relations.groups[{k}]: {e}")))?);
    }
    for (k, spec) in params.representations.iter().enumerate() {
        let rep = build_representation(spec, &format!("relations.representations[{k}]"))?;
        let subject = format!("rep{k}:{}", rep.group());
        let conj = build_utilde_v(&rep)?.distance(&utilde_v_by_conjugation(&rep)?)?;
        for (relation, value) in [
            ("homomorphism", rep.homomorphism_residual()),
            ("represented_pentagonal", represented_pentagonal_residual(&rep)?),
            ("represented_intertwining", represented_intertwining_residual(&rep)?),
            ("coupling_by_conjugation", conj),
        ] {
            all.push(Residual { subject: subject.clone(), relation, value, tol: RELATION_TOL });
        }
    }
    let mut csv = Csv::new(&COLUMNS);
    for r in &all {
        csv.push(vec![r.subject.clone(), r.relation.to_string(), num(r.value)]);
    }
    Ok((csv, all))
}

/// First residual above its tolerance, as an invariant error.
pub fn check(residuals: &[Residual]) -> CliResult<()> {
    for r in residuals {
        ensure_within(&format!("{} {}", r.subject, r.relation), r.value, r.tol)?;
    }
    Ok(())
}
