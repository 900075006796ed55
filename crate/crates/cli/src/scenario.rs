//! Scenario files: TOML with a `version`, a `kind`, and one table of
//! parameters named after the kind.

use std::path::{Path, PathBuf};

use kt_measure::group::FiniteAbelianGroup;
use kt_measure::hilbert::{DenseOperator, LegSpace, StateVector};
use kt_measure::measurement::{Outcome, SpectralRepresentation};
use kt_measure::C64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const SCENARIO_VERSION: u32 = 1;

/// Tolerance on `sum |c|^2 - 1` for state coefficients.
pub const STATE_NORM_TOL: f64 = 1e-9;

/// `[re, im]`.
pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Relations,
    Measure,
    Amplify,
    Sterngerlach,
    Sweep,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Relations => "relations",
            Kind::Measure => "measure",
            Kind::Amplify => "amplify",
            Kind::Sterngerlach => "sterngerlach",
            Kind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub kind: Kind,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub relations: Option<RelationsParams>,
    pub measure: Option<MeasureParams>,
    pub amplify: Option<AmplifyParams>,
    pub sterngerlach: Option<SgParams>,
    pub sweep: Option<SweepParams>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RepresentationSpec {
    /// `"sigma_z"`, `"z3_clock"` or `"trivial"`.
    Preset(String),
    Explicit(ExplicitRepresentation),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitRepresentation {
    pub group: Vec<usize>,
    pub system_dim: usize,
    pub projections: Vec<ProjectionSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSpec {
    /// Character exponents.
    pub character: Vec<usize>,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationsParams {
    pub groups: Vec<Vec<usize>>,
    #[serde(default)]
    pub representations: Vec<RepresentationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureParams {
    pub representation: RepresentationSpec,
    pub state: Vec<Complex>,
    /// Each entry is a set of character indices.
    pub outcomes: Vec<Vec<usize>>,
    /// Defaults to the identity.
    pub observable: Option<Matrix>,
    /// Extra random `(state, observable, outcome)` checks of the coupled
    /// picture, drawn from the seed.
    #[serde(default)]
    pub random_checks: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifyParams {
    pub representation: RepresentationSpec,
    pub state: Vec<Complex>,
    pub probes: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
    pub observable: Option<Matrix>,
    #[serde(default = "yes")]
    pub chain: bool,
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn default_record_every() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgParams {
    pub mu: f64,
    pub b0: f64,
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    #[serde(default = "one")]
    pub region_extent: f64,
    /// Switches on the transit envelope of the `b2` terms.
    pub transit_speed: Option<f64>,
    /// `v` in `U_fi`; defaults to the transit speed, else 1.
    pub beam_speed: Option<f64>,
    /// Transverse scale in `U_fi`; defaults to the packet width.
    pub z_scale: Option<f64>,
    /// Defaults to the transit time when a transit speed is set.
    pub duration: Option<f64>,
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "one")]
    pub mass: f64,
    pub grid: GridParams,
    pub packet: PacketParams,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub points: usize,
    pub extent: f64,
    pub x_points: Option<usize>,
    pub x_extent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketParams {
    pub sigma: f64,
    #[serde(default)]
    pub z0: f64,
    #[serde(default)]
    pub p0: f64,
    pub sigma_x: Option<f64>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub px0: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    /// A `[sterngerlach]`-shaped table.
    pub base: toml::Table,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// Dotted path into the base table, e.g. `b2` or `packet.sigma`.
    pub field: String,
    pub values: Vec<f64>,
}

/// Numeric fields that may be swept even when the base leaves them unset.
const OPTIONAL_NUMERIC: &[&str] = &[
    "b2",
    "region_extent",
    "transit_speed",
    "beam_speed",
    "z_scale",
    "duration",
    "record_every",
    "mass",
    "grid.x_points",
    "grid.x_extent",
    "packet.z0",
    "packet.p0",
    "packet.sigma_x",
    "packet.x0",
    "packet.px0",
];

impl Scenario {
    pub fn parse(text: &str) -> CliResult<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::input(format!("scenario: {e}")))?;
        if s.version != SCENARIO_VERSION {
            return Err(CliError::input(format!("version: expected {SCENARIO_VERSION}, found {}", s.version)));
        }
        let present = [
            (Kind::Relations, s.relations.is_some()),
            (Kind::Measure, s.measure.is_some()),
            (Kind::Amplify, s.amplify.is_some()),
            (Kind::Sterngerlach, s.sterngerlach.is_some()),
            (Kind::Sweep, s.sweep.is_some()),
        ];
        for (k, here) in present {
            if k == s.kind && !here {
                return Err(CliError::input(format!("{0}: missing [{0}] table for kind = \"{0}\"", k.name())));
            }
            if k != s.kind && here {
                return Err(CliError::input(format!(
                    "{}: table does not belong to kind = \"{}\"",
                    k.name(),
                    s.kind.name()
                )));
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub fn complex(c: Complex) -> C64 {
    C64::new(c[0], c[1])
}

pub fn build_representation(spec: &RepresentationSpec, field: &str) -> CliResult<SpectralRepresentation> {
    let err = |e: kt_measure::Error| CliError::input(format!("{field}: {e}"));
    match spec {
        RepresentationSpec::Preset(name) => match name.as_str() {
            "sigma_z" => Ok(SpectralRepresentation::sigma_z()),
            "z3_clock" => SpectralRepresentation::clock(3).map_err(err),
            "trivial" => {
                let g = FiniteAbelianGroup::cyclic(2).map_err(err)?;
                SpectralRepresentation::trivial(g, 2, 0).map_err(err)
            }
            other => Err(CliError::input(format!(
                "{field}: unknown preset \"{other}\" (expected sigma_z, z3_clock or trivial)"
            ))),
        },
        RepresentationSpec::Explicit(ex) => {
            let g = FiniteAbelianGroup::new(&ex.group).map_err(err)?;
            let mut assignments = Vec::new();
            for (k, p) in ex.projections.iter().enumerate() {
                let f = format!("{field}.projections[{k}]");
                let chi = g.character(&p.character).map_err(|e| CliError::input(format!("{f}.character: {e}")))?;
                let m = build_matrix(&p.matrix, ex.system_dim, &format!("{f}.matrix"))?;
                assignments.push((chi, m));
            }
            SpectralRepresentation::new(g, ex.system_dim, assignments).map_err(err)
        }
    }
}

pub fn build_matrix(m: &Matrix, dim: usize, field: &str) -> CliResult<DenseOperator> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(CliError::input(format!("{field}: expected a {dim}x{dim} matrix")));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("{field}: entries must be finite")));
    }
    Ok(DenseOperator::from_fn(LegSpace::single("sys", dim), |i, j| complex(m[i][j])))
}

/// Checks `sum |c|^2 = 1` within [`STATE_NORM_TOL`] and renormalizes.
pub fn build_state(c: &[Complex], dim: usize, field: &str) -> CliResult<StateVector> {
    if c.len() != dim {
        return Err(CliError::input(format!("{field}: expected {dim} coefficients, found {}", c.len())));
    }
    let s: f64 = c.iter().map(|z| complex(*z).norm_sqr()).sum();
    if !s.is_finite() || (s - 1.0).abs() > STATE_NORM_TOL {
        return Err(CliError::input(format!("{field}: squared coefficients sum to {s}, expected 1")));
    }
    let amps = c.iter().map(|z| complex(*z) / s.sqrt()).collect();
    StateVector::from_vec(LegSpace::single("sys", dim), amps).map_err(|e| CliError::input(format!("{field}: {e}")))
}

pub fn build_outcomes(sets: &[Vec<usize>], group: &FiniteAbelianGroup, field: &str) -> CliResult<Vec<Outcome>> {
    sets.iter()
        .enumerate()
        .map(|(k, set)| {
            Outcome::new(group, set)
                .map_err(|_| CliError::input(format!("{field}[{k}]: character indices must be below {}", group.size())))
        })
        .collect()
}

pub fn build_observable(m: &Option<Matrix>, dim: usize, field: &str) -> CliResult<DenseOperator> {
    match m {
        Some(m) => build_matrix(m, dim, field),
        None => Ok(DenseOperator::identity(LegSpace::single("sys", dim))),
    }
}

impl SgParams {
    pub fn from_table(t: &toml::Table, field: &str) -> CliResult<Self> {
        toml::Value::Table(t.clone()).try_into().map_err(|e| CliError::input(format!("{field}: {e}")))
    }
}

impl SweepParams {
    pub fn validate(&self) -> CliResult<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(CliError::input(format!("sweep.axes: expected one or two axes, found {}", self.axes.len())));
        }
        SgParams::from_table(&self.base, "sweep.base")?;
        for (k, axis) in self.axes.iter().enumerate() {
            let f = format!("sweep.axes[{k}]");
            if axis.values.is_empty() {
                return Err(CliError::input(format!("{f}.values: axis over `{}` is empty", axis.field)));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::input(format!("{f}.values: values must be finite")));
            }
            match lookup(&self.base, &axis.field) {
                Some(toml::Value::Integer(_)) | Some(toml::Value::Float(_)) => {}
                Some(_) => {
                    return Err(CliError::input(format!("{f}.field: `{}` is not a numeric field", axis.field)));
                }
                None if OPTIONAL_NUMERIC.contains(&axis.field.as_str()) => {}
                None => return Err(CliError::input(format!("{f}.field: unknown field `{}`", axis.field))),
            }
            // every point must still be a valid parameter set
            for &v in &axis.values {
                let t = with_value(&self.base, &axis.field, v).map_err(|e| CliError::input(format!("{f}: {e}")))?;
                SgParams::from_table(&t, &f)?;
            }
        }
        Ok(())
    }

    /// Grid points in row-major order (first axis outermost).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![vec![]];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn params_at(&self, point: &[f64]) -> CliResult<SgParams> {
        let mut t = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(point) {
            t = with_value(&t, &axis.field, v).map_err(CliError::input)?;
        }
        SgParams::from_table(&t, "sweep point")
    }
}

fn lookup<'a>(t: &'a toml::Table, path: &str) -> Option<&'a toml::Value> {
    let mut parts = path.split('.');
    let mut cur = t.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn with_value(t: &toml::Table, path: &str, v: f64) -> Result<toml::Table, String> {
    let mut out = t.clone();
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().ok_or_else(|| "empty field path".to_string())?;
    let mut cur = &mut out;
    for p in parts {
        cur = cur.get_mut(p).and_then(|x| x.as_table_mut()).ok_or_else(|| format!("`{path}` does not name a field"))?;
    }
    let integral = matches!(cur.get(last), Some(toml::Value::Integer(_)))
        || matches!(last, "points" | "x_points" | "record_every");
    let value = if integral {
        if v.fract() != 0.0 || v < 0.0 {
            return Err(format!("`{path}` takes whole numbers, got {v}"));
        }
        toml::Value::Integer(v as i64)
    } else {
        toml::Value::Float(v)
    };
    cur.insert(last.to_string(), value);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_and_kind_are_checked() {
        let err = Scenario::parse("version = 2\nkind = \"relations\"\n[relations]\ngroups = [[2]]\n").unwrap_err();
        assert!(err.to_string().contains("version"));
        let err = Scenario::parse("version = 1\nkind = \"measure\"\n[relations]\ngroups = [[2]]\n").unwrap_err();
        assert!(err.to_string().contains("measure"));
        let err = Scenario::parse("version = 1\nkind = \"relations\"\n[relations]\ngroups = [[2]]\ncolour = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn state_normalization_is_checked() {
        assert!(build_state(&[[0.6, 0.0], [0.8, 0.0]], 2, "s").is_ok());
        assert!(build_state(&[[0.6, 0.0], [0.8, 0.1]], 2, "s").is_err());
        assert!(build_state(&[[1.0, 0.0]], 2, "s").is_err());
    }

    #[test]
    fn presets() {
        for p in ["sigma_z", "z3_clock", "trivial"] {
            assert!(build_representation(&RepresentationSpec::Preset(p.into()), "r").is_ok());
        }
        assert!(build_representation(&RepresentationSpec::Preset("x".into()), "r").is_err());
    }

    #[test]
    fn dotted_paths() {
        let t: toml::Table = toml::from_str("a = 1.0\n[packet]\nsigma = 2.0\n[grid]\npoints = 64\n").unwrap();
        let u = with_value(&t, "packet.sigma", 3.0).unwrap();
        assert_eq!(lookup(&u, "packet.sigma").unwrap().as_float(), Some(3.0));
        let u = with_value(&t, "grid.points", 128.0).unwrap();
        assert_eq!(lookup(&u, "grid.points").unwrap().as_integer(), Some(128));
        assert!(with_value(&t, "grid.points", 1.5).is_err());
        assert!(with_value(&t, "nothing.here", 1.0).is_err());
    }
}
