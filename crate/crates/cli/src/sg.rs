//! Stern-Gerlach runs: one simulation per initial spin branch.

use kt_measure::sterngerlach::{
    adiabaticity_parameter, evolve_recorded, fit_slope, momentum_kick, spin_flip_probability, Branch, FieldModel,
    Geometry, SpinorGrid, WavePacket,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::report::{num, Csv};
use crate::scenario::SgParams;

/// Allowed `|norm - 1|` at the end of a run.
pub const NORM_TOL: f64 = 1e-8;

pub const COLUMNS: [&str; 7] = ["t", "z_up", "z_down", "pz_up", "pz_down", "flip_prob", "norm"];

/// Parameters resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub field: FieldModel,
    pub geometry: Geometry,
    pub packet: WavePacket,
    pub mass: f64,
    pub duration: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub beam_speed: f64,
    pub z_scale: f64,
}

impl Setup {
    pub fn new(p: &SgParams) -> CliResult<Self> {
        let bad = |field: &str, e: kt_measure::Error| CliError::input(format!("sterngerlach.{field}: {e}"));
        let mut field = FieldModel::new(p.b0, p.b1, p.b2, p.mu, p.region_extent).map_err(|e| bad("b0", e))?;
        if let Some(v) = p.transit_speed {
            field = field.with_transit(v).map_err(|e| bad("transit_speed", e))?;
        }
        let duration = match (p.duration, field.transit_time()) {
            (Some(d), _) => d,
            (None, Some(t)) => t,
            (None, None) => {
                return Err(CliError::input("sterngerlach.duration: required when transit_speed is not set"));
            }
        };
        if !(duration.is_finite() && duration > 0.0) {
            return Err(CliError::input(format!("sterngerlach.duration: must be positive, got {duration}")));
        }
        if !(p.dt.is_finite() && p.dt > 0.0) {
            return Err(CliError::input(format!("sterngerlach.dt: must be positive, got {}", p.dt)));
        }
        if !(p.mass.is_finite() && p.mass > 0.0) {
            return Err(CliError::input(format!("sterngerlach.mass: must be positive, got {}", p.mass)));
        }
        let steps = ((duration / p.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;

        let g = &p.grid;
        let geometry = match (g.x_points, g.x_extent) {
            (None, None) => Geometry::line(g.points, g.extent),
            (Some(nx), Some(ex)) => Geometry::plane(nx, ex, g.points, g.extent),
            _ => return Err(CliError::input("sterngerlach.grid: x_points and x_extent go together")),
        }
        .map_err(|e| bad("grid", e))?;

        let k = &p.packet;
        let mut packet = WavePacket::gaussian(k.z0, k.sigma, k.p0);
        if !geometry.is_line() {
            let sx =
                k.sigma_x.ok_or_else(|| CliError::input("sterngerlach.packet.sigma_x: required on a plane grid"))?;
            packet = packet.with_x(k.x0, sx, k.px0);
        }
        let beam_speed = p.beam_speed.or(p.transit_speed).unwrap_or(1.0);
        let z_scale = p.z_scale.unwrap_or(k.sigma);
        Ok(Self {
            field,
            geometry,
            packet,
            mass: p.mass,
            duration,
            dt,
            steps,
            record_every: p.record_every,
            beam_speed,
            z_scale,
        })
    }

    pub fn run_branch(&self, branch: Branch, record: bool) -> CliResult<BranchRun> {
        let psi0 = self
            .packet
            .with_branch(branch)
            .prepare(&self.geometry, self.mass)
            .map_err(|e| CliError::input(format!("sterngerlach.packet: {e}")))?;
        let every = if record { self.record_every } else { 0 };
        let mut samples = Vec::new();
        let mut max_boundary: f64 = 0.0;
        let out = evolve_recorded(psi0.clone(), &self.field, self.dt, self.steps, every, |g| {
            max_boundary = max_boundary.max(g.boundary_mass());
            samples.push(Sample::of(g, branch));
        })?;
        let kick = momentum_kick(&out, &psi0, branch)?;
        Ok(BranchRun {
            branch,
            samples,
            kick,
            flip: spin_flip_probability(&out, branch),
            norm: out.norm(),
            max_boundary,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub z: f64,
    pub pz: f64,
    pub flip: f64,
    pub norm: f64,
}

impl Sample {
    fn of(g: &SpinorGrid, branch: Branch) -> Self {
        Self {
            t: g.time(),
            z: g.mean_z(branch).unwrap_or(f64::NAN),
            pz: g.mean_pz(branch).unwrap_or(f64::NAN),
            flip: spin_flip_probability(g, branch),
            norm: g.norm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchRun {
    pub branch: Branch,
    pub samples: Vec<Sample>,
    pub kick: f64,
    pub flip: f64,
    pub norm: f64,
    pub max_boundary: f64,
}

impl BranchRun {
    /// Least-squares `d<p_z>/dt` over the recorded samples.
    pub fn rate(&self) -> Option<f64> {
        let ts: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let ps: Vec<f64> = self.samples.iter().map(|s| s.pz).collect();
        fit_slope(&ts, &ps)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub duration: f64,
    pub dt: f64,
    pub steps: usize,
    /// `|mu b1| * duration`.
    pub expected_kick: f64,
    pub kick_up: f64,
    pub kick_down: f64,
    pub kick_error_up: f64,
    pub kick_error_down: f64,
    /// `-mu b1`, the force on the up branch.
    pub expected_rate_up: f64,
    pub rate_up: Option<f64>,
    pub rate_down: Option<f64>,
    pub flip_probability_up: f64,
    pub flip_probability_down: f64,
    pub u_fi: f64,
    pub larmor_omega: f64,
    /// `null` when `b2 = 0`.
    pub margin: Option<f64>,
    pub final_norm_up: f64,
    pub final_norm_down: f64,
    pub max_boundary_mass: f64,
}

pub struct SgReport {
    pub setup: Setup,
    pub up: BranchRun,
    pub down: BranchRun,
    pub summary: Summary,
}

impl SgReport {
    pub fn timeseries(&self) -> Csv {
        let mut csv = Csv::new(&COLUMNS);
        for (u, d) in self.up.samples.iter().zip(&self.down.samples) {
            csv.push(vec![num(u.t), num(u.z), num(d.z), num(u.pz), num(d.pz), num(u.flip), num(u.norm)]);
        }
        csv
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub fn run(p: &SgParams, record: bool) -> CliResult<SgReport> {
    let setup = Setup::new(p)?;
    let adiabatic = adiabaticity_parameter(&setup.field, setup.beam_speed, setup.z_scale)
        .map_err(|e| CliError::input(format!("sterngerlach: {e}")))?;
    let (up, down) = rayon::join(|| setup.run_branch(Branch::Up, record), || setup.run_branch(Branch::Down, record));
    let (up, down) = (up?, down?);
    let expected = (p.mu * p.b1).abs() * setup.duration;
    let summary = Summary {
        duration: setup.duration,
        dt: setup.dt,
        steps: setup.steps,
        expected_kick: expected,
        kick_up: up.kick,
        kick_down: down.kick,
        kick_error_up: (up.kick.abs() - expected).abs(),
        kick_error_down: (down.kick.abs() - expected).abs(),
        expected_rate_up: -p.mu * p.b1,
        rate_up: up.rate(),
        rate_down: down.rate(),
        flip_probability_up: up.flip,
        flip_probability_down: down.flip,
        u_fi: adiabatic.u_fi,
        larmor_omega: adiabatic.larmor_omega,
        margin: adiabatic.margin.is_finite().then_some(adiabatic.margin),
        final_norm_up: up.norm,
        final_norm_down: down.norm,
        max_boundary_mass: up.max_boundary.max(down.max_boundary),
    };
    Ok(SgReport { setup, up, down, summary })
}

pub fn check(report: &SgReport) -> CliResult<()> {
    for (name, n) in [("up", report.up.norm), ("down", report.down.norm)] {
        crate::error::ensure_within(&format!("norm drift ({name} run)"), (n - 1.0).abs(), NORM_TOL)?;
    }
    Ok(())
}
