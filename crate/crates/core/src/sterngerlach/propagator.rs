use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::FieldModel;
use super::grid::{Geometry, SpinorGrid};
use crate::error::{Error, Result};

/// Largest `dt * |mu B|` accepted anywhere on the grid.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

/// Largest mass tolerated in the boundary frame.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

/// Per-cell spin step `[[a, b], [b, d]]`.
type SpinStep = [Complex64; 3];

/// Strang splitting for `H = p^2 / 2m + mu sigma . B(x, z, t)`:
/// half kinetic step in Fourier space, exact pointwise spin rotation with
/// the field taken at mid-step, half kinetic step.
pub struct Propagator {
    field: FieldModel,
    dt: f64,
    geometry: Geometry,
    half_kinetic: Vec<Complex64>,
    fz: Arc<dyn Fft<f64>>,
    iz: Arc<dyn Fft<f64>>,
    fx: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    static_spin: Option<Vec<SpinStep>>,
    column: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: &SpinorGrid, field: &FieldModel, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Precondition(format!("time step must be positive, got {dt}")));
        }
        let geometry = grid.geometry().clone();
        let phase = dt * field.max_coupling(geometry.x_range(), geometry.z_range());
        if phase > MAX_PHASE_PER_STEP {
            return Err(Error::Precondition(format!(
                "dt * max|mu B| = {phase:.4} exceeds {MAX_PHASE_PER_STEP}; reduce dt or the grid extent"
            )));
        }
        let (kx, kz) = (geometry.kx(), geometry.kz());
        let h = dt / 2.0 / (2.0 * grid.mass());
        let mut half_kinetic = Vec::with_capacity(geometry.len());
        for &a in &kx {
            for &b in &kz {
                half_kinetic.push(Complex64::from_polar(1.0, -(a * a + b * b) * h));
            }
        }
        let mut planner = FftPlanner::new();
        let fx = (!geometry.is_line())
            .then(|| (planner.plan_fft_forward(geometry.nx()), planner.plan_fft_inverse(geometry.nx())));
        let mut p = Self {
            field: *field,
            dt,
            half_kinetic,
            fz: planner.plan_fft_forward(geometry.nz()),
            iz: planner.plan_fft_inverse(geometry.nz()),
            fx,
            static_spin: None,
            column: vec![Complex64::new(0.0, 0.0); geometry.nx()],
            geometry,
        };
        if field.transit_speed.is_none() {
            p.static_spin = Some(p.spin_steps(0.0));
        }
        Ok(p)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn spin_steps(&self, t: f64) -> Vec<SpinStep> {
        let g = &self.geometry;
        let mut out = Vec::with_capacity(g.len());
        for ix in 0..g.nx() {
            for iz in 0..g.nz() {
                out.push(spin_step(&self.field, g.x(ix), g.z(iz), t, self.dt));
            }
        }
        out
    }

    fn kinetic(&mut self, comp: &mut [Complex64]) {
        self.fz.process(comp);
        if let Some((fx, _)) = &self.fx {
            transform_columns(comp, &self.geometry, fx.as_ref(), &mut self.column);
        }
        for (z, k) in comp.iter_mut().zip(&self.half_kinetic) {
            *z *= k;
        }
        if let Some((_, ix)) = &self.fx {
            transform_columns(comp, &self.geometry, ix.as_ref(), &mut self.column);
        }
        self.iz.process(comp);
        let scale = 1.0 / self.geometry.len() as f64;
        comp.iter_mut().for_each(|z| *z *= scale);
    }

    /// One Strang step.
    pub fn step(&mut self, grid: &mut SpinorGrid) {
        let t_mid = grid.time() + self.dt / 2.0;
        let (up, down) = grid.components_mut();
        self.kinetic(up);
        self.kinetic(down);
        let fresh;
        let steps = match &self.static_spin {
            Some(s) => s,
            None => {
                fresh = self.spin_steps(t_mid);
                &fresh
            }
        };
        for ((u, d), [a, b, c]) in up.iter_mut().zip(down.iter_mut()).zip(steps) {
            let (u0, d0) = (*u, *d);
            *u = a * u0 + b * d0;
            *d = b * u0 + c * d0;
        }
        self.kinetic(up);
        self.kinetic(down);
        grid.advance_time(self.dt);
    }
}

fn transform_columns(comp: &mut [Complex64], g: &Geometry, fft: &dyn Fft<f64>, column: &mut [Complex64]) {
    let (nx, nz) = (g.nx(), g.nz());
    for iz in 0..nz {
        for ix in 0..nx {
            column[ix] = comp[ix * nz + iz];
        }
        fft.process(column);
        for ix in 0..nx {
            comp[ix * nz + iz] = column[ix];
        }
    }
}

/// `exp(-i dt mu B . sigma)` at one point, as `[a, b, d]` with the matrix
/// `[[a, b], [b, d]]`.
pub fn spin_step(field: &FieldModel, x: f64, z: f64, t: f64, dt: f64) -> SpinStep {
    let (bx, bz) = field.at(x, z, t);
    let mag = bx.hypot(bz);
    if mag == 0.0 {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    }
    let theta = dt * field.mu * mag;
    let (s, c) = theta.sin_cos();
    let (nx, nz) = (bx / mag, bz / mag);
    [Complex64::new(c, -s * nz), Complex64::new(0.0, -s * nx), Complex64::new(c, s * nz)]
}

fn check_boundary(grid: &SpinorGrid) -> Result<()> {
    let m = grid.boundary_mass();
    if m > BOUNDARY_MASS_LIMIT {
        return Err(Error::Invariant(format!(
            "boundary mass {m:.3e} exceeds {BOUNDARY_MASS_LIMIT:.0e} at t = {:.6}; enlarge the grid",
            grid.time()
        )));
    }
    Ok(())
}

/// Advance `steps` steps of size `dt`.
pub fn evolve(grid: SpinorGrid, field: &FieldModel, dt: f64, steps: usize) -> Result<SpinorGrid> {
    evolve_recorded(grid, field, dt, steps, 0, |_| {})
}

/// As [`evolve`], calling `observe` on the initial grid, every `every` steps
/// (never if `every` is 0) and on the final grid. The boundary frame is
/// checked at each of those points.
pub fn evolve_recorded(
    mut grid: SpinorGrid,
    field: &FieldModel,
    dt: f64,
    steps: usize,
    every: usize,
    mut observe: impl FnMut(&SpinorGrid),
) -> Result<SpinorGrid> {
    let mut prop = Propagator::new(&grid, field, dt)?;
    check_boundary(&grid)?;
    observe(&grid);
    for n in 1..=steps {
        prop.step(&mut grid);
        let record = every > 0 && n % every == 0;
        if record || n == steps {
            check_boundary(&grid)?;
            observe(&grid);
        }
    }
    Ok(grid)
}
