use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Fewest grid points per packet width accepted by [`WavePacket::prepare`].
pub const MIN_POINTS_PER_SIGMA: f64 = 8.0;

/// Thickness, in cells, of the frame whose mass is monitored.
pub const BOUNDARY_CELLS: usize = 2;

/// Uniform periodic grid. A line has a single `x` point at `x = 0`.
///
/// Storage index is `ix * nz + iz`, so each `z` row is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    nx: usize,
    nz: usize,
    dx: f64,
    dz: f64,
    x_min: f64,
    z_min: f64,
}

impl Geometry {
    /// `nz` points covering `[-extent/2, extent/2)`.
    pub fn line(nz: usize, extent: f64) -> Result<Self> {
        check_axis("z", nz, extent)?;
        Ok(Self { nx: 1, nz, dx: 1.0, dz: extent / nz as f64, x_min: 0.0, z_min: -extent / 2.0 })
    }

    pub fn plane(nx: usize, x_extent: f64, nz: usize, z_extent: f64) -> Result<Self> {
        check_axis("x", nx, x_extent)?;
        check_axis("z", nz, z_extent)?;
        Ok(Self {
            nx,
            nz,
            dx: x_extent / nx as f64,
            dz: z_extent / nz as f64,
            x_min: -x_extent / 2.0,
            z_min: -z_extent / 2.0,
        })
    }

    pub fn is_line(&self) -> bool {
        self.nx == 1
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        if self.is_line() {
            self.dz
        } else {
            self.dx * self.dz
        }
    }

    pub fn x(&self, ix: usize) -> f64 {
        if self.is_line() {
            0.0
        } else {
            self.x_min + ix as f64 * self.dx
        }
    }

    pub fn z(&self, iz: usize) -> f64 {
        self.z_min + iz as f64 * self.dz
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x(0), self.x(self.nx - 1))
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z(0), self.z(self.nz - 1))
    }

    pub fn z_points(&self) -> Vec<f64> {
        (0..self.nz).map(|i| self.z(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn kz(&self) -> Vec<f64> {
        wavenumbers(self.nz, self.dz)
    }

    pub fn kx(&self) -> Vec<f64> {
        if self.is_line() {
            vec![0.0]
        } else {
            wavenumbers(self.nx, self.dx)
        }
    }

    fn on_frame(&self, ix: usize, iz: usize) -> bool {
        let near = |i: usize, n: usize| i < BOUNDARY_CELLS || i + BOUNDARY_CELLS >= n;
        near(iz, self.nz) || (!self.is_line() && near(ix, self.nx))
    }
}

fn check_axis(name: &str, n: usize, extent: f64) -> Result<()> {
    if n < 2 * BOUNDARY_CELLS + 1 {
        return Err(Error::Precondition(format!(
            "{name} axis needs at least {} points, got {n}",
            2 * BOUNDARY_CELLS + 1
        )));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Error::Precondition(format!("{name} extent must be positive, got {extent}")));
    }
    Ok(())
}

fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * d);
    (0..n).map(|j| if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 } * dk).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Up,
    Down,
}

impl Branch {
    pub fn other(self) -> Self {
        match self {
            Branch::Up => Branch::Down,
            Branch::Down => Branch::Up,
        }
    }
}

/// Two-component wavefunction on a [`Geometry`], with `hbar = 1`.
#[derive(Debug, Clone)]
pub struct SpinorGrid {
    geometry: Geometry,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
    time: f64,
    mass: f64,
}

impl SpinorGrid {
    pub fn new(geometry: Geometry, up: Vec<Complex64>, down: Vec<Complex64>, mass: f64) -> Result<Self> {
        for comp in [&up, &down] {
            if comp.len() != geometry.len() {
                return Err(Error::DimensionMismatch { expected: geometry.len(), found: comp.len() });
            }
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Precondition(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { geometry, up, down, time: 0.0, mass })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn component(&self, b: Branch) -> &[Complex64] {
        match b {
            Branch::Up => &self.up,
            Branch::Down => &self.down,
        }
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.up, &mut self.down)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn advance_time(&mut self, dt: f64) {
        self.time += dt;
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn branch_norm(&self, b: Branch) -> f64 {
        self.component(b).iter().map(|z| z.norm_sqr()).sum::<f64>() * self.geometry.cell_volume()
    }

    /// `sum (|up|^2 + |down|^2) dV`.
    pub fn norm(&self) -> f64 {
        self.branch_norm(Branch::Up) + self.branch_norm(Branch::Down)
    }

    /// Mass in the outermost [`BOUNDARY_CELLS`] layers.
    pub fn boundary_mass(&self) -> f64 {
        let g = &self.geometry;
        let mut total = 0.0;
        for ix in 0..g.nx {
            for iz in 0..g.nz {
                if g.on_frame(ix, iz) {
                    let k = ix * g.nz + iz;
                    total += self.up[k].norm_sqr() + self.down[k].norm_sqr();
                }
            }
        }
        total * g.cell_volume()
    }

    /// `<z>` within a branch, `None` if the branch is empty.
    pub fn mean_z(&self, b: Branch) -> Option<f64> {
        let comp = self.component(b);
        let g = &self.geometry;
        let (mut w, mut m) = (0.0, 0.0);
        for ix in 0..g.nx {
            for iz in 0..g.nz {
                let p = comp[ix * g.nz + iz].norm_sqr();
                w += p;
                m += p * g.z(iz);
            }
        }
        (w > 0.0).then(|| m / w)
    }

    /// `|psi^(k_z)|^2` summed over `x`, in FFT order (see [`Geometry::kz`]).
    pub fn momentum_density_z(&self, b: Branch) -> Vec<f64> {
        let g = &self.geometry;
        let mut buf = self.component(b).to_vec();
        FftPlanner::new().plan_fft_forward(g.nz).process(&mut buf);
        let mut out = vec![0.0; g.nz];
        for row in buf.chunks(g.nz) {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z.norm_sqr();
            }
        }
        out
    }

    /// Spectral `<p_z>` within a branch, `None` if the branch is empty.
    pub fn mean_pz(&self, b: Branch) -> Option<f64> {
        let dens = self.momentum_density_z(b);
        let w: f64 = dens.iter().sum();
        (w > 0.0).then(|| dens.iter().zip(self.geometry.kz()).map(|(p, k)| p * k).sum::<f64>() / w)
    }
}

/// Gaussian packet `exp(-(z - z0)^2 / (4 sigma^2) + i p0 z)` times a spinor,
/// optionally with a Gaussian profile in `x` on a plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub z0: f64,
    pub sigma_z: f64,
    pub pz0: f64,
    pub x0: f64,
    pub sigma_x: f64,
    pub px0: f64,
    pub spinor: [Complex64; 2],
}

impl WavePacket {
    pub fn gaussian(z0: f64, sigma_z: f64, pz0: f64) -> Self {
        Self {
            z0,
            sigma_z,
            pz0,
            x0: 0.0,
            sigma_x: 1.0,
            px0: 0.0,
            spinor: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn with_spinor(mut self, up: Complex64, down: Complex64) -> Self {
        self.spinor = [up, down];
        self
    }

    pub fn with_branch(self, b: Branch) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match b {
            Branch::Up => self.with_spinor(one, zero),
            Branch::Down => self.with_spinor(zero, one),
        }
    }

    pub fn with_x(mut self, x0: f64, sigma_x: f64, px0: f64) -> Self {
        self.x0 = x0;
        self.sigma_x = sigma_x;
        self.px0 = px0;
        self
    }

    /// Sample on the grid and normalize so that the discrete norm is 1.
    pub fn prepare(&self, geometry: &Geometry, mass: f64) -> Result<SpinorGrid> {
        let s = self.spinor[0].norm_sqr() + self.spinor[1].norm_sqr();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(s.sqrt()));
        }
        let per_sigma = self.sigma_z / geometry.dz;
        if !(per_sigma >= MIN_POINTS_PER_SIGMA) {
            return Err(Error::Precondition(format!(
                "packet width resolved by {per_sigma:.2} points in z, need at least {MIN_POINTS_PER_SIGMA}"
            )));
        }
        if !geometry.is_line() {
            let per_sigma = self.sigma_x / geometry.dx;
            if !(per_sigma >= MIN_POINTS_PER_SIGMA) {
                return Err(Error::Precondition(format!(
                    "packet width resolved by {per_sigma:.2} points in x, need at least {MIN_POINTS_PER_SIGMA}"
                )));
            }
        }
        let profile = |u: f64, u0: f64, sigma: f64, p: f64| {
            Complex64::from_polar((-(u - u0).powi(2) / (4.0 * sigma * sigma)).exp(), p * u)
        };
        let mut base = Vec::with_capacity(geometry.len());
        for ix in 0..geometry.nx {
            let fx = if geometry.is_line() {
                Complex64::new(1.0, 0.0)
            } else {
                profile(geometry.x(ix), self.x0, self.sigma_x, self.px0)
            };
            for iz in 0..geometry.nz {
                base.push(fx * profile(geometry.z(iz), self.z0, self.sigma_z, self.pz0));
            }
        }
        let n = (base.iter().map(|z| z.norm_sqr()).sum::<f64>() * geometry.cell_volume()).sqrt();
        let up = base.iter().map(|z| z * self.spinor[0] / n).collect();
        let down = base.iter().map(|z| z * self.spinor[1] / n).collect();
        SpinorGrid::new(geometry.clone(), up, down, mass)
    }
}
