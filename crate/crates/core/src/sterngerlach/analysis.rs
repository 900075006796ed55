use num_complex::Complex64;

use super::field::FieldModel;
use super::grid::{Branch, SpinorGrid};
use crate::error::{Error, Result};

/// Branches lighter than this have no meaningful momentum.
pub const MIN_BRANCH_NORM: f64 = 1e-6;

/// `<p_z>_final - <p_z>_initial` within one spin branch.
pub fn momentum_kick(final_grid: &SpinorGrid, initial_grid: &SpinorGrid, branch: Branch) -> Result<f64> {
    let mean = |g: &SpinorGrid, when: &str| {
        let n = g.branch_norm(branch);
        if n < MIN_BRANCH_NORM {
            return Err(Error::Precondition(format!("{branch:?} branch is empty in the {when} state (norm {n:.3e})")));
        }
        Ok(g.mean_pz(branch).expect("nonempty branch"))
    };
    Ok(mean(final_grid, "final")? - mean(initial_grid, "initial")?)
}

/// Weight of the spin component orthogonal to `initial_branch`.
pub fn spin_flip_probability(final_grid: &SpinorGrid, initial_branch: Branch) -> f64 {
    final_grid.branch_norm(initial_branch.other()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityReport {
    pub u_fi: f64,
    /// `omega = mu b0`.
    pub larmor_omega: f64,
    /// `(omega / v) b0 / b2`, the bound the transverse gradient must stay
    /// well below. Infinite when `b2 = 0`.
    pub margin: f64,
    pub flip_probability: Option<f64>,
    pub kick_up: Option<f64>,
    pub kick_down: Option<f64>,
}

/// `U_fi = v z_scale b2 / (omega region_extent b0)` with `omega = mu b0`.
pub fn adiabaticity_parameter(field: &FieldModel, v: f64, z_scale: f64) -> Result<AdiabaticityReport> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Precondition(format!("beam speed must be positive, got {v}")));
    }
    if !(field.b0 > 0.0) {
        return Err(Error::Precondition(format!("b0 must be positive, got {}", field.b0)));
    }
    let omega = field.mu * field.b0;
    if omega == 0.0 {
        return Err(Error::Precondition("Larmor frequency is zero".into()));
    }
    let u_fi = (v * z_scale * field.b2 / (omega * field.region_extent * field.b0)).abs();
    let margin = if field.b2 == 0.0 { f64::INFINITY } else { (omega / v * field.b0 / field.b2).abs() };
    Ok(AdiabaticityReport { u_fi, larmor_omega: omega, margin, flip_probability: None, kick_up: None, kick_down: None })
}

type M2 = [[Complex64; 2]; 2];

fn mul2(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor core.
fn expm2(a: &M2) -> M2 {
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let a: M2 = a.map(|row| row.map(|z| z * scale));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut result = [[one, zero], [zero, one]];
    let mut term = result;
    for k in 1..=20 {
        term = mul2(&term, &a).map(|row| row.map(|z| z / k as f64));
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul2(&result, &result);
    }
    result
}

/// Largest Frobenius distance over `zs` (on the axis `x = 0`) between
/// `exp(i dt mu B_z sigma_z)` and its factorization
/// `exp(i sigma_z mu b0 dt) diag(exp(i mu b1 z dt), exp(-i mu b1 z dt))`.
pub fn coupling_factorization_check(field: &FieldModel, dt: f64, zs: &[f64]) -> Result<f64> {
    if field.b2 != 0.0 {
        return Err(Error::Precondition("the factorization holds only for a diagonal coupling (b2 = 0)".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for &z in zs {
        let (_, bz) = field.at(0.0, z, 0.0);
        let w = Complex64::new(0.0, dt * field.mu * bz);
        let full = expm2(&[[w, zero], [zero, -w]]);
        let uniform = Complex64::from_polar(1.0, field.mu * field.b0 * dt);
        let shift = Complex64::from_polar(1.0, field.mu * field.b1 * z * dt);
        let factored = [[uniform * shift, zero], [zero, uniform.conj() * shift.conj()]];
        let r: f64 =
            full.iter().flatten().zip(factored.iter().flatten()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Peak positions and weights of the `p_z` distribution on either side of
/// zero, both spin components together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumModes {
    pub negative: f64,
    pub positive: f64,
    pub weight_negative: f64,
    pub weight_positive: f64,
}

pub fn momentum_modes(grid: &SpinorGrid) -> Option<MomentumModes> {
    let up = grid.momentum_density_z(Branch::Up);
    let down = grid.momentum_density_z(Branch::Down);
    let mut pairs: Vec<(f64, f64)> =
        grid.geometry().kz().into_iter().zip(up.iter().zip(&down).map(|(a, b)| a + b)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        return None;
    }
    let zero = pairs.iter().position(|p| p.0 == 0.0)?;
    let (neg, rest) = pairs.split_at(zero);
    let pos = &rest[1..];
    let centre = rest[0].1 / 2.0;
    let w_neg = (neg.iter().map(|p| p.1).sum::<f64>() + centre) / total;
    let w_pos = (pos.iter().map(|p| p.1).sum::<f64>() + centre) / total;
    Some(MomentumModes { negative: peak(neg)?, positive: peak(pos)?, weight_negative: w_neg, weight_positive: w_pos })
}

/// Vertex of the parabola through the log-density at the maximum and its
/// neighbours; exact for a Gaussian peak.
fn peak(side: &[(f64, f64)]) -> Option<f64> {
    let (i, _) = side.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    if i == 0 || i + 1 >= side.len() {
        return Some(side[i].0);
    }
    let (y0, y1, y2) = (side[i - 1].1.ln(), side[i].1.ln(), side[i + 1].1.ln());
    let h = side[i + 1].0 - side[i].0;
    let denom = y0 - 2.0 * y1 + y2;
    if !denom.is_finite() || denom >= 0.0 {
        return Some(side[i].0);
    }
    Some(side[i].0 + 0.5 * h * (y0 - y2) / denom)
}

/// Least-squares slope of `ys` against `ts`.
pub fn fit_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let n = ts.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mt = ts[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxy: f64 = ts[..n].iter().zip(&ys[..n]).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts[..n].iter().map(|t| (t - mt).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
