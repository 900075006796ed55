//! Spin-1/2 wavepacket in an inhomogeneous magnetic field, with `hbar = 1`
//! and `H = p^2 / 2m + mu sigma . B`.
//!
//! The gradient `b1` splits the beam into two branches with momentum kicks
//! `-/+ mu b1 T`; the transverse gradient `b2` tilts the field off the
//! quantization axis and drives spin flips, whose size is judged by the
//! adiabaticity parameter `U_fi`.

mod analysis;
mod field;
mod grid;
mod propagator;

pub use analysis::{
    adiabaticity_parameter, coupling_factorization_check, fit_slope, momentum_kick, momentum_modes,
    spin_flip_probability, AdiabaticityReport, MomentumModes, MIN_BRANCH_NORM,
};
pub use field::FieldModel;
pub use grid::{Branch, Geometry, SpinorGrid, WavePacket, BOUNDARY_CELLS, MIN_POINTS_PER_SIGMA};
pub use propagator::{evolve, evolve_recorded, spin_step, Propagator, BOUNDARY_MASS_LIMIT, MAX_PHASE_PER_STEP};
