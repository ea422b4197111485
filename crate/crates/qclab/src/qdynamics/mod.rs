//! Quantum dynamics: self-consistent one-body propagation and linear N-body
//! propagation, both by Strang-split spectral stepping.
//!
//! One-body (self-consistent): i hbar dR/dt = [-hbar^2/2 d^2/dx^2 + V*rho, R]
//! with rho the position density of R itself. Each step applies a half phase
//! with the potential frozen from the current density (exact for that
//! sub-flow, since phases leave the density invariant), a full spectral
//! kinetic step, then a half phase with the potential re-frozen from the
//! drifted density — second order in dt for the nonlinear flow, and the
//! frozen potential at every time node is recorded so extra columns can be
//! transported through the identical discrete evolution.
//!
//! N-body (linear): i hbar dPsi/dt = [-hbar^2/2 sum_k d^2/dx_k^2
//! + (1/N) sum_{j<k} V(x_j - x_k)] Psi on the n^N lattice, with the pair
//! potential applied as a fixed diagonal phase.

mod hartree;
mod nbody;

pub use hartree::{
    effective_potential, hartree_run, hartree_run_columns, EffectivePotential, HartreeColumnsRun,
    HartreePath, HartreeRun,
};
pub use nbody::{
    nbody_energy, nbody_run, product_orbit_columns, product_orbit_family, NBodyRun, OrbitColumn,
};
pub(crate) use nbody::Propagator;

use crate::hilbert::SpaceGrid;
use num_complex::Complex64;

/// Spectral phases exp(-i hbar k^2 dt / 2) on the FFT frequency layout.
pub(crate) fn kinetic_phases(grid: &SpaceGrid, hbar: f64, dt: f64) -> Vec<Complex64> {
    crate::fftutil::wavenumbers(grid.n, grid.len_box())
        .into_iter()
        .map(|k| Complex64::from_polar(1.0, -0.5 * hbar * k * k * dt))
        .collect()
}
