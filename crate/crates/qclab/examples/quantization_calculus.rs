//! Positive quantization calculus on a periodic grid.
//!
//! Quantizes phase-space atom families into density operators and checks the
//! identities that make the calculus trustworthy: a uniform unit symbol acts
//! as the identity on low-momentum states, affine and quadratic symbols
//! reproduce their classical moments (squares pick up the smearing shift
//! hbar/2), and the operator trace pairing against a density equals the
//! phase-space integral of its smoothed portrait.
//!
//! Run with: cargo run --example quantization_calculus

use qclab::hilbert::{
    coherent_state, husimi_points, toeplitz_apply_uniform, toeplitz_density, DensityOperator,
    SpaceGrid,
};
use qclab::phasespace::ParticleCloud;
use std::f64::consts::PI;

fn main() -> qclab::Result<()> {
    let hbar = 0.25;
    let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 128)?;

    // Uniform symbol: quantize the constant 1 and apply it to a smooth state.
    let psi = coherent_state(&grid, hbar, 0.4, -0.3)?;
    let xi_max = grid.momentum_nyquist(hbar);
    let applied = toeplitz_apply_uniform(&grid, hbar, xi_max, 4 * grid.n, &psi);
    let defect: f64 = applied
        .iter()
        .zip(&psi.psi)
        .map(|(a, b)| (a - b).norm_sqr() * grid.h())
        .sum::<f64>()
        .sqrt();
    println!("uniform symbol vs identity:  |(Op[1] - I) psi| = {defect:.3e}");

    // Quadratic symbols: a tight lattice of atoms realizing a Gaussian blob.
    let (x0, xi0, sx, sxi) = (0.6, 0.2, 0.35, 0.3);
    let cloud = ParticleCloud::gauss_hermite(x0, xi0, sx, sxi, 3)?;
    let r = toeplitz_density(&grid, hbar, &cloud)?;
    let mean_x = r.moment_x(1)?;
    let mean_xi = r.moment_xi(hbar, 1)?;
    let raw_x2 = r.moment_x(2)?;
    let raw_xi2 = r.moment_xi(hbar, 2)?;
    println!("affine symbols:              <x>  = {mean_x:+.6}  (atom family {x0:+.6})");
    println!("                             <xi> = {mean_xi:+.6}  (atom family {xi0:+.6})");
    let shift = 0.5 * hbar;
    println!(
        "quadratic symbols:           <x^2>  = {raw_x2:.6}  (classical {:.6} + hbar/2 = {:.6})",
        x0 * x0 + sx * sx,
        x0 * x0 + sx * sx + shift
    );
    println!(
        "                             <xi^2> = {raw_xi2:.6}  (classical {:.6} + hbar/2 = {:.6})",
        xi0 * xi0 + sxi * sxi,
        xi0 * xi0 + sxi * sxi + shift
    );

    // Trace pairing: trace(Op[mu] R) equals 2 pi hbar times the atom-weighted
    // smoothed portrait of R.
    let probe = DensityOperator::from_pure(&coherent_state(&grid, hbar, -0.5, 0.45)?);
    let lhs = r.trace_product(&probe)?;
    let points: Vec<(f64, f64)> = cloud.particles.iter().map(|p| (p.x, p.xi)).collect();
    let portrait = husimi_points(&probe, hbar, &points)?;
    let rhs: f64 = 2.0
        * PI
        * hbar
        * cloud
            .particles
            .iter()
            .zip(&portrait)
            .map(|(p, h)| p.w * h)
            .sum::<f64>();
    println!("trace pairing:               trace(Op[mu] R) = {lhs:.8}");
    println!("                             integral route  = {rhs:.8}");
    println!("                             difference      = {:.3e}", (lhs - rhs).abs());
    Ok(())
}
