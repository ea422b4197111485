//! Positive quantization of phase-space measures.
//!
//! A probability measure mu = sum_k w_k delta_{z_k} quantizes to the density
//! operator
//!
//!   T[mu] = sum_k w_k |z_k><z_k|,
//!
//! a convex combination of coherent projectors: automatically positive, unit
//! trace. The calculus this quantization obeys (up to grid truncation):
//!
//!   moments:   trace(x_hat T[mu])   = int x  dmu,
//!              trace(x_hat^2 T[mu]) = int x^2 dmu + hbar/2,
//!              and the same with xi_hat (the hbar/2 is the packet width);
//!   identity:  the uniform phase-space average of coherent projectors,
//!              (2 pi hbar)^{-1} int |z><z| dz, acts as the identity on
//!              states whose phase-space content lies inside the
//!              quadrature window.
//!
//! The identity is checked in apply form ([`toeplitz_apply_uniform`]) so no
//! dense operator for the continuous average is ever assembled.

use super::coherent::{coherent_samples, coherent_state};
use super::{DensityOperator, SpaceGrid, WaveFunction};
use crate::error::Result;
use crate::linalg::add_scaled_outer;
use crate::phasespace::ParticleCloud;
use ndarray::Array2;
use num_complex::Complex64;

/// Quantize a weighted atom family into sum_k w_k |z_k><z_k|.
///
/// Every atom must satisfy the coherent-state fit conditions (box margin,
/// momentum Nyquist margin); the first violation aborts the assembly.
pub fn toeplitz_density(grid: &SpaceGrid, hbar: f64, cloud: &ParticleCloud) -> Result<DensityOperator> {
    let mut mat = Array2::zeros((grid.n, grid.n));
    let h = grid.h();
    for p in &cloud.particles {
        if p.w == 0.0 {
            continue;
        }
        let wf = coherent_state(grid, hbar, p.x, p.xi)?;
        add_scaled_outer(&mut mat, p.w * h, &wf.psi);
    }
    Ok(DensityOperator {
        grid: grid.clone(),
        n_body: 1,
        mat,
    })
}

/// Apply the uniform coherent average (2 pi hbar)^{-1} int |z><z| . dz to a
/// wavefunction, quadratured over all grid nodes in x and `n_xi` midpoint
/// nodes on [-xi_max, xi_max] in momentum.
///
/// The result approximates `f` itself whenever f's phase-space content lies
/// well inside the window: position support inside the box, momentum content
/// inside ~0.7 xi_max.
pub fn toeplitz_apply_uniform(
    grid: &SpaceGrid,
    hbar: f64,
    xi_max: f64,
    n_xi: usize,
    f: &WaveFunction,
) -> Vec<Complex64> {
    let n = grid.n;
    let h = grid.h();
    let dxi = 2.0 * xi_max / n_xi as f64;
    let cell = h * dxi / (2.0 * std::f64::consts::PI * hbar);
    let mut out = vec![Complex64::default(); n];
    for i in 0..n {
        let x0 = grid.node(i);
        for k in 0..n_xi {
            let xi0 = -xi_max + (k as f64 + 0.5) * dxi;
            let z = coherent_samples(grid, hbar, x0, xi0);
            // <z|f> on the grid, then out += <z|f> |z> (cell weight).
            let c: Complex64 = z.iter().zip(&f.psi).map(|(a, b)| a.conj() * b).sum();
            let c = c * h * cell;
            for (o, zv) in out.iter_mut().zip(&z) {
                *o += c * zv;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::{Particle, PhaseDensity, PhaseGrid};
    use approx::assert_abs_diff_eq;

    fn lab_grid() -> SpaceGrid {
        SpaceGrid::new(-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 128).unwrap()
    }

    fn lab_cloud() -> ParticleCloud {
        let pg = PhaseGrid::window(0.6, 0.4, 0.45, 0.45, 24, 24).unwrap();
        PhaseDensity::gaussian(pg, 0.6, 0.4, 0.1, 0.1)
            .unwrap()
            .to_particles()
            .unwrap()
    }

    #[test]
    fn quantized_measure_is_a_state() {
        let grid = lab_grid();
        let r = toeplitz_density(&grid, 0.5, &lab_cloud()).unwrap();
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-10);
        assert!(r.hermiticity_defect() < 1e-12);
        assert!(r.min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn first_moments_are_exact_second_moments_gain_half_hbar() {
        let grid = lab_grid();
        let hbar = 0.5;
        let cloud = lab_cloud();
        let r = toeplitz_density(&grid, hbar, &cloud).unwrap();
        let (mx, mxi, vx, vxi) = cloud.moments();
        assert_abs_diff_eq!(r.moment_x(1).unwrap(), mx, epsilon = 1e-8);
        assert_abs_diff_eq!(r.moment_xi(hbar, 1).unwrap(), mxi, epsilon = 1e-8);
        assert_abs_diff_eq!(r.moment_x(2).unwrap(), vx + mx * mx + 0.5 * hbar, epsilon = 1e-8);
        assert_abs_diff_eq!(
            r.moment_xi(hbar, 2).unwrap(),
            vxi + mxi * mxi + 0.5 * hbar,
            epsilon = 1e-8
        );
        // Packaged: m2(T[mu]) = m2(mu) + hbar/2.
        let m2_mu: f64 = cloud.second_moment();
        assert_abs_diff_eq!(r.second_moment(hbar).unwrap(), m2_mu + 0.5 * hbar, epsilon = 1e-8);
    }

    #[test]
    fn uniform_average_acts_as_identity() {
        let grid = lab_grid();
        let hbar = 0.5;
        // Test state: two displaced packets, momentum content within
        // 0.7 * xi_max for xi_max = 8.
        let a = coherent_state(&grid, hbar, 0.5, 1.2).unwrap();
        let b = coherent_state(&grid, hbar, -0.8, -2.0).unwrap();
        let mix: Vec<Complex64> = a
            .psi
            .iter()
            .zip(&b.psi)
            .map(|(x, y)| x + Complex64::new(0.0, 1.0) * y)
            .collect();
        let f = WaveFunction::from_samples(grid.clone(), mix).unwrap();
        let tf = toeplitz_apply_uniform(&grid, hbar, 8.0, 128, &f);
        let err2: f64 = tf
            .iter()
            .zip(&f.psi)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            * grid.h();
        assert!(
            err2.sqrt() < 1e-3,
            "identity defect {} exceeds 1e-3",
            err2.sqrt()
        );
    }

    #[test]
    fn atom_outside_the_box_margin_is_rejected() {
        let grid = lab_grid();
        let cloud = ParticleCloud::new(vec![Particle { x: 6.0, xi: 0.0, w: 1.0 }]).unwrap();
        assert!(toeplitz_density(&grid, 0.5, &cloud).is_err());
    }
}
