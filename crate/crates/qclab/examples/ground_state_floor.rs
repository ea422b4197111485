//! Spectral floor of the coupling cost observable.
//!
//! The quadratic cost observable centered at any phase-space point has ground
//! energy hbar/2 in the continuum — the uncertainty floor that every coupling
//! energy inherits. This example diagonalizes the discretized observable for
//! a sweep of hbar and shows the ground eigenvalue landing on the floor while
//! the rest of the ladder climbs in steps of hbar, as for any harmonic well.
//!
//! Run with: cargo run --example ground_state_floor

use qclab::linalg::eigvalsh;
use qclab::qcdist::{cost_operator, energy_floor};
use qclab::hilbert::SpaceGrid;
use std::f64::consts::PI;

fn main() -> qclab::Result<()> {
    let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 128)?;
    let center = (0.3, -0.2);
    println!("cost observable centered at ({}, {})", center.0, center.1);
    println!("{:>8} {:>14} {:>14} {:>12} {:>34}", "hbar", "ground", "floor", "rel error", "next rungs");
    for &hbar in &[0.5, 0.25, 0.125] {
        let c = cost_operator(&grid, hbar, center.0, center.1);
        let evals = eigvalsh(&c)?;
        let floor = energy_floor(hbar);
        let rel = (evals[0] - floor).abs() / floor;
        println!(
            "{hbar:>8} {:>14.8} {:>14.8} {rel:>12.2e}   {:>9.6} {:>9.6} {:>9.6}",
            evals[0], floor, evals[1], evals[2], evals[3]
        );
    }
    println!("(rungs separated by ~hbar: the cost observable is a shifted harmonic well)");
    Ok(())
}
