//! Phase-space portraits of a density operator.
//!
//! Builds the quasi-probability portrait of a two-packet superposition — the
//! one that oscillates negative between the packets — then smears it with the
//! minimal Gaussian. The smeared portrait is nonnegative and integrates to
//! one, and it agrees with the direct coherent-overlap route everywhere. The
//! smeared table is written to a CSV alongside the run.
//!
//! Run with: cargo run --example phase_space_portraits

use qclab::hilbert::{coherent_state, husimi_table, wigner_table, DensityOperator, SpaceGrid};
use std::f64::consts::PI;

fn main() -> qclab::Result<()> {
    let hbar = 0.25;
    let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 128)?;

    // A coherent superposition (not a mixture): its portrait carries
    // interference fringes between the packets.
    let left = coherent_state(&grid, hbar, -0.9, 0.0)?;
    let right = coherent_state(&grid, hbar, 0.9, 0.0)?;
    let cat = qclab::hilbert::WaveFunction::from_samples(
        grid.clone(),
        left.psi
            .iter()
            .zip(&right.psi)
            .map(|(a, b)| a + b)
            .collect(),
    )?;
    let r = DensityOperator::from_pure(&cat);

    let raw = wigner_table(&r, hbar)?;
    println!("raw portrait:       mass = {:.12}", raw.mass());
    println!("                    most negative value = {:.6}", raw.min_value());

    let smoothed = raw.heat_smoothed(hbar);
    println!("smoothed portrait:  mass = {:.12}", smoothed.mass());
    println!("                    most negative value = {:.3e}", smoothed.min_value());

    let direct = husimi_table(&r, hbar)?;
    println!("overlap route:      mass = {:.12}", direct.mass());
    println!(
        "route agreement:    L1 distance = {:.3e}",
        direct.l1_distance(&smoothed)?
    );

    // Second moments (1/2)int (x^2 + xi^2): smearing adds exactly hbar/2.
    let m2_raw = raw.second_moment();
    let m2_smooth = smoothed.second_moment();
    println!("second moment:      raw {m2_raw:.6}  smoothed {m2_smooth:.6}  shift {:.6} (hbar = {hbar})", m2_smooth - m2_raw);

    let out = std::env::temp_dir().join("qclab_portrait.csv");
    let mut text = String::from("x,xi,value\n");
    for i in 0..smoothed.grid.n {
        for k in 0..smoothed.n_xi() {
            text.push_str(&format!(
                "{:.6},{:.6},{:.9e}\n",
                smoothed.grid.node(i),
                smoothed.xi_node(k),
                smoothed.value(i, k)
            ));
        }
    }
    std::fs::write(&out, text)?;
    println!("smoothed table written to {}", out.display());
    Ok(())
}
