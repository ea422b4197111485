//! Classical mean-field and N-body phase-space flows.
//!
//! Propagates a weighted particle family under the self-consistent force of
//! a cosine interaction (the mean-field flow) and a two-body ensemble under
//! the pairwise flow, reporting the invariants a symplectic integrator must
//! hold: energy drift at the 1e-9 scale and the a-priori exponential envelope
//! on the second moment.
//!
//! Run with: cargo run --example classical_flows

use qclab::phasespace::{vlasov_run, ClassicalEnsembleN, ParticleCloud, Potential};

fn main() -> qclab::Result<()> {
    let pot = Potential::Cosine;
    let cloud = ParticleCloud::gauss_hermite(0.6, 0.4, 0.1, 0.1, 3)?;

    // Mean-field flow of one distribution against itself.
    let run = vlasov_run(&cloud, &pot, None, 0.005, 400)?;
    let t_final: f64 = 0.005 * 400.0;
    println!("mean-field flow to t = {t_final}:");
    println!("  energy drift (relative, per unit time) = {:.3e}", run.energy_drift());
    let m2_0 = run.second_moment[0];
    let m2_t = *run.second_moment.last().unwrap();
    let envelope = t_final.exp() * (m2_0 + pot.sup_v());
    println!("  second moment {m2_0:.6} -> {m2_t:.6}  (envelope e^t (m2(0) + |V|_inf) = {envelope:.6})");

    // Two-body ensemble under the pairwise flow.
    let ens = ClassicalEnsembleN::product(&cloud, 2)?;
    let mut state = ens;
    let e0 = state.energy(&pot);
    for _ in 0..400 {
        state.step(&pot, 0.005);
    }
    let e1 = state.energy(&pot);
    println!("two-body pairwise flow to t = {t_final}:");
    println!("  energy {e0:.8} -> {e1:.8}  (drift {:.3e})", (e1 - e0).abs() / (1.0 + e0.abs()));
    println!("  per-body second moment = {:.6}", state.second_moment_per_body());
    Ok(())
}
