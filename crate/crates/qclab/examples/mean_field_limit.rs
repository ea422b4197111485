//! Mean-field quantum flow against its classical limit.
//!
//! Starts a quantum state and a classical atom family on the same Gaussian
//! phase-space data, propagates both self-consistently under the cosine
//! interaction, and tracks the coupling energy between them. The verifier
//! checks the exponential stability inequality: the coupling energy at time t
//! stays below its initial value times e^{rate t}, with the rate fixed by the
//! interaction's derivative bounds — so the quantum flow tracks its classical
//! limit for as long as the envelope allows.
//!
//! Run with: cargo run --example mean_field_limit

use qclab::couplingflow::{verify_hartree_vlasov, HartreeVlasovLab};

fn main() -> qclab::Result<()> {
    // The pinned verification setup, shortened for a quick demonstration.
    let mut lab = HartreeVlasovLab::acceptance(0.25);
    lab.t_final = 0.8;
    lab.n_reports = 9;
    lab.dt_quantum = 0.004;
    lab.dt_classical = 0.002;
    lab.transport_stride = 2;

    let outcome = verify_hartree_vlasov(&lab)?;
    println!(
        "coupling energy at t=0: {:.6}  (floor hbar/2 = {:.6})",
        outcome.initial_energy,
        0.5 * lab.hbar
    );
    println!("envelope rate: {}", outcome.rate);
    println!("{:>8} {:>12} {:>12} {:>8}", "t", "energy", "envelope", "ratio");
    for row in &outcome.gronwall.rows {
        println!(
            "{:>8.3} {:>12.6} {:>12.6} {:>8.4}",
            row.t, row.lhs, row.rhs, row.ratio
        );
    }
    println!(
        "stability bound: {}  (worst ratio {:.4}, tolerance 1+{})",
        if outcome.gronwall.all_pass { "HOLDS" } else { "VIOLATED" },
        outcome.gronwall.worst_ratio,
        outcome.gronwall.tol
    );
    println!(
        "portrait-route bound: {}  (worst ratio {:.4})",
        if outcome.husimi.all_pass { "HOLDS" } else { "VIOLATED" },
        outcome.husimi.worst_ratio
    );
    println!(
        "classical energy drift {:.3e}, quantum trace drift {:.3e}",
        outcome.classical_energy_drift, outcome.quantum_trace_drift
    );
    Ok(())
}
