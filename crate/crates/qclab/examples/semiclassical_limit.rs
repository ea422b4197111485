//! Semiclassical scaling of the quantum-classical coupling energy.
//!
//! Runs the matched two-body comparison — N-body quantum flow against the
//! N-body classical flow on the same product data — for a sweep of hbar. The
//! per-body coupling energy starts on the uncertainty floor hbar/2 and stays
//! within its exponential envelope, so the whole display scales linearly in
//! hbar: quantum and classical predictions merge as hbar drops.
//!
//! Run with: cargo run --example semiclassical_limit

use qclab::couplingflow::{verify_schroedinger_liouville, ManyBodyLab};

fn main() -> qclab::Result<()> {
    println!(
        "{:>8} {:>14} {:>14} {:>12} {:>10}",
        "hbar", "energy(0)", "energy(t)/…", "ratio to", "envelope"
    );
    let mut finals = Vec::new();
    for &hbar in &[0.5, 0.25, 0.125] {
        // The pinned two-body comparison, shortened for a quick run.
        let mut lab = ManyBodyLab::pairwise_acceptance(hbar);
        lab.t_final = 0.5;
        lab.n_reports = 6;
        lab.dt_quantum = 0.004;
        lab.dt_classical = 0.002;
        lab.transport_stride = 2;

        let outcome = verify_schroedinger_liouville(&lab)?;
        let last = outcome.gronwall.rows.last().unwrap();
        println!(
            "{hbar:>8} {:>14.6} {:>14.6} {:>12.4} {:>10}",
            outcome.initial_energy,
            last.lhs,
            last.ratio,
            if outcome.gronwall.all_pass { "HOLDS" } else { "VIOLATED" }
        );
        finals.push((hbar, last.lhs));
    }
    // Log-log slope of the final coupling energy against hbar.
    let n = finals.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in &finals {
        let (lx, ly) = (h.ln(), e.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    println!("fitted scaling: final energy ~ hbar^{slope:.3}  (linear scaling = 1)");
    Ok(())
}
