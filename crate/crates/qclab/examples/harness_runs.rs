//! Config-driven runs, axis sweeps, and combined reports.
//!
//! Every experiment in the laboratory is a key=value config executed into a
//! content-hashed run directory full of CSV artifacts. This example resolves
//! a shipped preset, executes it, sweeps it along its hbar axis to fit the
//! convergence slope of the spectral floor, and combines everything into one
//! report — the same machinery behind the `qclab` command-line tool.
//!
//! Run with: cargo run --example harness_runs

use qclab::harness::{execute, preset, preset_names, report, sweep};

fn main() -> qclab::Result<()> {
    let out_root = std::env::temp_dir().join("qclab_harness_example");
    if out_root.exists() {
        std::fs::remove_dir_all(&out_root)?;
    }

    println!("shipped presets: {}", preset_names().join(", "));

    // One run: the spectral-floor experiment at a reduced resolution.
    let mut cfg = preset("cost_floor")?;
    cfg.set("domain", "n_x", "64");
    cfg.set("run", "label", "floor-demo");
    let outcome = execute(&cfg, &out_root)?;
    println!(
        "run {} -> {} ({} checks, {})",
        outcome.label,
        outcome.dir.display(),
        outcome.rows.len(),
        if outcome.pass { "PASS" } else { "FAIL" }
    );
    println!("config content hash: {}", outcome.hash);

    // Sweep: one run per hbar, with the headline metric fitted against the
    // axis on log-log scales. The ground eigenvalue is hbar/2, so the fitted
    // slope comes out at 1.
    let swept = sweep(&cfg, "physics.hbar_list=0.5,0.25,0.125", &out_root)?;
    for (value, headline) in swept.axis_values.iter().zip(&swept.headline) {
        println!("  hbar {value:>6}: ground eigenvalue {:.8}", headline.unwrap_or(f64::NAN));
    }
    if let Some(slope) = swept.slope {
        println!("  fitted log-log slope: {slope:.4}");
    }
    println!("  combined table: {}", swept.csv_path.display());

    // Report: combine every run directory under the root.
    let (text, all_pass) = report(&out_root)?;
    print!("{text}");
    println!("overall: {}", if all_pass { "ALL PASS" } else { "FAILURES" });
    Ok(())
}
