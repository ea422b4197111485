//! Experiment runner: config -> run directory full of artifacts.
//!
//! `execute` resolves the experiment kind, runs it, and writes every
//! artifact through an [`ArtifactSink`] into a directory named
//! `<label>-<hash12>` under the output root, so identical configs land in
//! identical directories with byte-identical contents. `sweep` repeats a
//! config along one axis and fits a log-log slope to each kind's headline
//! metric. `report` combines the summaries under a directory tree into one
//! table with a pass/fail banner.

use super::artifacts::{
    bound_report_csv, bound_report_dat, checkpoints_csv, phase_density_csv, plan_csv, series_csv,
    summary_csv, summary_text, ArtifactSink,
};
use super::checks::{self, Metrics};
use super::config::Config;
use super::CheckRow;
use crate::couplingflow::{
    verify_hartree_vlasov, verify_schroedinger_liouville, verify_schroedinger_vlasov,
    HartreeVlasovLab, HartreeVlasovOutcome, ManyBodyLab, ManyBodyOutcome,
};
use crate::error::{QcError, Result};
use crate::hilbert::{save_operator, write_eigenvalue_csv};
use crate::phasespace::{PhaseDensity, PhaseGrid, Potential};
use crate::qcdist::WINDOW_DROP_BUDGET;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Result of one executed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: String,
    pub label: String,
    pub hash: String,
    pub dir: PathBuf,
    pub rows: Vec<CheckRow>,
    pub metrics: Metrics,
    pub pass: bool,
}

/// Execute the experiment described by `cfg`, writing artifacts under
/// `out_root`.
pub fn execute(cfg: &Config, out_root: &Path) -> Result<RunOutcome> {
    let kind = cfg.kind()?.to_string();
    let label = cfg.label()?;
    let hash = cfg.content_hash();
    let dir = out_root.join(format!("{label}-{}", cfg.short_hash()));
    let mut sink = ArtifactSink::create(&dir)?;
    sink.write("config.cfg", cfg.canonical_text().as_bytes())?;

    let (rows, metrics) = match kind.as_str() {
        "toeplitz" => run_toeplitz(cfg)?,
        "husimi_health" => run_husimi_health(cfg, &mut sink)?,
        "cost_floor" => run_cost_floor(cfg, &mut sink)?,
        "sandwich" => run_sandwich(cfg, &mut sink)?,
        "interval" => run_interval(cfg, &mut sink)?,
        "classical_health" => run_classical_health(cfg, &mut sink)?,
        "quantum_health" => run_quantum_health(cfg, &mut sink)?,
        "hartree_vlasov" => run_hartree_vlasov(cfg, &mut sink)?,
        "pairwise" => run_pairwise(cfg, &mut sink)?,
        "mean_field" => run_mean_field(cfg, &mut sink)?,
        "nccs" => run_nccs(cfg)?,
        other => {
            return Err(QcError::InvalidConfig(format!(
                "unknown experiment kind {other:?}"
            )))
        }
    };

    let pass = rows.iter().all(|r| r.pass);
    sink.write("summary.csv", summary_csv(&kind, &label, &rows).as_bytes())?;
    sink.write("summary.txt", summary_text(&kind, &label, &rows).as_bytes())?;
    sink.finish()?;
    Ok(RunOutcome {
        kind,
        label,
        hash,
        dir,
        rows,
        metrics,
        pass,
    })
}

fn potential_from(cfg: &Config) -> Result<Potential> {
    match cfg.get("physics", "potential").unwrap_or("cosine") {
        "zero" => Ok(Potential::Zero),
        "cosine" => Ok(Potential::Cosine),
        "gaussian_bump" => Ok(Potential::GaussianBump {
            amplitude: cfg.get_f64("physics", "bump_amplitude", 0.5)?,
            width: cfg.get_f64("physics", "bump_width", 0.8)?,
        }),
        other => Err(QcError::InvalidConfig(format!(
            "physics.potential {other:?} is not one of zero|cosine|gaussian_bump"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Non-dynamical kinds
// ---------------------------------------------------------------------------

fn run_toeplitz(cfg: &Config) -> Result<(Vec<CheckRow>, Metrics)> {
    let n_x = cfg.get_usize("domain", "n_x", 128)?;
    let hbar = cfg.get_f64("physics", "hbar", 0.25)?;
    let seed = cfg.get_u64("run", "seed", 7)?;
    let rep = checks::toeplitz_calculus(n_x, hbar, seed)?;
    Ok((rep.rows, rep.metrics))
}

fn run_husimi_health(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let n_x = cfg.get_usize("domain", "n_x", 64)?;
    let hbar = cfg.get_f64("physics", "hbar", 0.25)?;
    let count = cfg.get_usize("run", "instances", 20)?;
    let seed = cfg.get_u64("run", "seed", 11)?;
    let rep = checks::husimi_health(n_x, hbar, count, seed)?;
    save_operator(&rep.sample_operator, &sink.dir().join("operator.qop"))?;
    sink.record_file("operator.qop")?;
    write_eigenvalue_csv(&rep.sample_operator, &sink.dir().join("operator_eigs.csv"))?;
    sink.record_file("operator_eigs.csv")?;
    sink.write("phase_density.csv", phase_density_csv(&rep.sample_table).as_bytes())?;
    Ok((rep.rows, rep.metrics))
}

fn run_cost_floor(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let n_x = cfg.get_usize("domain", "n_x", 128)?;
    let hbars = cfg.get_f64_list("physics", "hbar_list", &[0.5, 0.25, 0.125])?;
    let x0 = cfg.get_f64("initial", "center_x", 0.3)?;
    let xi0 = cfg.get_f64("initial", "center_xi", -0.2)?;
    let rel_tol = cfg.get_f64("verify", "tol", 0.02)?;
    let mut rep = checks::cost_floor(n_x, &hbars, (x0, xi0), rel_tol)?;
    let mut table = String::from("hbar,index,eigenvalue\n");
    for (hbar, eigs) in &rep.spectra {
        for (i, e) in eigs.iter().enumerate() {
            let _ = writeln!(table, "{hbar},{i},{e}");
        }
    }
    sink.write("floor_spectra.csv", table.as_bytes())?;
    rep.metrics
        .insert("ground_first".into(), rep.spectra[0].1[0]);
    Ok((rep.rows, rep.metrics))
}

fn run_sandwich(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let instances = cfg.get_usize("run", "instances", 10)?;
    let seed = cfg.get_u64("run", "seed", 23)?;
    let gap_tol = cfg.get_f64("verify", "tol", 0.10)?;
    let rep = checks::coupling_sandwich(instances, seed, gap_tol)?;
    let mut table = String::from("instance,floor,lower,exact,upper\n");
    for (i, (f, l, e, u)) in rep.table.iter().enumerate() {
        let _ = writeln!(table, "{i},{f},{l},{e},{u}");
    }
    sink.write("sandwich.csv", table.as_bytes())?;
    if let Some((plan, source, target)) = &rep.sample_plan {
        sink.write("plan.csv", plan_csv(plan, source, target).as_bytes())?;
    }
    Ok((rep.rows, rep.metrics))
}

fn run_interval(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let instances = cfg.get_usize("run", "instances", 5)?;
    let seed = cfg.get_u64("run", "seed", 29)?;
    let rep = checks::coupling_interval(instances, seed)?;
    let mut table = String::from("instance,lower,exact,upper\n");
    for (i, (l, e, u)) in rep.table.iter().enumerate() {
        let _ = writeln!(table, "{i},{l},{e},{u}");
    }
    sink.write("interval.csv", table.as_bytes())?;
    Ok((rep.rows, rep.metrics))
}

fn run_classical_health(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let pot = potential_from(cfg)?;
    let dt = cfg.get_f64("time", "dt_classical", 0.005)?;
    let t_final = cfg.get_f64("time", "t_final", 2.0)?;
    let n_body = cfg.get_usize("physics", "n_body", 2)?;
    let rep = checks::classical_health(&pot, dt, t_final, n_body)?;
    sink.write(
        "checkpoints_mean_field.csv",
        checkpoints_csv(&["t", "energy", "m2"], &rep.vlasov_checkpoints).as_bytes(),
    )?;
    sink.write(
        "checkpoints_ensemble.csv",
        checkpoints_csv(&["t", "energy", "m2_per_body"], &rep.ensemble_checkpoints).as_bytes(),
    )?;
    // Deposit the transported cloud for a phase-density portrait artifact.
    let (x0, x1, xi0, xi1) = rep.final_cloud.bounding_box();
    let pad = 0.1;
    let grid = PhaseGrid::new(x0 - pad, x1 + pad, xi0 - pad, xi1 + pad, 48, 48)?;
    let (density, _) = PhaseDensity::deposit(grid, &rep.final_cloud)?;
    let mut table = String::from("x,xi,value\n");
    for i in 0..density.grid.nx {
        for j in 0..density.grid.nxi {
            let _ = writeln!(
                table,
                "{},{},{}",
                density.grid.x_center(i),
                density.grid.xi_center(j),
                density.weight(i, j) / density.grid.cell_volume()
            );
        }
    }
    sink.write("phase_density.csv", table.as_bytes())?;
    Ok((rep.rows, rep.metrics))
}

fn run_quantum_health(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let n_x = cfg.get_usize("domain", "n_x", 128)?;
    let hbar = cfg.get_f64("physics", "hbar", 0.25)?;
    let pot = potential_from(cfg)?;
    let dt = cfg.get_f64("time", "dt_quantum", 0.005)?;
    let t_final = cfg.get_f64("time", "t_final", 1.0)?;
    let rep = checks::quantum_health(n_x, hbar, &pot, dt, t_final)?;
    sink.write(
        "checkpoints.csv",
        checkpoints_csv(&["t", "trace", "purity", "energy", "m2"], &rep.checkpoints).as_bytes(),
    )?;
    Ok((rep.rows, rep.metrics))
}

fn run_nccs(cfg: &Config) -> Result<(Vec<CheckRow>, Metrics)> {
    let instances = cfg.get_usize("run", "instances", 1000)?;
    let dim = cfg.get_usize("domain", "n_x", 8)?;
    let seed = cfg.get_u64("run", "seed", 3)?;
    let rep = checks::nccs_guard(instances, dim, seed)?;
    Ok((rep.rows, rep.metrics))
}

// ---------------------------------------------------------------------------
// Limit-verification kinds
// ---------------------------------------------------------------------------

fn hv_lab(cfg: &Config) -> Result<HartreeVlasovLab> {
    let hbar = cfg.get_f64("physics", "hbar", 0.25)?;
    let mut lab = HartreeVlasovLab::acceptance(hbar);
    lab.pot = potential_from(cfg)?;
    lab.x_min = cfg.get_f64("domain", "x_min", lab.x_min)?;
    lab.x_max = cfg.get_f64("domain", "x_max", lab.x_max)?;
    lab.n_x = cfg.get_usize("domain", "n_x", lab.n_x)?;
    lab.center = (
        cfg.get_f64("initial", "center_x", lab.center.0)?,
        cfg.get_f64("initial", "center_xi", lab.center.1)?,
    );
    lab.sigma = (
        cfg.get_f64("initial", "sigma_x", lab.sigma.0)?,
        cfg.get_f64("initial", "sigma_xi", lab.sigma.1)?,
    );
    lab.atoms_per_axis = cfg.get_usize("initial", "atoms_per_axis", lab.atoms_per_axis)?;
    lab.lattice_sigmas = cfg.get_f64("initial", "lattice_sigmas", lab.lattice_sigmas)?;
    lab.dt_quantum = cfg.get_f64("time", "dt_quantum", lab.dt_quantum)?;
    lab.dt_classical = cfg.get_f64("time", "dt_classical", lab.dt_classical)?;
    lab.t_final = cfg.get_f64("time", "t_final", lab.t_final)?;
    lab.n_reports = cfg.get_usize("time", "n_reports", lab.n_reports)?;
    lab.transport_stride = cfg.get_usize("verify", "transport_stride", lab.transport_stride)?;
    lab.tol = cfg.get_f64("verify", "tol", lab.tol)?;
    lab.max_refinements = cfg.get_u32("verify", "max_refinements", lab.max_refinements)?;
    Ok(lab)
}

fn manybody_lab(cfg: &Config, pairwise: bool) -> Result<ManyBodyLab> {
    let n_body = cfg.get_usize("physics", "n_body", 2)?;
    let mut lab = if pairwise {
        let hbar = cfg.get_f64("physics", "hbar", 0.5)?;
        let mut lab = ManyBodyLab::pairwise_acceptance(hbar);
        lab.n_body = n_body;
        lab
    } else {
        let mut lab = ManyBodyLab::mean_field_acceptance(n_body);
        lab.hbar = cfg.get_f64("physics", "hbar", lab.hbar)?;
        lab
    };
    lab.pot = potential_from(cfg)?;
    lab.x_min = cfg.get_f64("domain", "x_min", lab.x_min)?;
    lab.x_max = cfg.get_f64("domain", "x_max", lab.x_max)?;
    lab.n_x = cfg.get_usize("domain", "n_x", lab.n_x)?;
    lab.center = (
        cfg.get_f64("initial", "center_x", lab.center.0)?,
        cfg.get_f64("initial", "center_xi", lab.center.1)?,
    );
    lab.sigma = (
        cfg.get_f64("initial", "sigma_x", lab.sigma.0)?,
        cfg.get_f64("initial", "sigma_xi", lab.sigma.1)?,
    );
    lab.hermite_nodes = cfg.get_usize("initial", "hermite_nodes", lab.hermite_nodes)?;
    lab.dt_quantum = cfg.get_f64("time", "dt_quantum", lab.dt_quantum)?;
    lab.dt_classical = cfg.get_f64("time", "dt_classical", lab.dt_classical)?;
    lab.t_final = cfg.get_f64("time", "t_final", lab.t_final)?;
    lab.n_reports = cfg.get_usize("time", "n_reports", lab.n_reports)?;
    lab.transport_stride = cfg.get_usize("verify", "transport_stride", lab.transport_stride)?;
    lab.tol = cfg.get_f64("verify", "tol", lab.tol)?;
    lab.max_refinements = cfg.get_u32("verify", "max_refinements", lab.max_refinements)?;
    Ok(lab)
}

/// Pull the husimi-route left-hand side at a given time out of an envelope
/// report, if that time was sampled.
fn lhs_at(report: &crate::couplingflow::BoundReport, t: f64) -> Option<f64> {
    report
        .rows
        .iter()
        .find(|r| (r.t - t).abs() < 1e-9)
        .map(|r| r.lhs)
}

fn run_hartree_vlasov(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let lab = hv_lab(cfg)?;
    let out: HartreeVlasovOutcome = verify_hartree_vlasov(&lab)?;
    sink.write("bounds_gronwall.csv", bound_report_csv(&out.gronwall).as_bytes())?;
    sink.write("bounds_gronwall.dat", bound_report_dat(&out.gronwall).as_bytes())?;
    sink.write("bounds_husimi.csv", bound_report_csv(&out.husimi).as_bytes())?;
    sink.write("bounds_husimi.dat", bound_report_dat(&out.husimi).as_bytes())?;
    sink.write("series.csv", series_csv(&out.series).as_bytes())?;

    let mut rows = vec![
        CheckRow::le(
            "coupling envelope worst ratio",
            out.gronwall.worst_ratio,
            1.0 + lab.tol,
        ),
        CheckRow::le(
            "husimi transport worst ratio",
            out.husimi.worst_ratio,
            1.0 + lab.tol,
        ),
        CheckRow::le("windowed mass dropped", out.max_dropped_mass, WINDOW_DROP_BUDGET),
    ];
    rows.push(CheckRow::le(
        "refinement reruns used",
        out.refinements as f64,
        lab.max_refinements as f64,
    ));
    let mut metrics = Metrics::new();
    metrics.insert("initial_energy".into(), out.initial_energy);
    metrics.insert("rate".into(), out.rate);
    metrics.insert("refinements".into(), out.refinements as f64);
    metrics.insert("classical_energy_drift".into(), out.classical_energy_drift);
    metrics.insert("quantum_trace_drift".into(), out.quantum_trace_drift);
    metrics.insert("gronwall_worst_ratio".into(), out.gronwall.worst_ratio);
    metrics.insert("husimi_worst_ratio".into(), out.husimi.worst_ratio);
    if let Some(lhs) = lhs_at(&out.husimi, 1.0) {
        metrics.insert("husimi_lhs_t1".into(), lhs);
    }
    if let Some(last) = out.husimi.rows.last() {
        metrics.insert("husimi_lhs_final".into(), last.lhs);
    }
    if let Some(last) = out.series.energy.last() {
        metrics.insert("energy_final".into(), *last);
    }
    Ok((rows, metrics))
}

fn manybody_rows(
    lab: &ManyBodyLab,
    out: &ManyBodyOutcome,
    sink: &mut ArtifactSink,
) -> Result<(Vec<CheckRow>, Metrics)> {
    sink.write("bounds_gronwall.csv", bound_report_csv(&out.gronwall).as_bytes())?;
    sink.write("bounds_gronwall.dat", bound_report_dat(&out.gronwall).as_bytes())?;
    if !out.husimi.rows.is_empty() {
        sink.write("bounds_husimi.csv", bound_report_csv(&out.husimi).as_bytes())?;
        sink.write("bounds_husimi.dat", bound_report_dat(&out.husimi).as_bytes())?;
    }
    sink.write("series.csv", series_csv(&out.series).as_bytes())?;
    let mut consistency = String::from("t,defect\n");
    for (t, c) in out.series.times.iter().zip(&out.consistency) {
        let _ = writeln!(consistency, "{t},{c}");
    }
    sink.write("consistency.csv", consistency.as_bytes())?;

    let mut rows = vec![CheckRow::le(
        "per-body envelope worst ratio",
        out.gronwall.worst_ratio,
        1.0 + lab.tol,
    )];
    if !out.husimi.rows.is_empty() {
        rows.push(CheckRow::le(
            "marginal transport worst ratio",
            out.husimi.worst_ratio,
            1.0 + lab.tol,
        ));
        rows.push(CheckRow::le(
            "windowed mass dropped",
            out.max_dropped_mass,
            WINDOW_DROP_BUDGET,
        ));
    }
    rows.push(CheckRow::le("quantum norm drift", out.norm_drift, 1e-8));
    rows.push(CheckRow::le(
        "refinement reruns used",
        out.refinements as f64,
        lab.max_refinements as f64,
    ));

    let mut metrics = Metrics::new();
    metrics.insert("initial_energy".into(), out.initial_energy);
    metrics.insert("rate".into(), out.rate);
    metrics.insert("refinements".into(), out.refinements as f64);
    metrics.insert("norm_drift".into(), out.norm_drift);
    metrics.insert("classical_energy_drift".into(), out.classical_energy_drift);
    metrics.insert("gronwall_worst_ratio".into(), out.gronwall.worst_ratio);
    if let Some(c) = out.consistency.last() {
        metrics.insert("consistency_final".into(), *c);
    }
    if !out.husimi.rows.is_empty() {
        metrics.insert("husimi_worst_ratio".into(), out.husimi.worst_ratio);
        let max_over_hbar = out
            .husimi
            .rows
            .iter()
            .map(|r| r.lhs / lab.hbar)
            .fold(f64::NEG_INFINITY, f64::max);
        metrics.insert("max_lhs_over_hbar".into(), max_over_hbar);
        if let Some(lhs) = lhs_at(&out.husimi, 1.0) {
            metrics.insert("husimi_lhs_t1".into(), lhs);
        }
    }
    if let Some(last) = out.series.energy.last() {
        metrics.insert("energy_final".into(), *last);
    }
    Ok((rows, metrics))
}

fn run_pairwise(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let lab = manybody_lab(cfg, true)?;
    let out = verify_schroedinger_liouville(&lab)?;
    manybody_rows(&lab, &out, sink)
}

fn run_mean_field(cfg: &Config, sink: &mut ArtifactSink) -> Result<(Vec<CheckRow>, Metrics)> {
    let lab = manybody_lab(cfg, false)?;
    let out = verify_schroedinger_vlasov(&lab)?;
    manybody_rows(&lab, &out, sink)
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Headline metric fitted against the sweep axis, by kind.
fn headline_key(kind: &str) -> &'static str {
    match kind {
        "toeplitz" => "identity_dev",
        "husimi_health" => "worst_l1",
        "cost_floor" => "ground_first",
        "sandwich" => "worst_lower_gap",
        "interval" => "worst_violation",
        "classical_health" => "vlasov_drift_rate",
        "quantum_health" => "self_convergence_error",
        "hartree_vlasov" => "husimi_lhs_t1",
        "pairwise" => "max_lhs_over_hbar",
        "mean_field" => "consistency_final",
        "nccs" => "worst_violation",
        _ => "",
    }
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub runs: Vec<RunOutcome>,
    pub axis_values: Vec<f64>,
    pub headline: Vec<Option<f64>>,
    pub slope: Option<f64>,
    pub csv_path: PathBuf,
    pub all_pass: bool,
}

/// Run `cfg` once per value of `axis` (syntax `section.key=v1,v2,...`),
/// writing a combined convergence table with a fitted log-log slope.
pub fn sweep(cfg: &Config, axis: &str, out_root: &Path) -> Result<SweepOutcome> {
    let (address, values) = axis.split_once('=').ok_or_else(|| {
        QcError::InvalidConfig(format!("axis {axis:?} must look like section.key=v1,v2,..."))
    })?;
    let (section, key) = address.split_once('.').ok_or_else(|| {
        QcError::InvalidConfig(format!("axis address {address:?} must be section.key"))
    })?;
    let values: Vec<&str> = values.split(',').map(str::trim).collect();
    if values.is_empty() {
        return Err(QcError::InvalidConfig("axis needs at least one value".into()));
    }

    let kind = cfg.kind()?.to_string();
    let metric = headline_key(&kind);
    let mut runs = Vec::new();
    let mut axis_values = Vec::new();
    let mut headline = Vec::new();
    for v in &values {
        let mut c = cfg.clone();
        c.set(section, key, v)?;
        let outcome = execute(&c, out_root)?;
        axis_values.push(v.parse::<f64>().unwrap_or(f64::NAN));
        headline.push(outcome.metrics.get(metric).copied());
        runs.push(outcome);
    }

    let fit: (Vec<f64>, Vec<f64>) = axis_values
        .iter()
        .zip(&headline)
        .filter_map(|(&a, h)| h.map(|v| (a, v)))
        .unzip();
    let slope = checks::loglog_slope(&fit.0, &fit.1);

    let mut table = format!("# kind = {kind}, axis = {address}, headline = {metric}\n");
    let _ = writeln!(table, "axis,headline,pass,dir");
    for ((run, &a), h) in runs.iter().zip(&axis_values).zip(&headline) {
        let _ = writeln!(
            table,
            "{a},{},{},{}",
            h.map(|v| v.to_string()).unwrap_or_default(),
            run.pass,
            run.dir.file_name().unwrap().to_string_lossy()
        );
    }
    if let Some(s) = slope {
        let _ = writeln!(table, "# loglog_slope = {s}");
    }
    std::fs::create_dir_all(out_root)?;
    let csv_path = out_root.join(format!("sweep_{}_{}_{}.csv", cfg.label()?, section, key));
    std::fs::write(&csv_path, &table)?;

    let all_pass = runs.iter().all(|r| r.pass);
    Ok(SweepOutcome {
        runs,
        axis_values,
        headline,
        slope,
        csv_path,
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// Combined reports
// ---------------------------------------------------------------------------

/// Combine every `summary.csv` under `dir` (one level of run directories)
/// into a single table. Returns the rendered text and the overall verdict;
/// also writes `report.txt` and `report.csv` into `dir`.
pub fn report(dir: &Path) -> Result<(String, bool)> {
    let mut summaries: Vec<(String, String, Vec<(String, String, String, bool)>)> = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("summary.csv").is_file())
        .collect();
    entries.sort();
    for run_dir in &entries {
        let text = std::fs::read_to_string(run_dir.join("summary.csv"))?;
        let mut kind = String::new();
        let mut label = String::new();
        let mut rows = Vec::new();
        for line in text.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                continue;
            }
            kind = cells[0].to_string();
            label = cells[1].to_string();
            rows.push((
                cells[2].to_string(),
                cells[3].to_string(),
                cells[4].to_string(),
                cells[5] == "true",
            ));
        }
        if !rows.is_empty() {
            summaries.push((kind, label, rows));
        }
    }
    summaries.sort();

    let mut csv = String::from("kind,label,check,value,limit,pass\n");
    let mut text = format!("combined report over {} runs\n\n", summaries.len());
    let mut failures = 0usize;
    for (kind, label, rows) in &summaries {
        let run_pass = rows.iter().all(|r| r.3);
        if !run_pass {
            failures += 1;
        }
        let _ = writeln!(
            text,
            "{} :: {} -> {}",
            kind,
            label,
            if run_pass { "pass" } else { "FAIL" }
        );
        for (check, value, limit, pass) in rows {
            let _ = writeln!(csv, "{kind},{label},{check},{value},{limit},{pass}");
            if !pass {
                let _ = writeln!(text, "    FAIL {check}: value {value} vs limit {limit}");
            }
        }
    }
    text.push('\n');
    if failures == 0 && !summaries.is_empty() {
        text.push_str("ALL PASS\n");
    } else if summaries.is_empty() {
        text.push_str("no run summaries found\n");
    } else {
        let _ = writeln!(text, "FAILURES: {failures} of {} runs", summaries.len());
    }
    std::fs::write(dir.join("report.txt"), &text)?;
    std::fs::write(dir.join("report.csv"), &csv)?;
    Ok((text, failures == 0 && !summaries.is_empty()))
}
