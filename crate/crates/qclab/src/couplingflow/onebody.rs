//! Mean-field classical limit laboratory: self-consistent one-body quantum
//! flow against mean-field classical characteristics.
//!
//! The initial data are matched: a Gaussian phase-space blob is realized as
//! a lattice atom family, the quantum state is the coherent mixture over the
//! same atoms, and the initial coupling is diagonal (each atom rides with
//! its own coherent block), which pins the initial coupling energy to the
//! floor hbar/2 exactly. Both sides then evolve self-consistently — the
//! classical atoms along the recorded mean-field force path, the quantum
//! columns through the recorded effective-potential path of their own
//! mixture — and the transported coupling energy is checked against its
//! exponential envelope at every report time. Optionally the classical
//! optimal-transport route is verified as well: the half-quadratic transport
//! cost between the evolved atom family and the Husimi function of the
//! evolved mixture must stay below (hbar/2)(1 + e^{rate t}).

use super::{
    bound_row, coupling_energy, matched_flow_rate, BoundReport, CouplingSeries, MomentProbe,
    ReportLayout,
};
use crate::error::Result;
use crate::hilbert::{coherent_state, husimi_table, DensityOperator, SpaceGrid};
use crate::linalg::add_scaled_outer;
use crate::phasespace::{vlasov_run, PhaseDensity, PhaseGrid, Potential};
use crate::qcdist::{table_window, windowed_measure_from_table, CostMoments, WINDOW_DROP_BUDGET};
use crate::qdynamics::hartree_run_columns;
use crate::transport::{optimal_plan, DiscreteMeasure};
use ndarray::Array2;
use num_complex::Complex64;

/// Configuration of one mean-field limit experiment.
#[derive(Debug, Clone)]
pub struct HartreeVlasovLab {
    pub pot: Potential,
    pub hbar: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    /// Center of the Gaussian blob in phase space.
    pub center: (f64, f64),
    /// Standard deviations of the blob per coordinate.
    pub sigma: (f64, f64),
    /// Lattice resolution per axis of the atom family realizing the blob.
    pub atoms_per_axis: usize,
    /// Half-width of the atom lattice in units of sigma.
    pub lattice_sigmas: f64,
    /// Requested quantum step (rounded down to divide the report interval).
    pub dt_quantum: f64,
    /// Requested classical step (rounded down likewise).
    pub dt_classical: f64,
    pub t_final: f64,
    /// Number of report times including t = 0.
    pub n_reports: usize,
    /// Verify the Husimi transport route every this many reports (0 = skip).
    pub transport_stride: usize,
    /// Relative tolerance of the pass rule lhs <= rhs (1 + tol).
    pub tol: f64,
    /// Retries with halved steps after a failing attempt.
    pub max_refinements: u32,
}

impl HartreeVlasovLab {
    /// The pinned acceptance experiment at a given hbar: cosine interaction,
    /// Gaussian blob at (0.6, 0.4) with sigma 0.1, t in [0, 2] at 21 samples.
    pub fn acceptance(hbar: f64) -> Self {
        HartreeVlasovLab {
            pot: Potential::Cosine,
            hbar,
            x_min: -2.0 * std::f64::consts::PI,
            x_max: 2.0 * std::f64::consts::PI,
            n_x: 128,
            center: (0.6, 0.4),
            sigma: (0.1, 0.1),
            atoms_per_axis: 24,
            lattice_sigmas: 6.0,
            dt_quantum: 0.002,
            dt_classical: 0.001,
            t_final: 2.0,
            n_reports: 21,
            transport_stride: 1,
            tol: 0.05,
            max_refinements: 1,
        }
    }
}

/// Result of a mean-field limit experiment (last attempt if refined).
#[derive(Debug, Clone)]
pub struct HartreeVlasovOutcome {
    /// Transported coupling energy against its exponential envelope.
    pub gronwall: BoundReport,
    /// Husimi transport route against (hbar/2)(1 + e^{rate t}).
    pub husimi: BoundReport,
    pub series: CouplingSeries,
    /// Coupling energy at t = 0 (the floor hbar/2 for matched data).
    pub initial_energy: f64,
    pub rate: f64,
    pub dt_quantum: f64,
    pub dt_classical: f64,
    pub refinements: u32,
    pub classical_energy_drift: f64,
    pub quantum_trace_drift: f64,
    /// Largest mass dropped while windowing Husimi tables to measures.
    pub max_dropped_mass: f64,
}

impl HartreeVlasovOutcome {
    pub fn all_pass(&self) -> bool {
        self.gronwall.all_pass && self.husimi.all_pass
    }
}

/// Mixture operator sum_k w_k |psi_k><psi_k| from the current columns.
fn assemble_columns(grid: &SpaceGrid, weights: &[f64], cols: &[Vec<Complex64>]) -> DensityOperator {
    let mut mat = Array2::zeros((grid.n, grid.n));
    for (w, col) in weights.iter().zip(cols) {
        add_scaled_outer(&mut mat, w * grid.h(), col);
    }
    DensityOperator {
        grid: grid.clone(),
        n_body: 1,
        mat,
    }
}

/// Run the mean-field limit experiment, refining the time steps until every
/// verified display passes or the refinement budget is exhausted. The
/// returned outcome reports the final attempt either way.
pub fn verify_hartree_vlasov(lab: &HartreeVlasovLab) -> Result<HartreeVlasovOutcome> {
    let mut layout =
        ReportLayout::new(lab.t_final, lab.n_reports, lab.dt_quantum, lab.dt_classical)?;
    let mut refinements = 0u32;
    loop {
        let mut out = attempt(lab, &layout)?;
        out.refinements = refinements;
        if out.all_pass() || refinements >= lab.max_refinements {
            return Ok(out);
        }
        layout = layout.refined();
        refinements += 1;
    }
}

fn attempt(lab: &HartreeVlasovLab, layout: &ReportLayout) -> Result<HartreeVlasovOutcome> {
    let grid = SpaceGrid::new(lab.x_min, lab.x_max, lab.n_x)?;
    let (cx, cxi) = lab.center;
    let (sx, sxi) = lab.sigma;
    let lattice = PhaseGrid::window(
        cx,
        cxi,
        lab.lattice_sigmas * sx,
        lab.lattice_sigmas * sxi,
        lab.atoms_per_axis,
        lab.atoms_per_axis,
    )?;
    let cloud = PhaseDensity::gaussian(lattice, cx, cxi, sx, sxi)?.to_particles()?;
    let weights: Vec<f64> = cloud.particles.iter().map(|p| p.w).collect();
    let columns: Vec<Vec<Complex64>> = cloud
        .particles
        .iter()
        .map(|p| coherent_state(&grid, lab.hbar, p.x, p.xi).map(|w| w.psi))
        .collect::<Result<_>>()?;

    let vlasov = vlasov_run(
        &cloud,
        &lab.pot,
        None,
        layout.dt_classical(),
        layout.classical_steps(),
    )?;
    let hartree = hartree_run_columns(
        &grid,
        lab.hbar,
        &lab.pot,
        &weights,
        &columns,
        layout.dt_quantum(),
        layout.quantum_steps(),
    )?;

    let rate = matched_flow_rate(&lab.pot);
    let diagonal: Vec<(u32, u32, f64)> = weights
        .iter()
        .enumerate()
        .map(|(k, w)| (k as u32, k as u32, *w))
        .collect();

    let mut probe = MomentProbe::new(&grid, 1, lab.hbar);
    let mut cols_now = columns;
    let mut series = CouplingSeries::default();
    let mut envelope_rows = Vec::with_capacity(layout.n_reports);
    let mut husimi_rows = Vec::new();
    let mut initial_energy = 0.0;
    let mut trace_drift: f64 = 0.0;
    let mut max_dropped: f64 = 0.0;

    for report in 0..layout.n_reports {
        let t = layout.time(report);
        if report > 0 {
            let from = (report - 1) * layout.quantum_per_report;
            let to = report * layout.quantum_per_report;
            for col in cols_now.iter_mut() {
                hartree.path.propagate_column(col, from, to)?;
            }
        }
        let moments: Vec<CostMoments> =
            cols_now.iter().map(|c| probe.column_moments(c)).collect();
        let cloud_t = vlasov.cloud_at(report * layout.classical_per_report)?;
        let points: Vec<(f64, f64)> =
            cloud_t.particles.iter().map(|p| (p.x, p.xi)).collect();
        let energy = coupling_energy(&diagonal, &points, &moments);
        if report == 0 {
            initial_energy = energy.energy;
        }
        series.push(t, energy);
        envelope_rows.push(bound_row(
            t,
            energy.energy,
            (rate * t).exp() * initial_energy,
            lab.tol,
        ));
        let trace: f64 = weights.iter().zip(&moments).map(|(w, m)| w * m.trace).sum();
        trace_drift = trace_drift.max((trace - 1.0).abs());

        if lab.transport_stride > 0 && report % lab.transport_stride == 0 {
            let state = assemble_columns(&grid, &weights, &cols_now);
            let table = husimi_table(&state, lab.hbar)?;
            let window = table_window(&table);
            let (husimi, dropped) =
                windowed_measure_from_table(&table, &window, WINDOW_DROP_BUDGET)?;
            max_dropped = max_dropped.max(dropped);
            let classical = DiscreteMeasure::from_cloud(&cloud_t)?;
            let plan = optimal_plan(&classical, &husimi)?;
            husimi_rows.push(bound_row(
                t,
                plan.cost,
                0.5 * lab.hbar * (1.0 + (rate * t).exp()),
                lab.tol,
            ));
        }
    }

    Ok(HartreeVlasovOutcome {
        gronwall: BoundReport::new("coupling energy envelope", rate, lab.tol, envelope_rows),
        husimi: BoundReport::new("husimi transport envelope", rate, lab.tol, husimi_rows),
        series,
        initial_energy,
        rate,
        dt_quantum: layout.dt_quantum(),
        dt_classical: layout.dt_classical(),
        refinements: 0,
        classical_energy_drift: vlasov.energy_drift(),
        quantum_trace_drift: trace_drift,
        max_dropped_mass: max_dropped,
    })
}
