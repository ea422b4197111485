//! Self-consistent one-body propagation.
//!
//! Two interchangeable representations of the evolving state:
//!   * full matrix — the stored operator is conjugated by the step unitary;
//!     cost per step O(n^2 log n), independent of rank;
//!   * weighted columns — each wavefunction column advances through the same
//!     split steps; cost per step O(r n log n) for rank r.
//! Both share one [`EffectivePotentialPath`]-style record: the frozen
//! potential at every time node. Propagating extra columns through a
//! recorded [`HartreePath`] reproduces the run's arithmetic, which keeps
//! column decompositions of the state consistent with the full-matrix result
//! down to float roundoff.

use super::kinetic_phases;
use crate::error::{QcError, Result};
use crate::fftutil::FftPlan;
use crate::hilbert::{DensityOperator, SpaceGrid};
use crate::linalg::add_scaled_outer;
use crate::phasespace::Potential;
use ndarray::Array2;
use num_complex::Complex64;

/// Mean-field potential V * rho frozen at one time node.
#[derive(Debug, Clone)]
pub enum EffectivePotential {
    Zero,
    /// Exact moment form for V = cos: V*rho(x) = Re(e^{ix} conj(S)),
    /// S = sum_j m_j e^{i y_j} over cell masses m_j.
    CosineMoment { re_s: f64, im_s: f64 },
    /// Node values of V * rho.
    Grid(Vec<f64>),
}

impl EffectivePotential {
    pub fn value(&self, grid: &SpaceGrid, i: usize) -> f64 {
        match self {
            EffectivePotential::Zero => 0.0,
            EffectivePotential::CosineMoment { re_s, im_s } => {
                let (s, c) = grid.node(i).sin_cos();
                c * re_s + s * im_s
            }
            EffectivePotential::Grid(v) => v[i],
        }
    }

    /// Half-step phases exp(-i V_eff(x_i) dt / (2 hbar)).
    fn half_phases(&self, grid: &SpaceGrid, hbar: f64, dt: f64) -> Vec<Complex64> {
        (0..grid.n)
            .map(|i| Complex64::from_polar(1.0, -self.value(grid, i) * dt / (2.0 * hbar)))
            .collect()
    }
}

/// Freeze V * rho from cell masses m_i (the operator diagonal, summing to 1).
pub fn effective_potential(masses: &[f64], grid: &SpaceGrid, pot: &Potential) -> EffectivePotential {
    match pot {
        Potential::Zero => EffectivePotential::Zero,
        Potential::Cosine => {
            let mut re_s = 0.0;
            let mut im_s = 0.0;
            for (i, m) in masses.iter().enumerate() {
                let (s, c) = grid.node(i).sin_cos();
                re_s += m * c;
                im_s += m * s;
            }
            EffectivePotential::CosineMoment { re_s, im_s }
        }
        _ => {
            let v = (0..grid.n)
                .map(|i| {
                    let x = grid.node(i);
                    masses
                        .iter()
                        .enumerate()
                        .map(|(j, m)| m * pot.v(x - grid.node(j)))
                        .sum()
                })
                .collect();
            EffectivePotential::Grid(v)
        }
    }
}

/// Frozen effective potential at every time node of a completed run.
#[derive(Debug, Clone)]
pub struct HartreePath {
    pub grid: SpaceGrid,
    pub hbar: f64,
    dt: f64,
    veff: Vec<EffectivePotential>,
}

impl HartreePath {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.veff.len() - 1
    }

    pub fn veff(&self, node: usize) -> &EffectivePotential {
        &self.veff[node]
    }

    /// Advance one wavefunction column from node `from` to a later node
    /// through the recorded potentials.
    pub fn propagate_column(&self, psi: &mut [Complex64], from: usize, to: usize) -> Result<()> {
        if to < from || to > self.n_steps() {
            return Err(QcError::TimeOutsidePath(format!(
                "column transport {from}->{to} outside the recorded {} steps",
                self.n_steps()
            )));
        }
        let plan = FftPlan::new(self.grid.n);
        let mut scratch = plan.make_scratch();
        let kin = kinetic_phases(&self.grid, self.hbar, self.dt);
        for k in from..to {
            let p0 = self.veff[k].half_phases(&self.grid, self.hbar, self.dt);
            for (c, p) in psi.iter_mut().zip(&p0) {
                *c *= p;
            }
            plan.forward(psi, &mut scratch);
            for (c, p) in psi.iter_mut().zip(&kin) {
                *c *= p;
            }
            plan.inverse(psi, &mut scratch);
            let p1 = self.veff[k + 1].half_phases(&self.grid, self.hbar, self.dt);
            for (c, p) in psi.iter_mut().zip(&p1) {
                *c *= p;
            }
        }
        Ok(())
    }
}

/// Completed self-consistent run in the full-matrix representation.
#[derive(Debug, Clone)]
pub struct HartreeRun {
    pub initial: DensityOperator,
    pub state: DensityOperator,
    pub path: HartreePath,
    pub times: Vec<f64>,
    pub trace_series: Vec<f64>,
    pub purity_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub second_moment_series: Vec<f64>,
}

impl HartreeRun {
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy_series[0];
        let scale = e0.abs().max(1.0);
        self.energy_series
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Total energy trace(xi^2/2 R) + (1/2) sum_i V_eff(x_i) m_i where V_eff is
/// the potential frozen from R's own density.
fn hartree_energy(r: &DensityOperator, veff: &EffectivePotential, hbar: f64) -> Result<f64> {
    let kinetic = 0.5 * r.moment_xi(hbar, 2)?;
    let pot: f64 = (0..r.grid.n)
        .map(|i| 0.5 * veff.value(&r.grid, i) * r.mat[[i, i]].re)
        .sum();
    Ok(kinetic + pot)
}

fn diag_masses(mat: &Array2<Complex64>) -> Vec<f64> {
    (0..mat.nrows()).map(|i| mat[[i, i]].re).collect()
}

/// Conjugate the stored matrix by the diagonal phase unitary: M <- U M U^dag.
fn conjugate_diag(mat: &mut Array2<Complex64>, phases: &[Complex64]) {
    let n = mat.nrows();
    for i in 0..n {
        let ui = phases[i];
        for j in 0..n {
            mat[[i, j]] *= ui * phases[j].conj();
        }
    }
}

/// Conjugate the stored matrix by the spectral kinetic unitary K = F^-1 D F:
/// columns get K, rows get K^dag (via row <- conj(K conj(row))).
fn conjugate_kinetic(
    mat: &mut Array2<Complex64>,
    plan: &FftPlan,
    scratch: &mut [Complex64],
    kin: &[Complex64],
) {
    let n = mat.nrows();
    let mut line = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            line[i] = mat[[i, j]];
        }
        plan.forward(&mut line, scratch);
        for (c, p) in line.iter_mut().zip(kin) {
            *c *= p;
        }
        plan.inverse(&mut line, scratch);
        for i in 0..n {
            mat[[i, j]] = line[i];
        }
    }
    for i in 0..n {
        for (j, c) in line.iter_mut().enumerate() {
            *c = mat[[i, j]].conj();
        }
        plan.forward(&mut line, scratch);
        for (c, p) in line.iter_mut().zip(kin) {
            *c *= p;
        }
        plan.inverse(&mut line, scratch);
        for j in 0..n {
            mat[[i, j]] = line[j].conj();
        }
    }
}

/// Run the self-consistent evolution in the full-matrix representation.
pub fn hartree_run(
    r0: &DensityOperator,
    pot: &Potential,
    hbar: f64,
    dt: f64,
    n_steps: usize,
) -> Result<HartreeRun> {
    if r0.n_body != 1 {
        return Err(QcError::UnsupportedDimension(
            "self-consistent propagation acts on one-body operators".into(),
        ));
    }
    if !(dt > 0.0) || dt > 0.05 {
        return Err(QcError::StepTooLarge(format!(
            "dt = {dt} outside the supported range (0, 0.05]"
        )));
    }
    let grid = r0.grid.clone();
    let plan = FftPlan::new(grid.n);
    let mut scratch = plan.make_scratch();
    let kin = kinetic_phases(&grid, hbar, dt);
    let mut mat = r0.mat.clone();
    let mut veff_path = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut trace_series = Vec::with_capacity(n_steps + 1);
    let mut purity_series = Vec::with_capacity(n_steps + 1);
    let mut energy_series = Vec::with_capacity(n_steps + 1);
    let mut second_moment_series = Vec::with_capacity(n_steps + 1);
    let mut veff = effective_potential(&diag_masses(&mat), &grid, pot);
    for k in 0..=n_steps {
        let snapshot = DensityOperator {
            grid: grid.clone(),
            n_body: 1,
            mat: mat.clone(),
        };
        times.push(k as f64 * dt);
        trace_series.push(snapshot.trace());
        purity_series.push(snapshot.purity());
        energy_series.push(hartree_energy(&snapshot, &veff, hbar)?);
        second_moment_series.push(snapshot.second_moment(hbar)?);
        veff_path.push(veff.clone());
        if k < n_steps {
            conjugate_diag(&mut mat, &veff.half_phases(&grid, hbar, dt));
            conjugate_kinetic(&mut mat, &plan, &mut scratch, &kin);
            veff = effective_potential(&diag_masses(&mat), &grid, pot);
            conjugate_diag(&mut mat, &veff.half_phases(&grid, hbar, dt));
        }
    }
    Ok(HartreeRun {
        initial: r0.clone(),
        state: DensityOperator {
            grid: grid.clone(),
            n_body: 1,
            mat,
        },
        path: HartreePath {
            grid,
            hbar,
            dt,
            veff: veff_path,
        },
        times,
        trace_series,
        purity_series,
        energy_series,
        second_moment_series,
    })
}

/// Completed self-consistent run in the weighted-column representation.
#[derive(Debug, Clone)]
pub struct HartreeColumnsRun {
    pub weights: Vec<f64>,
    pub columns: Vec<Vec<Complex64>>,
    pub path: HartreePath,
}

impl HartreeColumnsRun {
    /// Assemble the final state sum_k w_k |psi_k><psi_k|.
    pub fn assemble(&self) -> DensityOperator {
        let grid = &self.path.grid;
        let mut mat = Array2::zeros((grid.n, grid.n));
        for (w, col) in self.weights.iter().zip(&self.columns) {
            add_scaled_outer(&mut mat, w * grid.h(), col);
        }
        DensityOperator {
            grid: grid.clone(),
            n_body: 1,
            mat,
        }
    }
}

/// Run the self-consistent evolution keeping the state as weighted columns.
/// The density is re-frozen from the columns themselves, so the rank never
/// grows and low-rank mixtures stay cheap.
pub fn hartree_run_columns(
    grid: &SpaceGrid,
    hbar: f64,
    pot: &Potential,
    weights: &[f64],
    columns: &[Vec<Complex64>],
    dt: f64,
    n_steps: usize,
) -> Result<HartreeColumnsRun> {
    if weights.len() != columns.len() || columns.is_empty() {
        return Err(QcError::InvalidConfig("column run needs matching weights and columns".into()));
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
        return Err(QcError::InvalidMeasure("column weights must be >= 0 and sum to 1".into()));
    }
    let plan = FftPlan::new(grid.n);
    let mut scratch = plan.make_scratch();
    let kin = kinetic_phases(grid, hbar, dt);
    let mut cols: Vec<Vec<Complex64>> = columns.to_vec();
    let h = grid.h();
    let masses = |cols: &[Vec<Complex64>]| -> Vec<f64> {
        let mut m = vec![0.0; grid.n];
        for (w, col) in weights.iter().zip(cols) {
            for (mi, c) in m.iter_mut().zip(col) {
                *mi += w * c.norm_sqr() * h;
            }
        }
        m
    };
    let mut veff = effective_potential(&masses(&cols), grid, pot);
    let mut veff_path = Vec::with_capacity(n_steps + 1);
    veff_path.push(veff.clone());
    for _ in 0..n_steps {
        let p0 = veff.half_phases(grid, hbar, dt);
        for col in cols.iter_mut() {
            for (c, p) in col.iter_mut().zip(&p0) {
                *c *= p;
            }
            plan.forward(col, &mut scratch);
            for (c, p) in col.iter_mut().zip(&kin) {
                *c *= p;
            }
            plan.inverse(col, &mut scratch);
        }
        veff = effective_potential(&masses(&cols), grid, pot);
        let p1 = veff.half_phases(grid, hbar, dt);
        for col in cols.iter_mut() {
            for (c, p) in col.iter_mut().zip(&p1) {
                *c *= p;
            }
        }
        veff_path.push(veff.clone());
    }
    Ok(HartreeColumnsRun {
        weights: weights.to_vec(),
        columns: cols,
        path: HartreePath {
            grid: grid.clone(),
            hbar,
            dt,
            veff: veff_path,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent_state;
    use crate::phasespace::{PhaseDensity, PhaseGrid};
    use approx::assert_abs_diff_eq;

    fn lab_grid() -> SpaceGrid {
        SpaceGrid::new(-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 64).unwrap()
    }

    #[test]
    fn free_coherent_state_spreads_with_the_closed_form() {
        // Under V = 0: <x>(t) = x0 + xi0 t, Var_x(t) = (hbar/2)(1 + t^2).
        let grid = lab_grid();
        let hbar = 0.5;
        let r0 = DensityOperator::from_pure(&coherent_state(&grid, hbar, -0.8, 0.9).unwrap());
        let run = hartree_run(&r0, &Potential::Zero, hbar, 0.01, 100).unwrap();
        let r = &run.state;
        assert_abs_diff_eq!(r.moment_x(1).unwrap(), -0.8 + 0.9, epsilon = 1e-8);
        let var = r.moment_x(2).unwrap() - r.moment_x(1).unwrap().powi(2);
        assert_abs_diff_eq!(var, 0.5 * hbar * 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.moment_xi(hbar, 1).unwrap(), 0.9, epsilon = 1e-10);
    }

    #[test]
    fn invariants_survive_a_self_consistent_run() {
        let grid = lab_grid();
        let hbar = 0.5;
        let pg = PhaseGrid::window(0.6, 0.4, 0.45, 0.45, 12, 12).unwrap();
        let cloud = PhaseDensity::gaussian(pg, 0.6, 0.4, 0.1, 0.1)
            .unwrap()
            .to_particles()
            .unwrap();
        let r0 = crate::hilbert::toeplitz_density(&grid, hbar, &cloud).unwrap();
        let run = hartree_run(&r0, &Potential::Cosine, hbar, 0.002, 250).unwrap();
        let tr_drift = run
            .trace_series
            .iter()
            .map(|t| (t - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(tr_drift < 1e-12, "trace drift {tr_drift}");
        let p0 = run.purity_series[0];
        let pur_drift = run
            .purity_series
            .iter()
            .map(|p| (p - p0).abs())
            .fold(0.0, f64::max);
        assert!(pur_drift < 1e-12, "purity drift {pur_drift}");
        assert!(run.energy_drift() < 1e-6, "energy drift {}", run.energy_drift());
        assert!(run.state.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn ehrenfest_momentum_rate_matches_the_mean_force() {
        // d<xi>/dt = -trace(V_eff'(x) R) holds exactly for the continuous
        // flow; the split scheme reproduces it to O(dt^2) at the midpoint.
        let grid = lab_grid();
        let hbar = 0.5;
        let r0 = DensityOperator::from_pure(&coherent_state(&grid, hbar, 0.7, 0.2).unwrap());
        let dt = 0.001;
        let run = hartree_run(&r0, &Potential::Cosine, hbar, dt, 2).unwrap();
        // Mean force at node 1 from the recorded potential: for V = cos,
        // V_eff'(x) = -sin(x) Re S + cos(x) Im S.
        let EffectivePotential::CosineMoment { re_s, im_s } = run.path.veff(1) else {
            panic!("cosine run must freeze moment potentials");
        };
        let mut mid = r0.clone();
        let mid_run = hartree_run(&r0, &Potential::Cosine, hbar, dt, 1).unwrap();
        mid.mat = mid_run.state.mat;
        let force: f64 = (0..grid.n)
            .map(|i| {
                let (s, c) = grid.node(i).sin_cos();
                (s * re_s - c * im_s) * mid.mat[[i, i]].re
            })
            .sum();
        let before = r0.moment_xi(hbar, 1).unwrap();
        let after = run.state.moment_xi(hbar, 1).unwrap();
        assert_abs_diff_eq!((after - before) / (2.0 * dt), force, epsilon = 1e-5);
    }

    #[test]
    fn column_route_matches_full_matrix_route() {
        let grid = lab_grid();
        let hbar = 0.5;
        let a = coherent_state(&grid, hbar, 0.5, 0.3).unwrap();
        let b = coherent_state(&grid, hbar, 0.8, 0.5).unwrap();
        let r0 = DensityOperator::mixture(&[(0.6, a.clone()), (0.4, b.clone())]).unwrap();
        let full = hartree_run(&r0, &Potential::Cosine, hbar, 0.002, 150).unwrap();
        let cols = hartree_run_columns(
            &grid,
            hbar,
            &Potential::Cosine,
            &[0.6, 0.4],
            &[a.psi.clone(), b.psi.clone()],
            0.002,
            150,
        )
        .unwrap();
        let assembled = cols.assemble();
        let diff: f64 = (&assembled.mat - &full.state.mat)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-9, "representations diverged by {diff}");
    }

    #[test]
    fn recorded_path_reproduces_the_column_run() {
        let grid = lab_grid();
        let hbar = 0.5;
        let a = coherent_state(&grid, hbar, 0.5, 0.3).unwrap();
        let b = coherent_state(&grid, hbar, 0.8, 0.5).unwrap();
        let cols = hartree_run_columns(
            &grid,
            hbar,
            &Potential::Cosine,
            &[0.6, 0.4],
            &[a.psi.clone(), b.psi.clone()],
            0.002,
            100,
        )
        .unwrap();
        let mut replay = a.psi.clone();
        cols.path.propagate_column(&mut replay, 0, 100).unwrap();
        for (u, v) in replay.iter().zip(&cols.columns[0]) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn column_transport_rejects_backward_requests() {
        let grid = lab_grid();
        let hbar = 0.5;
        let a = coherent_state(&grid, hbar, 0.5, 0.3).unwrap();
        let run = hartree_run(
            &DensityOperator::from_pure(&a),
            &Potential::Cosine,
            hbar,
            0.002,
            10,
        )
        .unwrap();
        let mut col = a.psi.clone();
        assert!(run.path.propagate_column(&mut col, 5, 3).is_err());
        assert!(run.path.propagate_column(&mut col, 0, 11).is_err());
    }
}
