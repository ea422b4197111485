//! Linear N-body propagation on the n^N lattice.
//!
//! States are weighted families of N-body coefficient columns. Product
//! initial data built from a weighted atom family is reduced over
//! permutation orbits: atom tuples that are permutations of one another
//! produce body-symmetrized marginals that are identical under the
//! permutation-invariant Hamiltonian, so only one representative per
//! multiset is evolved, carrying the multinomial weight of its orbit.
//!
//! Stepping is Strang: half diagonal phase with the pair potential
//! (1/N) sum_{j<k} V(x_j - x_k), spectral kinetic step on every axis, half
//! diagonal phase. Norms are conserved to roundoff; the energy oscillates
//! at O(dt^2) around its initial value.

use super::kinetic_phases;
use crate::error::{QcError, Result};
use crate::fftutil::{fft_axis, FftPlan};
use crate::hilbert::{coherent_state, marginal_from_columns, tensor_product, DensityOperator, SpaceGrid};
use crate::phasespace::{ParticleCloud, Potential};
use num_complex::Complex64;

/// One permutation orbit of quantized product data: the sorted atom-index
/// tuple naming the orbit, its multinomial orbit mass, and the coherent
/// product column of the representative (bodies in tuple order, body 0 most
/// significant in the flat layout).
#[derive(Debug, Clone)]
pub struct OrbitColumn {
    pub atoms: Vec<usize>,
    pub weight: f64,
    pub column: Vec<Complex64>,
}

/// Orbit-reduced quantized product data: one representative per atom
/// multiset, weighted by the multinomial orbit mass.
pub fn product_orbit_family(
    atoms: &ParticleCloud,
    grid: &SpaceGrid,
    hbar: f64,
    n_body: usize,
) -> Result<Vec<OrbitColumn>> {
    if n_body == 0 {
        return Err(QcError::InvalidConfig("orbit columns need n_body >= 1".into()));
    }
    let m = atoms.particles.len();
    if m == 0 {
        return Err(QcError::InvalidMeasure("empty atom family".into()));
    }
    let states: Vec<_> = atoms
        .particles
        .iter()
        .map(|p| coherent_state(grid, hbar, p.x, p.xi))
        .collect::<Result<_>>()?;
    let factorial = |k: usize| -> f64 { (1..=k).map(|v| v as f64).product() };
    let mut out = Vec::new();
    // Non-decreasing index tuples enumerate the multisets.
    let mut idx = vec![0usize; n_body];
    loop {
        // Orbit weight: multinomial(N; counts) * product of atom weights.
        let mut w = factorial(n_body);
        let mut run = 1usize;
        for j in 0..n_body {
            w *= atoms.particles[idx[j]].w;
            if j + 1 < n_body && idx[j + 1] == idx[j] {
                run += 1;
            } else {
                w /= factorial(run);
                run = 1;
            }
        }
        if w > 0.0 {
            let factors: Vec<&crate::hilbert::WaveFunction> =
                idx.iter().map(|&a| &states[a]).collect();
            out.push(OrbitColumn {
                atoms: idx.clone(),
                weight: w,
                column: tensor_product(&factors)?,
            });
        }
        // Advance to the next non-decreasing tuple.
        let mut j = n_body;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if idx[j] + 1 < m {
                let v = idx[j] + 1;
                for slot in idx.iter_mut().skip(j) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Orbit columns stripped to (weight, column) pairs, the shape the
/// propagation drivers consume.
pub fn product_orbit_columns(
    atoms: &ParticleCloud,
    grid: &SpaceGrid,
    hbar: f64,
    n_body: usize,
) -> Result<Vec<(f64, Vec<Complex64>)>> {
    Ok(product_orbit_family(atoms, grid, hbar, n_body)?
        .into_iter()
        .map(|o| (o.weight, o.column))
        .collect())
}

/// Pair-potential diagonal (1/N) sum_{j<k} V(x_j - x_k) over the flat lattice.
fn pair_diagonal(grid: &SpaceGrid, n_body: usize, pot: &Potential) -> Vec<f64> {
    let n = grid.n;
    let dim = n.pow(n_body as u32);
    let mut w = vec![0.0; dim];
    let mut digits = vec![0usize; n_body];
    for (idx, wv) in w.iter_mut().enumerate() {
        let mut rem = idx;
        for d in digits.iter_mut().rev() {
            *d = rem % n;
            rem /= n;
        }
        let mut acc = 0.0;
        for j in 0..n_body {
            for k in (j + 1)..n_body {
                acc += pot.v(grid.node(digits[j]) - grid.node(digits[k]));
            }
        }
        *wv = acc / n_body as f64;
    }
    w
}

/// Strang split-step engine for one N-body column; crate-internal so other
/// drivers (coupling-functional replay) can advance columns between report
/// nodes with the exact arithmetic of [`nbody_run`].
pub(crate) struct Propagator {
    shape: Vec<usize>,
    half_phase: Vec<Complex64>,
    kin: Vec<Complex64>,
    strides: Vec<usize>,
    plan: FftPlan,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl Propagator {
    pub(crate) fn new(grid: &SpaceGrid, n_body: usize, hbar: f64, pot: &Potential, dt: f64) -> Self {
        let n = grid.n;
        let half_phase = pair_diagonal(grid, n_body, pot)
            .into_iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
            .collect();
        let strides = (0..n_body).map(|a| n.pow((n_body - 1 - a) as u32)).collect();
        let plan = FftPlan::new(n);
        let scratch = plan.make_scratch();
        Propagator {
            shape: vec![n; n_body],
            half_phase,
            kin: kinetic_phases(grid, hbar, dt),
            strides,
            plan,
            scratch,
            line: vec![Complex64::default(); n],
        }
    }

    pub(crate) fn step(&mut self, psi: &mut [Complex64]) {
        let n = self.shape[0];
        for (c, p) in psi.iter_mut().zip(&self.half_phase) {
            *c *= p;
        }
        for axis in 0..self.shape.len() {
            fft_axis(psi, &self.shape, axis, &self.plan, &mut self.scratch, &mut self.line, true);
            let stride = self.strides[axis];
            for (idx, c) in psi.iter_mut().enumerate() {
                *c *= self.kin[(idx / stride) % n];
            }
            fft_axis(psi, &self.shape, axis, &self.plan, &mut self.scratch, &mut self.line, false);
        }
        for (c, p) in psi.iter_mut().zip(&self.half_phase) {
            *c *= p;
        }
    }
}

/// Weighted N-body energy of a column family: spectral kinetic part plus the
/// pair-potential diagonal.
pub fn nbody_energy(
    columns: &[(f64, Vec<Complex64>)],
    grid: &SpaceGrid,
    n_body: usize,
    hbar: f64,
    pot: &Potential,
) -> f64 {
    let n = grid.n;
    let hn = grid.h().powi(n_body as i32);
    let shape = vec![n; n_body];
    let plan = FftPlan::new(n);
    let mut scratch = plan.make_scratch();
    let mut line = vec![Complex64::default(); n];
    let momenta = grid.momenta(hbar);
    let diag = pair_diagonal(grid, n_body, pot);
    let mut total = 0.0;
    for (w, psi) in columns {
        let mut e = 0.0;
        for axis in 0..n_body {
            let mut hat = psi.clone();
            fft_axis(&mut hat, &shape, axis, &plan, &mut scratch, &mut line, true);
            let stride = n.pow((n_body - 1 - axis) as u32);
            let kin: f64 = hat
                .iter()
                .enumerate()
                .map(|(idx, c)| 0.5 * momenta[(idx / stride) % n].powi(2) * c.norm_sqr())
                .sum();
            e += kin * hn / n as f64;
        }
        e += psi
            .iter()
            .zip(&diag)
            .map(|(c, v)| v * c.norm_sqr())
            .sum::<f64>()
            * hn;
        total += w * e;
    }
    total
}

/// Completed N-body run: symmetrized one-body marginals at the requested
/// report nodes plus norm/energy diagnostics there.
#[derive(Debug)]
pub struct NBodyRun {
    pub grid: SpaceGrid,
    pub n_body: usize,
    pub hbar: f64,
    pub dt: f64,
    pub report_nodes: Vec<usize>,
    pub report_times: Vec<f64>,
    pub marginals: Vec<DensityOperator>,
    pub norm_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub final_columns: Vec<(f64, Vec<Complex64>)>,
}

/// Propagate a weighted column family for `n_steps` steps, snapshotting the
/// symmetrized one-body marginal at every node listed in `report_nodes`
/// (ascending, each <= n_steps).
pub fn nbody_run(
    columns: &[(f64, Vec<Complex64>)],
    grid: &SpaceGrid,
    n_body: usize,
    hbar: f64,
    pot: &Potential,
    dt: f64,
    n_steps: usize,
    report_nodes: &[usize],
) -> Result<NBodyRun> {
    if !(dt > 0.0) || dt > 0.05 {
        return Err(QcError::StepTooLarge(format!(
            "dt = {dt} outside the supported range (0, 0.05]"
        )));
    }
    let dim = grid.n.pow(n_body as u32);
    if columns.is_empty() || columns.iter().any(|(_, c)| c.len() != dim) {
        return Err(QcError::GridMismatch(format!(
            "columns must be nonempty with length {dim}"
        )));
    }
    let wsum: f64 = columns.iter().map(|(w, _)| w).sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(QcError::InvalidMeasure(format!("column weights sum to {wsum}, not 1")));
    }
    if report_nodes.windows(2).any(|p| p[0] >= p[1]) || report_nodes.last().is_some_and(|&l| l > n_steps)
    {
        return Err(QcError::InvalidConfig(
            "report nodes must be strictly ascending and within the run".into(),
        ));
    }
    let mut prop = Propagator::new(grid, n_body, hbar, pot, dt);
    let mut cols = columns.to_vec();
    let mut marginals = Vec::with_capacity(report_nodes.len());
    let mut norm_series = Vec::with_capacity(report_nodes.len());
    let mut energy_series = Vec::with_capacity(report_nodes.len());
    let mut report_times = Vec::with_capacity(report_nodes.len());
    let hn = grid.h().powi(n_body as i32);
    let mut next_report = 0usize;
    for node in 0..=n_steps {
        if next_report < report_nodes.len() && report_nodes[next_report] == node {
            marginals.push(marginal_from_columns(&cols, grid, n_body)?);
            let norm: f64 = cols
                .iter()
                .map(|(w, c)| w * c.iter().map(|v| v.norm_sqr()).sum::<f64>() * hn)
                .sum();
            norm_series.push(norm);
            energy_series.push(nbody_energy(&cols, grid, n_body, hbar, pot));
            report_times.push(node as f64 * dt);
            next_report += 1;
        }
        if node < n_steps {
            for (_, psi) in cols.iter_mut() {
                prop.step(psi);
            }
        }
    }
    Ok(NBodyRun {
        grid: grid.clone(),
        n_body,
        hbar,
        dt,
        report_nodes: report_nodes.to_vec(),
        report_times,
        marginals,
        norm_series,
        energy_series,
        final_columns: cols,
    })
}
