//! Discretized Hilbert space: wavefunctions and density operators.
//!
//! Space is a uniform grid of n nodes (n even, for spectral
//! derivatives) on [x_min, x_max), node x_i = x_min + i h. Integrals are node
//! sums times h. A density operator with kernel r(x, y) is stored as the
//! matrix M = h^N r on the node lattice (N = body count), which makes the
//! stored object dimensionless:
//!
//!   trace R   = plain matrix trace of M,
//!   R phi     = plain matrix product M phi on coefficient vectors,
//!   <psi|R|psi> = h^N psi^dag M psi,
//!   projector onto psi = h^N psi psi^dag.
//!
//! Momentum moments are priced by Fourier transform along the first kernel
//! index; position moments read the diagonal.

mod coherent;
mod nbody;
mod storage;
mod toeplitz;
mod wigner;

pub use coherent::{
    coherent_overlap_sq, coherent_state, coherent_state_loose, COHERENT_MARGIN_SIGMAS,
};
pub use nbody::{
    marginal_from_columns, marginal_from_wavefunction, nbody_norm, permutation_defect,
    permute_wavefunction, tensor_product,
};
pub use storage::{load_operator, save_operator, write_eigenvalue_csv};
pub use toeplitz::{toeplitz_apply_uniform, toeplitz_density};
pub use wigner::{husimi_from_columns, husimi_points, husimi_table, wigner_table, WignerTable};

use crate::error::{QcError, Result};
use crate::fftutil::{wavenumbers, FftPlan};
use crate::linalg::{self, CMat};
use ndarray::Array2;
use num_complex::Complex64;

/// Uniform spatial grid with a power-of-two node count.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl SpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(QcError::GridMismatch("space grid bounds must be ordered".into()));
        }
        if n < 8 || n % 2 != 0 {
            return Err(QcError::GridMismatch(format!(
                "space grid size {n} must be even and >= 8"
            )));
        }
        Ok(SpaceGrid { x_min, x_max, n })
    }

    pub fn len_box(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn h(&self) -> f64 {
        self.len_box() / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Momentum values hbar k on the FFT frequency layout.
    pub fn momenta(&self, hbar: f64) -> Vec<f64> {
        wavenumbers(self.n, self.len_box())
            .into_iter()
            .map(|k| hbar * k)
            .collect()
    }

    /// Largest momentum representable without aliasing.
    pub fn momentum_nyquist(&self, hbar: f64) -> f64 {
        hbar * std::f64::consts::PI / self.h()
    }
}

/// One-body wavefunction on a [`SpaceGrid`], normalized so h sum |psi|^2 = 1.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub grid: SpaceGrid,
    pub psi: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: SpaceGrid, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != grid.n {
            return Err(QcError::GridMismatch(format!(
                "wavefunction length {} does not match grid size {}",
                psi.len(),
                grid.n
            )));
        }
        let wf = WaveFunction { grid, psi };
        let nrm = wf.norm();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(QcError::NotNormalized(format!("norm {nrm} differs from 1 beyond 1e-9")));
        }
        Ok(wf)
    }

    /// Normalize arbitrary samples into a wavefunction.
    pub fn from_samples(grid: SpaceGrid, mut psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != grid.n {
            return Err(QcError::GridMismatch(format!(
                "sample length {} does not match grid size {}",
                psi.len(),
                grid.n
            )));
        }
        let nrm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.h();
        if nrm2 <= 0.0 {
            return Err(QcError::NotNormalized("cannot normalize the zero vector".into()));
        }
        let scale = nrm2.sqrt().recip();
        for c in psi.iter_mut() {
            *c *= scale;
        }
        Ok(WaveFunction { grid, psi })
    }

    pub fn norm(&self) -> f64 {
        (self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.h()).sqrt()
    }

    /// L^2 inner product <self|other> = h sum conj(self) other.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.h()
    }

    /// Position density |psi|^2 at the nodes.
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let h = self.grid.h();
        self.psi
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.node(i) * c.norm_sqr() * h)
            .sum()
    }
}

/// Density operator on N-fold tensor space, stored as M = h^N kernel.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub grid: SpaceGrid,
    pub n_body: usize,
    pub mat: CMat,
}

impl DensityOperator {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn zero(grid: SpaceGrid, n_body: usize) -> Result<Self> {
        let dim = grid
            .n
            .checked_pow(n_body as u32)
            .filter(|d| *d <= 4096)
            .ok_or_else(|| {
                QcError::MemoryBudget(format!(
                    "dense operator of dimension {}^{n_body} exceeds the 4096 limit",
                    grid.n
                ))
            })?;
        Ok(DensityOperator {
            grid,
            n_body,
            mat: Array2::zeros((dim, dim)),
        })
    }

    /// Rank-one projector h |psi><psi|.
    pub fn from_pure(wf: &WaveFunction) -> Self {
        let n = wf.grid.n;
        let mut mat = Array2::zeros((n, n));
        linalg::add_scaled_outer(&mut mat, wf.grid.h(), &wf.psi);
        DensityOperator {
            grid: wf.grid.clone(),
            n_body: 1,
            mat,
        }
    }

    /// Convex mixture sum_k w_k |psi_k><psi_k| (weights must sum to 1).
    pub fn mixture(terms: &[(f64, WaveFunction)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(QcError::InvalidMeasure("mixture needs at least one term".into()));
        };
        let grid = first.grid.clone();
        let total: f64 = terms.iter().map(|(w, _)| *w).sum();
        if terms.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(QcError::InvalidMeasure(
                "mixture weights must be >= 0 and sum to 1".into(),
            ));
        }
        let mut mat = Array2::zeros((grid.n, grid.n));
        for (w, wf) in terms {
            if wf.grid != grid {
                return Err(QcError::GridMismatch("mixture terms live on different grids".into()));
            }
            linalg::add_scaled_outer(&mut mat, w * grid.h(), &wf.psi);
        }
        Ok(DensityOperator { grid, n_body: 1, mat })
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.mat).re
    }

    /// trace R^2; equals sum |M_ij|^2 for Hermitian M.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.mat)
    }

    /// <psi|R|psi> for a one-body operator.
    pub fn expectation(&self, wf: &WaveFunction) -> Result<f64> {
        if self.n_body != 1 || wf.grid != self.grid {
            return Err(QcError::GridMismatch(
                "expectation needs a one-body operator on the wavefunction grid".into(),
            ));
        }
        let v = self.mat.dot(&ndarray::ArrayView1::from(&wf.psi));
        let q: Complex64 = wf
            .psi
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok((q * self.grid.h()).re)
    }

    /// Dimensionless trace product trace(A B) of two stored operators.
    pub fn trace_product(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(QcError::GridMismatch("trace product needs equal dimensions".into()));
        }
        // trace(AB) = sum_ij A_ij B_ji; with both Hermitian this is real.
        let mut acc = Complex64::default();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.mat[[i, j]] * other.mat[[j, i]];
            }
        }
        Ok(acc.re)
    }

    /// Position moment trace(x_hat^pow R) from the kernel diagonal.
    pub fn moment_x(&self, pow: u32) -> Result<f64> {
        if self.n_body != 1 {
            return Err(QcError::UnsupportedDimension(
                "position moments are defined for one-body operators".into(),
            ));
        }
        Ok((0..self.grid.n)
            .map(|i| self.grid.node(i).powi(pow as i32) * self.mat[[i, i]].re)
            .sum())
    }

    /// Momentum moment trace(xi_hat^pow R) by Fourier transform along the
    /// first kernel index: trace(xi^p R) = sum_j [F^-1 ((hbar k)^p F M_:j)]_j.
    pub fn moment_xi(&self, hbar: f64, pow: u32) -> Result<f64> {
        if self.n_body != 1 {
            return Err(QcError::UnsupportedDimension(
                "momentum moments are defined for one-body operators".into(),
            ));
        }
        let n = self.grid.n;
        let plan = FftPlan::new(n);
        let mut scratch = plan.make_scratch();
        let momenta = self.grid.momenta(hbar);
        let mut acc = Complex64::default();
        let mut col = vec![Complex64::default(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = self.mat[[i, j]];
            }
            plan.forward(&mut col, &mut scratch);
            for (c, p) in col.iter_mut().zip(&momenta) {
                *c *= p.powi(pow as i32);
            }
            plan.inverse(&mut col, &mut scratch);
            acc += col[j];
        }
        Ok(acc.re)
    }

    /// Second moment trace((x^2 + xi^2)/2 R).
    pub fn second_moment(&self, hbar: f64) -> Result<f64> {
        Ok(0.5 * (self.moment_x(2)? + self.moment_xi(hbar, 2)?))
    }

    /// Ascending eigenvalues (occupation numbers for a state).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(&self.mat)
    }

    /// Smallest eigenvalue; nonnegative up to solver tolerance for a state.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eigvalsh(&self.mat)?[0])
    }

    /// Consistency checks for a physical state: unit trace, hermiticity,
    /// and (optionally, it costs an eigensolve) positivity.
    pub fn validate(&self, check_positivity: bool) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-6 {
            return Err(QcError::InvalidMeasure(format!("operator trace {tr} is not 1")));
        }
        let defect = self.hermiticity_defect();
        if defect > 1e-8 {
            return Err(QcError::InvalidMeasure(format!(
                "hermiticity defect {defect} exceeds 1e-8"
            )));
        }
        if check_positivity {
            let lam = self.min_eigenvalue()?;
            if lam < -1e-8 {
                return Err(QcError::InvalidMeasure(format!(
                    "negative eigenvalue {lam} below -1e-8"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_wf(grid: &SpaceGrid, x0: f64, sigma: f64) -> WaveFunction {
        let psi: Vec<Complex64> = (0..grid.n)
            .map(|i| {
                let u = (grid.node(i) - x0) / sigma;
                Complex64::new((-0.25 * u * u).exp(), 0.0)
            })
            .collect();
        WaveFunction::from_samples(grid.clone(), psi).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(SpaceGrid::new(-1.0, 1.0, 63).is_err());
        assert!(SpaceGrid::new(-1.0, 1.0, 6).is_err());
        assert!(SpaceGrid::new(1.0, -1.0, 64).is_err());
        assert!(SpaceGrid::new(-1.0, 1.0, 64).is_ok());
        assert!(SpaceGrid::new(-1.0, 1.0, 10).is_ok());
    }

    #[test]
    fn normalization_and_inner_product() {
        let grid = SpaceGrid::new(-6.0, 6.0, 128).unwrap();
        let wf = gaussian_wf(&grid, 0.4, 0.8);
        assert_abs_diff_eq!(wf.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wf.inner(&wf).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wf.mean_position(), 0.4, epsilon = 1e-9);
    }

    #[test]
    fn pure_state_operator_is_a_unit_trace_projector() {
        let grid = SpaceGrid::new(-6.0, 6.0, 64).unwrap();
        let wf = gaussian_wf(&grid, -0.3, 0.7);
        let r = DensityOperator::from_pure(&wf);
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.purity(), 1.0, epsilon = 1e-12);
        assert!(r.hermiticity_defect() < 1e-14);
        assert_abs_diff_eq!(r.expectation(&wf).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_trace_and_purity() {
        let grid = SpaceGrid::new(-6.0, 6.0, 64).unwrap();
        let a = gaussian_wf(&grid, -1.0, 0.5);
        let b = gaussian_wf(&grid, 1.2, 0.5);
        let r = DensityOperator::mixture(&[(0.6, a.clone()), (0.4, b.clone())]).unwrap();
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-12);
        // purity = w1^2 + w2^2 + 2 w1 w2 |<a|b>|^2.
        let s = a.inner(&b).norm_sqr();
        assert_abs_diff_eq!(r.purity(), 0.36 + 0.16 + 0.48 * s, epsilon = 1e-12);
        r.validate(true).unwrap();
    }

    #[test]
    fn gaussian_moments_match_closed_form() {
        // For the real Gaussian with position variance s^2:
        //   <x> = x0, <x^2> = x0^2 + s^2, <xi> = 0, <xi^2> = hbar^2/(4 s^2).
        let grid = SpaceGrid::new(-6.0, 6.0, 128).unwrap();
        let (x0, sigma, hbar) = (0.35, 0.6, 0.5);
        let r = DensityOperator::from_pure(&gaussian_wf(&grid, x0, sigma));
        assert_abs_diff_eq!(r.moment_x(1).unwrap(), x0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.moment_x(2).unwrap(), x0 * x0 + sigma * sigma, epsilon = 1e-9);
        assert_abs_diff_eq!(r.moment_xi(hbar, 1).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            r.moment_xi(hbar, 2).unwrap(),
            hbar * hbar / (4.0 * sigma * sigma),
            epsilon = 1e-9
        );
        let m2 = 0.5 * (x0 * x0 + sigma * sigma + hbar * hbar / (4.0 * sigma * sigma));
        assert_abs_diff_eq!(r.second_moment(hbar).unwrap(), m2, epsilon = 1e-9);
    }

    #[test]
    fn trace_product_matches_overlap() {
        // trace(|a><a| |b><b|) = |<a|b>|^2.
        let grid = SpaceGrid::new(-6.0, 6.0, 64).unwrap();
        let a = gaussian_wf(&grid, -0.6, 0.5);
        let b = gaussian_wf(&grid, 0.8, 0.7);
        let ra = DensityOperator::from_pure(&a);
        let rb = DensityOperator::from_pure(&b);
        assert_abs_diff_eq!(
            ra.trace_product(&rb).unwrap(),
            a.inner(&b).norm_sqr(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn eigenvalues_of_a_mixture_are_its_weights() {
        let grid = SpaceGrid::new(-8.0, 8.0, 64).unwrap();
        // Far-separated components: overlap is negligible, so the spectrum
        // is {0, ..., 0, 0.3, 0.7}.
        let a = gaussian_wf(&grid, -4.0, 0.4);
        let b = gaussian_wf(&grid, 4.0, 0.4);
        let r = DensityOperator::mixture(&[(0.3, a), (0.7, b)]).unwrap();
        let eigs = r.eigenvalues().unwrap();
        let top2 = &eigs[eigs.len() - 2..];
        assert_abs_diff_eq!(top2[0], 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(top2[1], 0.7, epsilon = 1e-9);
        assert!(eigs[0] > -1e-12);
    }
}
