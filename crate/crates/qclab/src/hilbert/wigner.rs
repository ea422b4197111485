//! Phase-space portraits of density operators.
//!
//! The discrete Wigner transform of a one-body operator with kernel r is
//!
//!   W(x_i, xi) = (1/(pi hbar)) sum_m exp(-2 i xi m h / hbar) h r(x_i + m h, x_i - m h),
//!
//! evaluated on its natural dual momentum grid: n nodes of spacing
//! pi hbar / (n h), centered on zero. On that grid the total mass equals the
//! operator trace exactly, and the transform is pi hbar / h periodic in xi —
//! half the grid's momentum Nyquist range, so states must keep their momentum
//! content inside the window or aliased copies fold in.
//!
//! The nonnegative portrait (Husimi function) is computed two independent
//! ways:
//!   * primary: pointwise coherent matrix elements,
//!       Hus(z) = (2 pi hbar)^{-1} <z|R|z>;
//!   * oracle: Gaussian smoothing of the Wigner table with variance hbar/2
//!     per axis.
//! In exact arithmetic the two coincide; the library checks them against
//! each other rather than deriving one from the other.

use super::coherent::coherent_samples;
use super::{DensityOperator, SpaceGrid};
use crate::error::{QcError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Real-valued table on the tensor grid (grid nodes) x (momentum nodes
/// xi_min + k dxi). Holds Wigner or Husimi values; quadrature weight per
/// cell is h * dxi.
#[derive(Debug, Clone)]
pub struct WignerTable {
    pub grid: SpaceGrid,
    pub xi_min: f64,
    pub dxi: f64,
    pub vals: Array2<f64>,
}

impl WignerTable {
    pub fn n_xi(&self) -> usize {
        self.vals.ncols()
    }

    pub fn xi_node(&self, k: usize) -> f64 {
        self.xi_min + k as f64 * self.dxi
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.vals[[i, k]]
    }

    /// Total mass, h * dxi * sum of values.
    pub fn mass(&self) -> f64 {
        self.vals.sum() * self.grid.h() * self.dxi
    }

    pub fn min_value(&self) -> f64 {
        self.vals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Quadrature of a phase-space observable against the table.
    pub fn moment(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let w = self.grid.h() * self.dxi;
        let mut acc = 0.0;
        for i in 0..self.grid.n {
            let x = self.grid.node(i);
            for k in 0..self.n_xi() {
                acc += f(x, self.xi_node(k)) * self.vals[[i, k]] * w;
            }
        }
        acc
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(|x, xi| 0.5 * (x * x + xi * xi))
    }

    /// L1 distance to a table on the identical layout.
    pub fn l1_distance(&self, other: &WignerTable) -> Result<f64> {
        if self.grid != other.grid
            || self.n_xi() != other.n_xi()
            || (self.xi_min - other.xi_min).abs() > 1e-12
            || (self.dxi - other.dxi).abs() > 1e-15
        {
            return Err(QcError::GridMismatch("tables live on different layouts".into()));
        }
        Ok(self
            .vals
            .iter()
            .zip(other.vals.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.h()
            * self.dxi)
    }

    /// Gaussian smoothing with variance hbar/2 per axis: periodic in xi
    /// (minimal image over the table's window), truncated in x. Kernel
    /// reach 7 standard deviations.
    pub fn heat_smoothed(&self, hbar: f64) -> WignerTable {
        let sigma2 = 0.5 * hbar;
        let sigma = sigma2.sqrt();
        let n = self.grid.n;
        let n_xi = self.n_xi();
        let h = self.grid.h();
        // Pass 1: convolve along x (truncated at the box edges).
        let reach_x = ((7.0 * sigma / h).ceil() as usize).min(n - 1);
        let kx: Vec<f64> = (0..=reach_x)
            .map(|m| {
                let d = m as f64 * h;
                (2.0 * PI * sigma2).sqrt().recip() * (-d * d / (2.0 * sigma2)).exp() * h
            })
            .collect();
        let mut mid = Array2::<f64>::zeros((n, n_xi));
        for i in 0..n {
            let lo = i.saturating_sub(reach_x);
            let hi = (i + reach_x).min(n - 1);
            for ip in lo..=hi {
                let kw = kx[i.abs_diff(ip)];
                for k in 0..n_xi {
                    mid[[i, k]] += kw * self.vals[[ip, k]];
                }
            }
        }
        // Pass 2: convolve along xi (periodic over the natural window).
        let period = n_xi as f64 * self.dxi;
        let reach_xi = ((7.0 * sigma / self.dxi).ceil() as usize).min(n_xi / 2);
        let kxi: Vec<f64> = (0..=reach_xi)
            .map(|m| {
                let d = (m as f64 * self.dxi).min(period - m as f64 * self.dxi);
                (2.0 * PI * sigma2).sqrt().recip() * (-d * d / (2.0 * sigma2)).exp() * self.dxi
            })
            .collect();
        let mut out = Array2::<f64>::zeros((n, n_xi));
        for k in 0..n_xi {
            for dm in -(reach_xi as isize)..=(reach_xi as isize) {
                let kp = (k as isize + dm).rem_euclid(n_xi as isize) as usize;
                let kw = kxi[dm.unsigned_abs()];
                for i in 0..n {
                    out[[i, k]] += kw * mid[[i, kp]];
                }
            }
        }
        WignerTable {
            grid: self.grid.clone(),
            xi_min: self.xi_min,
            dxi: self.dxi,
            vals: out,
        }
    }
}

/// Natural momentum layout for a grid: n nodes of spacing pi hbar / (n h)
/// centered on zero.
fn natural_layout(grid: &SpaceGrid, hbar: f64) -> (f64, f64) {
    let dxi = PI * hbar / (grid.n as f64 * grid.h());
    (-(grid.n as f64 / 2.0) * dxi, dxi)
}

/// Discrete Wigner transform on the natural dual grid.
pub fn wigner_table(r: &DensityOperator, hbar: f64) -> Result<WignerTable> {
    if r.n_body != 1 {
        return Err(QcError::UnsupportedDimension(
            "Wigner tables are built from one-body operators".into(),
        ));
    }
    let n = r.grid.n;
    let (xi_min, dxi) = natural_layout(&r.grid, hbar);
    // Phase factor for (k, m): exp(-2 i xi_k m h / hbar) = root[(k m) mod n] * (-1)^m
    // with root[j] = exp(-2 pi i j / n), from xi_k = (k - n/2) dxi.
    let root: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    let mut vals = Array2::<f64>::zeros((n, n));
    let scale = 1.0 / (PI * hbar);
    for i in 0..n {
        let mmax = i.min(n - 1 - i) as isize;
        for m in -mmax..=mmax {
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let v = r.mat[[(i as isize + m) as usize, (i as isize - m) as usize]] * sign;
            // Walk k with the phase index advancing by m (mod n) per step.
            let step = m.rem_euclid(n as isize) as usize;
            let mut idx = 0usize;
            for k in 0..n {
                vals[[i, k]] += (v * root[idx]).re;
                idx += step;
                if idx >= n {
                    idx -= n;
                }
            }
        }
    }
    vals.mapv_inplace(|v| v * scale);
    Ok(WignerTable {
        grid: r.grid.clone(),
        xi_min,
        dxi,
        vals,
    })
}

/// Husimi values at arbitrary phase points via coherent matrix elements.
pub fn husimi_points(r: &DensityOperator, hbar: f64, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    if r.n_body != 1 {
        return Err(QcError::UnsupportedDimension(
            "Husimi evaluation needs a one-body operator".into(),
        ));
    }
    let h = r.grid.h();
    let norm = h / (2.0 * PI * hbar);
    Ok(points
        .iter()
        .map(|&(x0, xi0)| {
            let z = coherent_samples(&r.grid, hbar, x0, xi0);
            let mut acc = Complex64::default();
            for i in 0..r.grid.n {
                let zi = z[i].conj();
                let row = r.mat.row(i);
                let mut rowacc = Complex64::default();
                for (m, zj) in row.iter().zip(&z) {
                    rowacc += m * zj;
                }
                acc += zi * rowacc;
            }
            (acc * norm).re
        })
        .collect())
}

/// Husimi values of a weighted-column mixture sum_k w_k |psi_k><psi_k|
/// without assembling the operator: Hus(z) = (2 pi hbar)^{-1} sum_k w_k |<z|psi_k>|^2.
pub fn husimi_from_columns(
    grid: &SpaceGrid,
    hbar: f64,
    columns: &[(f64, Vec<Complex64>)],
    points: &[(f64, f64)],
) -> Vec<f64> {
    let h = grid.h();
    let norm = 1.0 / (2.0 * PI * hbar);
    points
        .iter()
        .map(|&(x0, xi0)| {
            let z = coherent_samples(grid, hbar, x0, xi0);
            columns
                .iter()
                .map(|(w, psi)| {
                    let ip: Complex64 = z.iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
                    w * (ip * h).norm_sqr()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Husimi table on the natural dual grid (primary route). The coherent
/// quadratic form is regrouped over kernel anti-diagonals, which prices a
/// full row of momentum nodes from one diagonal sweep.
pub fn husimi_table(r: &DensityOperator, hbar: f64) -> Result<WignerTable> {
    if r.n_body != 1 {
        return Err(QcError::UnsupportedDimension(
            "Husimi tables are built from one-body operators".into(),
        ));
    }
    let n = r.grid.n;
    let h = r.grid.h();
    let (xi_min, dxi) = natural_layout(&r.grid, hbar);
    let amp = (PI * hbar).powf(-0.25);
    let mut vals = Array2::<f64>::zeros((n, n));
    let mut g = vec![0.0; n];
    let mut diag = vec![Complex64::default(); n];
    for i0 in 0..n {
        let x0 = r.grid.node(i0);
        for (i, gi) in g.iter_mut().enumerate() {
            let dy = r.grid.node(i) - x0;
            *gi = amp * (-dy * dy / (2.0 * hbar)).exp();
        }
        // S_d = h sum_{i-j=d} g_i g_j M_ij for d >= 0 (negative d by symmetry).
        for (d, s) in diag.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for j in 0..(n - d) {
                acc += r.mat[[j + d, j]] * (g[j + d] * g[j]);
            }
            *s = acc * h;
        }
        // Hus(x0, xi) = (2 pi hbar)^{-1} (S_0 + 2 Re sum_{d>=1} S_d e^{-i xi d h / hbar}).
        for k in 0..n {
            let xi = xi_min + k as f64 * dxi;
            let rot = Complex64::from_polar(1.0, -xi * h / hbar);
            let mut phase = rot;
            let mut acc = diag[0].re;
            for s in diag.iter().skip(1) {
                acc += 2.0 * (s * phase).re;
                phase *= rot;
            }
            vals[[i0, k]] = acc / (2.0 * PI * hbar);
        }
    }
    Ok(WignerTable {
        grid: r.grid.clone(),
        xi_min,
        dxi,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent::coherent_state;
    use crate::hilbert::toeplitz::toeplitz_density;
    use crate::hilbert::WaveFunction;
    use crate::phasespace::{Particle, ParticleCloud};
    use approx::assert_abs_diff_eq;

    fn lab_grid() -> SpaceGrid {
        SpaceGrid::new(-2.0 * PI, 2.0 * PI, 128).unwrap()
    }

    /// Superposition of two packets: interference makes the Wigner transform
    /// negative between them.
    fn cat_state(grid: &SpaceGrid, hbar: f64) -> WaveFunction {
        let a = coherent_state(grid, hbar, -1.0, 0.5).unwrap();
        let b = coherent_state(grid, hbar, 1.2, -0.3).unwrap();
        let sum: Vec<Complex64> = a.psi.iter().zip(&b.psi).map(|(x, y)| x + y).collect();
        WaveFunction::from_samples(grid.clone(), sum).unwrap()
    }

    #[test]
    fn wigner_mass_equals_trace_exactly() {
        let grid = lab_grid();
        let hbar = 0.5;
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let w = wigner_table(&r, hbar).unwrap();
        assert_abs_diff_eq!(w.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wigner_of_coherent_state_is_the_minimal_gaussian() {
        let grid = lab_grid();
        let hbar = 0.5;
        let (x0, xi0) = (0.4, -0.6);
        let r = DensityOperator::from_pure(&coherent_state(&grid, hbar, x0, xi0).unwrap());
        let w = wigner_table(&r, hbar).unwrap();
        for &(i, k) in &[(60usize, 60usize), (64, 58), (70, 66), (55, 64)] {
            let x = grid.node(i);
            let xi = w.xi_node(k);
            let expect = (PI * hbar).recip()
                * (-((x - x0).powi(2) + (xi - xi0).powi(2)) / hbar).exp();
            assert_abs_diff_eq!(w.value(i, k), expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn wigner_position_marginal_is_the_kernel_diagonal() {
        let grid = lab_grid();
        let hbar = 0.5;
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let w = wigner_table(&r, hbar).unwrap();
        for i in (0..grid.n).step_by(17) {
            let marginal: f64 = (0..w.n_xi()).map(|k| w.value(i, k)).sum::<f64>() * w.dxi;
            assert_abs_diff_eq!(marginal, r.mat[[i, i]].re / grid.h(), epsilon = 1e-10);
        }
    }

    #[test]
    fn cat_state_wigner_is_negative_somewhere_husimi_is_not() {
        let grid = lab_grid();
        let hbar = 0.5;
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let w = wigner_table(&r, hbar).unwrap();
        assert!(w.min_value() < -0.01);
        let hus = husimi_table(&r, hbar).unwrap();
        assert!(hus.min_value() > -1e-12);
    }

    #[test]
    fn husimi_routes_agree_in_l1() {
        let grid = lab_grid();
        for &hbar in &[0.5, 0.25] {
            let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
            let primary = husimi_table(&r, hbar).unwrap();
            let oracle = wigner_table(&r, hbar).unwrap().heat_smoothed(hbar);
            let d = primary.l1_distance(&oracle).unwrap();
            assert!(d < 1e-6, "Husimi routes differ by {d} in L1 at hbar = {hbar}");
        }
    }

    #[test]
    fn husimi_table_matches_pointwise_route() {
        let grid = lab_grid();
        let hbar = 0.5;
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let tab = husimi_table(&r, hbar).unwrap();
        let idx = [(40usize, 62usize), (64, 64), (80, 70)];
        let pts: Vec<(f64, f64)> = idx
            .iter()
            .map(|&(i, k)| (grid.node(i), tab.xi_node(k)))
            .collect();
        let direct = husimi_points(&r, hbar, &pts).unwrap();
        for (&(i, k), d) in idx.iter().zip(&direct) {
            assert_abs_diff_eq!(tab.value(i, k), *d, epsilon = 1e-12);
        }
    }

    #[test]
    fn husimi_of_quantized_atom_is_the_width_hbar_gaussian() {
        let grid = lab_grid();
        let hbar = 0.25;
        let cloud = ParticleCloud::new(vec![Particle { x: 0.3, xi: 0.1, w: 1.0 }]).unwrap();
        let r = toeplitz_density(&grid, hbar, &cloud).unwrap();
        let pts = [(0.3, 0.1), (0.8, 0.1), (0.3, -0.7)];
        let vals = husimi_points(&r, hbar, &pts).unwrap();
        for (&(x, xi), v) in pts.iter().zip(&vals) {
            let expect = (2.0 * PI * hbar).recip()
                * (-((x - 0.3).powi(2) + (xi - 0.1).powi(2)) / (2.0 * hbar)).exp();
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn trace_pairing_between_quantization_and_husimi() {
        // trace(T[mu] R) = 2 pi hbar * sum_k w_k Hus[R](z_k), with the two
        // sides priced through unrelated code paths.
        let grid = lab_grid();
        let hbar = 0.5;
        let cloud = ParticleCloud::new(vec![
            Particle { x: 0.2, xi: 0.5, w: 0.4 },
            Particle { x: -0.7, xi: -0.2, w: 0.6 },
        ])
        .unwrap();
        let t = toeplitz_density(&grid, hbar, &cloud).unwrap();
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let lhs = t.trace_product(&r).unwrap();
        let pts: Vec<(f64, f64)> = cloud.particles.iter().map(|p| (p.x, p.xi)).collect();
        let hus = husimi_points(&r, hbar, &pts).unwrap();
        let rhs: f64 = cloud
            .particles
            .iter()
            .zip(&hus)
            .map(|(p, v)| p.w * v * 2.0 * PI * hbar)
            .sum();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn husimi_moments_sit_half_hbar_above_operator_moments() {
        let grid = lab_grid();
        let hbar = 0.5;
        let r = DensityOperator::from_pure(&cat_state(&grid, hbar));
        let hus = husimi_table(&r, hbar).unwrap();
        let m2_op = r.second_moment(hbar).unwrap();
        assert_abs_diff_eq!(hus.second_moment(), m2_op + 0.5 * hbar, epsilon = 1e-6);
        assert_abs_diff_eq!(hus.mass(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn column_route_matches_assembled_mixture() {
        let grid = lab_grid();
        let hbar = 0.5;
        let a = coherent_state(&grid, hbar, 0.4, 0.2).unwrap();
        let b = cat_state(&grid, hbar);
        let r = DensityOperator::mixture(&[(0.3, a.clone()), (0.7, b.clone())]).unwrap();
        let pts = [(0.1, 0.3), (-0.5, 0.0)];
        let direct = husimi_points(&r, hbar, &pts).unwrap();
        let cols = vec![(0.3, a.psi.clone()), (0.7, b.psi.clone())];
        let from_cols = husimi_from_columns(&grid, hbar, &cols, &pts);
        for (u, v) in direct.iter().zip(&from_cols) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-12);
        }
    }
}
