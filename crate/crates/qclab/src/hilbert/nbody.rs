//! Tensor-space helpers for N-body wavefunctions.
//!
//! An N-body wavefunction lives on the n^N lattice in row-major body order:
//! the flat index of (i_1, ..., i_N) is sum_j i_j n^(N-1-j), body 1 most
//! significant. States stay as coefficient vectors (n^N complex numbers);
//! dense N-body operators are never materialized. Reduced one-body operators
//! come straight from the coefficients:
//!
//!   M1[i, j] = h^N sum_rest psi[(i, rest)] conj(psi[(j, rest)]),
//!
//! the matricized outer product, which lands directly in the stored
//! one-body convention M = h * kernel.

use super::{DensityOperator, SpaceGrid, WaveFunction};
use crate::error::{QcError, Result};
use crate::linalg::add_scaled_outer;
use ndarray::Array2;
use num_complex::Complex64;

/// Product state psi_1 (x) ... (x) psi_N as a flat coefficient vector.
pub fn tensor_product(factors: &[&WaveFunction]) -> Result<Vec<Complex64>> {
    let Some(first) = factors.first() else {
        return Err(QcError::InvalidConfig("tensor product needs at least one factor".into()));
    };
    let n = first.grid.n;
    if factors.iter().any(|f| f.grid != first.grid) {
        return Err(QcError::GridMismatch("tensor factors live on different grids".into()));
    }
    let dim = n
        .checked_pow(factors.len() as u32)
        .filter(|d| *d <= 1 << 22)
        .ok_or_else(|| {
            QcError::MemoryBudget(format!(
                "tensor space {}^{} exceeds the coefficient budget",
                n,
                factors.len()
            ))
        })?;
    let mut out = vec![Complex64::new(1.0, 0.0); 1];
    out.reserve(dim);
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * n);
        for v in &out {
            for c in &f.psi {
                next.push(v * c);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Norm of an N-body coefficient vector: sqrt(h^N sum |psi|^2).
pub fn nbody_norm(psi: &[Complex64], h: f64, n_body: usize) -> f64 {
    (psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * h.powi(n_body as i32)).sqrt()
}

/// Reduced one-body operator of a pure N-body state, tracing out every body
/// except `body` (0-based).
pub fn marginal_from_wavefunction(
    psi: &[Complex64],
    grid: &SpaceGrid,
    n_body: usize,
    body: usize,
) -> Result<DensityOperator> {
    let n = grid.n;
    let dim = n.pow(n_body as u32);
    if psi.len() != dim {
        return Err(QcError::GridMismatch(format!(
            "coefficient vector length {} is not {}^{}",
            psi.len(),
            n,
            n_body
        )));
    }
    if body >= n_body {
        return Err(QcError::MarginalOutOfRange(format!(
            "body {body} out of range for {n_body} bodies"
        )));
    }
    let stride = n.pow((n_body - 1 - body) as u32);
    let n_left = n.pow(body as u32);
    let n_right = stride;
    let hn = grid.h().powi(n_body as i32);
    let mut mat = Array2::zeros((n, n));
    let mut col = vec![Complex64::default(); n];
    for left in 0..n_left {
        let base_l = left * n * stride;
        for right in 0..n_right {
            let base = base_l + right;
            for (i, c) in col.iter_mut().enumerate() {
                *c = psi[base + i * stride];
            }
            add_scaled_outer(&mut mat, hn, &col);
        }
    }
    Ok(DensityOperator {
        grid: grid.clone(),
        n_body: 1,
        mat,
    })
}

/// Body-symmetrized one-body marginal of a weighted family of N-body
/// coefficient columns: (1/N) sum over bodies of the reduced operator,
/// averaged with the column weights.
pub fn marginal_from_columns(
    columns: &[(f64, Vec<Complex64>)],
    grid: &SpaceGrid,
    n_body: usize,
) -> Result<DensityOperator> {
    if columns.is_empty() {
        return Err(QcError::InvalidMeasure("marginal of an empty family".into()));
    }
    let mut acc = Array2::zeros((grid.n, grid.n));
    for (w, psi) in columns {
        for body in 0..n_body {
            let m = marginal_from_wavefunction(psi, grid, n_body, body)?;
            acc = acc + m.mat * Complex64::new(w / n_body as f64, 0.0);
        }
    }
    Ok(DensityOperator {
        grid: grid.clone(),
        n_body: 1,
        mat: acc,
    })
}

/// Apply a body permutation: out(x_1, ..., x_N) = psi(x_{perm[1]}, ..., x_{perm[N]}).
pub fn permute_wavefunction(
    psi: &[Complex64],
    n: usize,
    n_body: usize,
    perm: &[usize],
) -> Result<Vec<Complex64>> {
    if perm.len() != n_body {
        return Err(QcError::InvalidConfig("permutation length must equal the body count".into()));
    }
    let mut seen = vec![false; n_body];
    for &p in perm {
        if p >= n_body || seen[p] {
            return Err(QcError::InvalidConfig("not a permutation of the bodies".into()));
        }
        seen[p] = true;
    }
    let dim = n.pow(n_body as u32);
    if psi.len() != dim {
        return Err(QcError::GridMismatch("coefficient vector has the wrong length".into()));
    }
    let strides: Vec<usize> = (0..n_body).map(|j| n.pow((n_body - 1 - j) as u32)).collect();
    let mut out = vec![Complex64::default(); dim];
    let mut digits = vec![0usize; n_body];
    for (idx, o) in out.iter_mut().enumerate() {
        let mut rem = idx;
        for (d, s) in digits.iter_mut().zip(&strides) {
            *d = rem / s;
            rem %= s;
        }
        let src: usize = (0..n_body).map(|j| digits[perm[j]] * strides[j]).sum();
        *o = psi[src];
    }
    Ok(out)
}

/// Relative deviation of a state from bosonic symmetry: the largest
/// ||P_sigma psi - psi|| / ||psi|| over adjacent transpositions (which
/// generate the full permutation group).
pub fn permutation_defect(psi: &[Complex64], n: usize, n_body: usize) -> Result<f64> {
    let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    if norm2 <= 0.0 {
        return Err(QcError::NotNormalized("zero state has no symmetry defect".into()));
    }
    let mut worst = 0.0_f64;
    for k in 0..n_body.saturating_sub(1) {
        let mut perm: Vec<usize> = (0..n_body).collect();
        perm.swap(k, k + 1);
        let swapped = permute_wavefunction(psi, n, n_body, &perm)?;
        let diff2: f64 = swapped
            .iter()
            .zip(psi)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        worst = worst.max((diff2 / norm2).sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent::coherent_state;
    use approx::assert_abs_diff_eq;

    fn grid32() -> SpaceGrid {
        SpaceGrid::new(-std::f64::consts::PI, std::f64::consts::PI, 32).unwrap()
    }

    #[test]
    fn product_state_is_normalized_and_symmetric_when_factors_match() {
        let grid = grid32();
        let hbar = 0.125;
        let a = coherent_state(&grid, hbar, 0.3, 0.2).unwrap();
        let psi = tensor_product(&[&a, &a, &a]).unwrap();
        assert_abs_diff_eq!(nbody_norm(&psi, grid.h(), 3), 1.0, epsilon = 1e-12);
        assert!(permutation_defect(&psi, grid.n, 3).unwrap() < 1e-13);
    }

    #[test]
    fn distinct_factors_break_symmetry() {
        let grid = grid32();
        let hbar = 0.125;
        let a = coherent_state(&grid, hbar, 0.3, 0.2).unwrap();
        let b = coherent_state(&grid, hbar, -0.5, 0.0).unwrap();
        let psi = tensor_product(&[&a, &b]).unwrap();
        assert!(permutation_defect(&psi, grid.n, 2).unwrap() > 0.5);
    }

    #[test]
    fn marginal_of_product_state_is_the_factor_projector() {
        let grid = grid32();
        let hbar = 0.125;
        let a = coherent_state(&grid, hbar, 0.3, 0.2).unwrap();
        let b = coherent_state(&grid, hbar, -0.4, -0.1).unwrap();
        let psi = tensor_product(&[&a, &b]).unwrap();
        let m0 = marginal_from_wavefunction(&psi, &grid, 2, 0).unwrap();
        let m1 = marginal_from_wavefunction(&psi, &grid, 2, 1).unwrap();
        let pa = DensityOperator::from_pure(&a);
        let pb = DensityOperator::from_pure(&b);
        let d0: f64 = (&m0.mat - &pa.mat).iter().map(|c| c.norm_sqr()).sum();
        let d1: f64 = (&m1.mat - &pb.mat).iter().map(|c| c.norm_sqr()).sum();
        assert!(d0.sqrt() < 1e-12 && d1.sqrt() < 1e-12);
        assert_abs_diff_eq!(m0.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m0.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn permutation_moves_the_marginal() {
        let grid = grid32();
        let hbar = 0.125;
        let a = coherent_state(&grid, hbar, 0.3, 0.2).unwrap();
        let b = coherent_state(&grid, hbar, -0.4, -0.1).unwrap();
        let psi = tensor_product(&[&a, &b]).unwrap();
        let swapped = permute_wavefunction(&psi, grid.n, 2, &[1, 0]).unwrap();
        let m0 = marginal_from_wavefunction(&swapped, &grid, 2, 0).unwrap();
        let pb = DensityOperator::from_pure(&b);
        let d: f64 = (&m0.mat - &pb.mat).iter().map(|c| c.norm_sqr()).sum();
        assert!(d.sqrt() < 1e-12);
    }

    #[test]
    fn symmetrized_column_marginal_averages_the_bodies() {
        let grid = grid32();
        let hbar = 0.125;
        let a = coherent_state(&grid, hbar, 0.3, 0.2).unwrap();
        let b = coherent_state(&grid, hbar, -0.4, -0.1).unwrap();
        let psi = tensor_product(&[&a, &b]).unwrap();
        let m = marginal_from_columns(&[(1.0, psi)], &grid, 2).unwrap();
        let pa = DensityOperator::from_pure(&a);
        let pb = DensityOperator::from_pure(&b);
        let mix = (&pa.mat + &pb.mat) * Complex64::new(0.5, 0.0);
        let d: f64 = (&m.mat - &mix).iter().map(|c| c.norm_sqr()).sum();
        assert!(d.sqrt() < 1e-12);
        assert_abs_diff_eq!(m.trace(), 1.0, epsilon = 1e-12);
    }
}
