//! Dense complex linear algebra for operator-sized matrices.
//!
//! Everything here targets Hermitian matrices of dimension up to a few
//! hundred, which is all the laboratory ever materializes: one-body operators
//! live on grids of at most 128 points and the exact coupling solver works on
//! spaces of dimension <= 16. A cyclic Jacobi eigensolver is plenty at that
//! scale and keeps the crate free of external BLAS/LAPACK plumbing.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{QcError, Result};

pub type CMat = Array2<Complex64>;

/// Hermitian part (A + A*)/2; cheap guard against floating-point drift.
pub fn hermitian_part(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut h = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)].conj());
        }
    }
    h
}

pub fn adjoint(a: &CMat) -> CMat {
    let (m, n) = (a.nrows(), a.ncols());
    let mut t = CMat::zeros((n, m));
    for i in 0..m {
        for j in 0..n {
            t[(j, i)] = a[(i, j)].conj();
        }
    }
    t
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute deviation from Hermitian symmetry.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A += w * v v* (outer product of a column vector, real weight).
pub fn add_scaled_outer(a: &mut CMat, w: f64, v: &[Complex64]) {
    let n = v.len();
    debug_assert_eq!(a.nrows(), n);
    for i in 0..n {
        let wi = Complex64::new(w, 0.0) * v[i];
        let row = a.row_mut(i);
        let row = row.into_slice().expect("row-major layout");
        for (j, rj) in row.iter_mut().enumerate() {
            *rj += wi * v[j].conj();
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvector
/// columns, so `a = V diag(w) V*` up to roundoff.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(QcError::GridMismatch(format!(
            "eigh expects a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let defect = hermiticity_defect(a);
    let scale = frobenius_norm(a).max(1e-300);
    if defect > 1e-8 * scale.max(1.0) {
        return Err(QcError::GridMismatch(format!(
            "eigh expects a Hermitian matrix (defect {defect:.3e})"
        )));
    }
    let mut m = hermitian_part(a);
    let mut v = CMat::eye(n);
    if n <= 1 {
        let w = if n == 1 { vec![m[(0, 0)].re] } else { vec![] };
        return Ok((w, v));
    }

    let tol = 1e-30_f64; // squared threshold relative to Frobenius scale
    let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let thresh2 = tol * fro2.max(1e-300);
    let max_sweeps = 64;

    for _sweep in 0..max_sweeps {
        let mut off2 = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += m[(p, q)].norm_sqr();
            }
        }
        if off2 <= thresh2 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r * r <= thresh2 / (n * n) as f64 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / r; // e^{i phi}
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // U differs from the identity in rows/cols p,q:
                //   U[p][p]=c        U[p][q]=s
                //   U[q][p]=-s/phase U[q][q]=c/phase
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -Complex64::new(s, 0.0) * phase.conj();
                let uqq = Complex64::new(c, 0.0) * phase.conj();

                // M <- M U (columns p,q of every row)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * upp + miq * uqp;
                    m[(i, q)] = mip * upq + miq * uqq;
                }
                // M <- U* M (rows p,q of every column)
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = upp.conj() * mpj + uqp.conj() * mqj;
                    m[(q, j)] = upq.conj() * mpj + uqq.conj() * mqj;
                }
                // V <- V U
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * upp + viq * uqp;
                    v[(i, q)] = vip * upq + viq * uqq;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let w: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    idx.sort_by(|&i, &j| w[i].partial_cmp(&w[j]).expect("finite eigenvalues"));
    let w_sorted: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
    let mut v_sorted = CMat::zeros((n, n));
    for (new_col, &old_col) in idx.iter().enumerate() {
        for i in 0..n {
            v_sorted[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok((w_sorted, v_sorted))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    Ok(eigh(a)?.0)
}

pub fn min_eigenvalue(a: &CMat) -> Result<f64> {
    Ok(eigvalsh(a)?[0])
}

/// Projection onto the positive-semidefinite cone in Frobenius norm.
pub fn psd_project(a: &CMat) -> Result<CMat> {
    let (w, v) = eigh(a)?;
    let n = w.len();
    let mut out = CMat::zeros((n, n));
    for (k, &wk) in w.iter().enumerate() {
        if wk > 0.0 {
            let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            add_scaled_outer(&mut out, wk, &col);
        }
    }
    Ok(hermitian_part(&out))
}

/// L2 norm of a complex vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Least-squares slope of y against x.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_diagonal() {
        let mut a = CMat::zeros((3, 3));
        a[(0, 0)] = c(3.0, 0.0);
        a[(1, 1)] = c(-1.0, 0.0);
        a[(2, 2)] = c(2.0, 0.0);
        let (w, _) = eigh(&a).unwrap();
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigh_known_complex_2x2() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let mut a = CMat::zeros((2, 2));
        a[(0, 0)] = c(2.0, 0.0);
        a[(0, 1)] = c(0.0, 1.0);
        a[(1, 0)] = c(0.0, -1.0);
        a[(1, 1)] = c(2.0, 0.0);
        let (w, v) = eigh(&a).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 3.0, epsilon = 1e-12);
        // Reconstruct and compare.
        let mut rec = CMat::zeros((2, 2));
        for k in 0..2 {
            let col: Vec<Complex64> = (0..2).map(|i| v[(i, k)]).collect();
            add_scaled_outer(&mut rec, w[k], &col);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(rec[(i, j)].re, a[(i, j)].re, epsilon = 1e-12);
                assert_abs_diff_eq!(rec[(i, j)].im, a[(i, j)].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eigh_random_hermitian_reconstructs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let mut a = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let a = hermitian_part(&a);
        let (w, v) = eigh(&a).unwrap();
        for k in 1..n {
            assert!(w[k] >= w[k - 1]);
        }
        let mut rec = CMat::zeros((n, n));
        for k in 0..n {
            let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            add_scaled_outer(&mut rec, w[k], &col);
        }
        let diff = frobenius_norm(&(&rec - &a));
        assert!(diff < 1e-10 * frobenius_norm(&a).max(1.0), "diff={diff:.3e}");
        // Orthonormal eigenvectors.
        let vtv = adjoint(&v).dot(&v);
        let eye = CMat::eye(n);
        assert!(frobenius_norm(&(&vtv - &eye)) < 1e-10);
    }

    #[test]
    fn psd_projection_clamps_negative_part() {
        let mut a = CMat::zeros((2, 2));
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(-2.0, 0.0);
        let p = psd_project(&a).unwrap();
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(1, 1)].re, 0.0, epsilon = 1e-12);
        assert!(min_eigenvalue(&p).unwrap() >= -1e-12);
    }

    #[test]
    fn regression_slope_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert_abs_diff_eq!(regression_slope(&x, &y), 2.0, epsilon = 1e-12);
    }
}
