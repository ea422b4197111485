//! FFT plumbing shared by the spectral propagators and transforms.
//!
//! Conventions: `forward` computes X_k = sum_m x_m e^{-2 pi i k m / n}
//! (unnormalized), `inverse` includes the 1/n factor, and `wavenumbers`
//! returns the physical wavenumbers 2 pi s / L with s = 0,1,...,n/2-1,
//! -n/2,...,-1, so index order matches the FFT output.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Paired forward/inverse plans for a fixed length.
pub struct FftPlan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPlan {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        let len = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::default(); len]
    }

    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process_with_scratch(buf, scratch);
    }

    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process_with_scratch(buf, scratch);
        let inv_n = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= inv_n;
        }
    }
}

/// Physical wavenumbers for a periodic box of length `box_len`, FFT index
/// order (non-negative branch first, then the negative branch).
pub fn wavenumbers(n: usize, box_len: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / box_len;
    (0..n)
        .map(|j| {
            let s = if j < n.div_ceil(2) {
                j as isize
            } else {
                j as isize - n as isize
            };
            base * s as f64
        })
        .collect()
}

/// In-place FFT of every line along `axis` of a row-major array with the
/// given shape. `forward = false` applies the normalized inverse.
pub fn fft_axis(
    data: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    plan: &FftPlan,
    scratch: &mut [Complex64],
    line: &mut Vec<Complex64>,
    forward: bool,
) {
    let n_axis = shape[axis];
    debug_assert_eq!(plan.len(), n_axis);
    let total: usize = shape.iter().product();
    debug_assert_eq!(data.len(), total);
    let stride: usize = shape[axis + 1..].iter().product();
    let lines = total / n_axis;
    line.resize(n_axis, Complex64::default());
    for l in 0..lines {
        let inner = l % stride;
        let outer = l / stride;
        let base = outer * stride * n_axis + inner;
        for (i, li) in line.iter_mut().enumerate() {
            *li = data[base + i * stride];
        }
        if forward {
            plan.forward(line, scratch);
        } else {
            plan.inverse(line, scratch);
        }
        for (i, li) in line.iter().enumerate() {
            data[base + i * stride] = *li;
        }
    }
}

/// Circular convolution (f * g)(x_i) = sum_j f(x_j) g(x_i - x_j) h on a
/// uniform periodic grid. `f` is sampled at the grid points while `g` must be
/// sampled at displacements m*h for m = 0..n-1 (an L-periodic kernel makes
/// the wrap-around branch automatic).
pub fn periodic_convolution(f: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert_eq!(g.len(), n);
    let plan = FftPlan::new(n);
    let mut scratch = plan.make_scratch();
    let mut fh: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut gh: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut fh, &mut scratch);
    plan.forward(&mut gh, &mut scratch);
    for (a, b) in fh.iter_mut().zip(&gh) {
        *a *= b;
    }
    plan.inverse(&mut fh, &mut scratch);
    fh.iter().map(|z| z.re * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forward_inverse_roundtrip() {
        let n = 16;
        let plan = FftPlan::new(n);
        let mut scratch = plan.make_scratch();
        let orig: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut buf = orig.clone();
        plan.forward(&mut buf, &mut scratch);
        plan.inverse(&mut buf, &mut scratch);
        for (a, b) in buf.iter().zip(&orig) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        // d/dx sin(x) = cos(x) on [0, 2pi).
        let n = 64;
        let l = 2.0 * std::f64::consts::PI;
        let h = l / n as f64;
        let plan = FftPlan::new(n);
        let mut scratch = plan.make_scratch();
        let ks = wavenumbers(n, l);
        let mut buf: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * h).sin(), 0.0))
            .collect();
        plan.forward(&mut buf, &mut scratch);
        for (z, k) in buf.iter_mut().zip(&ks) {
            *z *= Complex64::new(0.0, *k);
        }
        plan.inverse(&mut buf, &mut scratch);
        for i in 0..n {
            assert_abs_diff_eq!(buf[i].re, (i as f64 * h).cos(), epsilon = 1e-10);
            assert_abs_diff_eq!(buf[i].im, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn axis_transform_matches_direct() {
        // 2D array: transforming axis 1 = FFT of each row.
        let shape = [3usize, 8usize];
        let mut data: Vec<Complex64> = (0..24)
            .map(|i| Complex64::new(i as f64 * 0.17 - 1.0, (i as f64).cos()))
            .collect();
        let reference: Vec<Vec<Complex64>> = (0..3)
            .map(|r| {
                let mut row: Vec<Complex64> = data[r * 8..(r + 1) * 8].to_vec();
                let plan = FftPlan::new(8);
                let mut scratch = plan.make_scratch();
                plan.forward(&mut row, &mut scratch);
                row
            })
            .collect();
        let plan = FftPlan::new(8);
        let mut scratch = plan.make_scratch();
        let mut line = Vec::new();
        fft_axis(&mut data, &shape, 1, &plan, &mut scratch, &mut line, true);
        for r in 0..3 {
            for c in 0..8 {
                assert_abs_diff_eq!(data[r * 8 + c].re, reference[r][c].re, epsilon = 1e-12);
                assert_abs_diff_eq!(data[r * 8 + c].im, reference[r][c].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn convolution_with_cosine_kernel() {
        // For g = cos on a full period, (f*g)(x) = Re(e^{ix} sum_j f_j e^{-i x_j} h).
        let n = 128;
        let l = 2.0 * std::f64::consts::PI;
        let h = l / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| -std::f64::consts::PI + i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| (-(x * x) / 0.5).exp()).collect();
        let g: Vec<f64> = (0..n).map(|m| (m as f64 * h).cos()).collect();
        let conv = periodic_convolution(&f, &g, h);
        let s: Complex64 = xs
            .iter()
            .zip(&f)
            .map(|(x, w)| Complex64::from_polar(w * h, -x))
            .sum();
        for (i, x) in xs.iter().enumerate() {
            let expect = (Complex64::from_polar(1.0, *x) * s).re;
            assert_abs_diff_eq!(conv[i], expect, epsilon = 1e-10);
        }
    }
}
