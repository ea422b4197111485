//! Per-body cost-moment extraction from coefficient columns.
//!
//! A coupling block built from a column psi needs only five scalars per body
//! to price the quadratic cost against any classical phase point: the trace
//! and the raw first and second moments of position and momentum. Position
//! moments are plain lattice sums; momentum moments follow from one spectral
//! transform along the body's axis and Parseval's identity.

use crate::fftutil::{fft_axis, FftPlan};
use crate::hilbert::SpaceGrid;
use crate::qcdist::CostMoments;
use num_complex::Complex64;

/// Reusable moment extractor for N-body columns on a fixed grid (N >= 1).
pub struct MomentProbe {
    n: usize,
    n_body: usize,
    shape: Vec<usize>,
    strides: Vec<usize>,
    nodes: Vec<f64>,
    momenta: Vec<f64>,
    cell: f64,
    plan: FftPlan,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl MomentProbe {
    pub fn new(grid: &SpaceGrid, n_body: usize, hbar: f64) -> Self {
        assert!(n_body >= 1, "moment probe needs at least one body");
        let n = grid.n;
        let plan = FftPlan::new(n);
        let scratch = plan.make_scratch();
        MomentProbe {
            n,
            n_body,
            shape: vec![n; n_body],
            strides: (0..n_body).map(|a| n.pow((n_body - 1 - a) as u32)).collect(),
            nodes: grid.nodes(),
            momenta: grid.momenta(hbar),
            cell: grid.h().powi(n_body as i32),
            plan,
            scratch,
            line: vec![Complex64::default(); n],
            buf: vec![Complex64::default(); n.pow(n_body as u32)],
        }
    }

    /// Raw cost moments of every body of one column. The block trace is the
    /// squared column norm, and bodies holding identical factors report
    /// identical moments.
    pub fn body_moments(&mut self, psi: &[Complex64]) -> Vec<CostMoments> {
        assert_eq!(psi.len(), self.buf.len(), "column length must match the lattice");
        let mut out = vec![
            CostMoments {
                trace: 0.0,
                raw_x: 0.0,
                raw_xi: 0.0,
                raw_x2: 0.0,
                raw_xi2: 0.0,
            };
            self.n_body
        ];
        // Position pass: one sweep accumulates every body's x-moments.
        let mut trace = 0.0;
        for (idx, c) in psi.iter().enumerate() {
            let p = c.norm_sqr();
            trace += p;
            for (b, m) in out.iter_mut().enumerate() {
                let x = self.nodes[(idx / self.strides[b]) % self.n];
                m.raw_x += x * p;
                m.raw_x2 += x * x * p;
            }
        }
        trace *= self.cell;
        for m in out.iter_mut() {
            m.trace = trace;
            m.raw_x *= self.cell;
            m.raw_x2 *= self.cell;
        }
        // Momentum pass: transform along each axis in turn; Parseval scales
        // the spectral sum by cell / n.
        for b in 0..self.n_body {
            self.buf.copy_from_slice(psi);
            fft_axis(
                &mut self.buf,
                &self.shape,
                b,
                &self.plan,
                &mut self.scratch,
                &mut self.line,
                true,
            );
            let stride = self.strides[b];
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for (idx, c) in self.buf.iter().enumerate() {
                let p = c.norm_sqr();
                let xi = self.momenta[(idx / stride) % self.n];
                m1 += xi * p;
                m2 += xi * xi * p;
            }
            let scale = self.cell / self.n as f64;
            out[b].raw_xi = m1 * scale;
            out[b].raw_xi2 = m2 * scale;
        }
        out
    }

    /// Moments of a one-body column (convenience for the n_body = 1 probe).
    pub fn column_moments(&mut self, psi: &[Complex64]) -> CostMoments {
        assert_eq!(self.n_body, 1, "column_moments is the one-body entry point");
        self.body_moments(psi)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, tensor_product, DensityOperator};
    use crate::qcdist::cost_moments;
    use approx::assert_abs_diff_eq;

    fn grid() -> SpaceGrid {
        SpaceGrid::new(-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 64).unwrap()
    }

    #[test]
    fn one_body_probe_matches_the_operator_route() {
        let grid = grid();
        let hbar = 0.25;
        let psi = coherent_state(&grid, hbar, 0.7, -0.4).unwrap();
        let dense = cost_moments(&DensityOperator::from_pure(&psi), hbar).unwrap();
        let mut probe = MomentProbe::new(&grid, 1, hbar);
        let m = probe.column_moments(&psi.psi);
        assert_abs_diff_eq!(m.trace, dense.trace, epsilon = 1e-12);
        assert_abs_diff_eq!(m.raw_x, dense.raw_x, epsilon = 1e-12);
        assert_abs_diff_eq!(m.raw_xi, dense.raw_xi, epsilon = 1e-12);
        assert_abs_diff_eq!(m.raw_x2, dense.raw_x2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.raw_xi2, dense.raw_xi2, epsilon = 1e-12);
    }

    #[test]
    fn product_column_reports_factor_moments_per_body() {
        let grid = grid();
        let hbar = 0.25;
        let a = coherent_state(&grid, hbar, 0.5, 0.3).unwrap();
        let b = coherent_state(&grid, hbar, -0.6, -0.2).unwrap();
        let col = tensor_product(&[&a, &b]).unwrap();
        let mut probe = MomentProbe::new(&grid, 2, hbar);
        let ms = probe.body_moments(&col);
        assert_eq!(ms.len(), 2);
        // Body 0 carries a's center, body 1 carries b's; coherent states have
        // mean = center and variance hbar/2 per coordinate.
        assert_abs_diff_eq!(ms[0].raw_x, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ms[0].raw_xi, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(ms[1].raw_x, -0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(ms[1].raw_xi, -0.2, epsilon = 1e-9);
        for (m, (x0, xi0)) in ms.iter().zip([(0.5, 0.3), (-0.6, -0.2)]) {
            assert_abs_diff_eq!(m.trace, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.raw_x2 - x0 * x0, 0.5 * hbar, epsilon = 1e-9);
            assert_abs_diff_eq!(m.raw_xi2 - xi0 * xi0, 0.5 * hbar, epsilon = 1e-9);
            // trace(c(z0) Q) for the matched point is the floor hbar/2.
            assert_abs_diff_eq!(m.eval(x0, xi0), 0.5 * hbar, epsilon = 1e-9);
        }
    }

    #[test]
    fn equal_factors_give_equal_body_moments() {
        let grid = grid();
        let hbar = 0.5;
        let a = coherent_state(&grid, hbar, 0.4, 0.1).unwrap();
        let b = coherent_state(&grid, hbar, -0.3, 0.2).unwrap();
        let col = tensor_product(&[&a, &a, &b]).unwrap();
        let mut probe = MomentProbe::new(&grid, 3, hbar);
        let ms = probe.body_moments(&col);
        assert_abs_diff_eq!(ms[0].raw_x, ms[1].raw_x, epsilon = 1e-13);
        assert_abs_diff_eq!(ms[0].raw_xi2, ms[1].raw_xi2, epsilon = 1e-13);
        assert_abs_diff_eq!(ms[2].raw_x, -0.3, epsilon = 1e-9);
    }
}
