//! Quantum-classical pseudo-distance: cost calculus and two-sided bounds.
//!
//! The squared pseudo-distance between a phase-space probability measure p
//! and a density operator R is the infimum of
//!     sum_k trace(c(z_k) Q_k)
//! over operator-valued couplings {Q_k}: Q_k >= 0, trace Q_k = p_k,
//! sum_k Q_k = R, where the cost observable at z = (x, xi) is
//!     c(z) = (x - y_hat)^2 / 2 + (xi - p_hat)^2 / 2.
//!
//! Three computable handles are provided:
//! * exact per-atom costs trace(c(z) Q) from four scalar moments of Q
//!   ([`CostMoments`]), or the dense cost operator matrix for small grids;
//! * certified bounds: a lower bound from optimal transport against the
//!   Husimi distribution (minus the smoothing offset, floored at hbar/2) and
//!   upper bounds from the product coupling and from coherent lifts of
//!   classical plans;
//! * an exact small-instance solver ([`admm::solve_coupling_exact`]) that
//!   minimizes over all couplings directly, used to confirm the bounds
//!   bracket the truth.

pub mod admm;
mod window;

pub use admm::{solve_coupling_exact, CouplingSolution};
pub use window::{
    cloud_window, table_window, windowed_measure_from_cloud, windowed_measure_from_table,
    PhaseWindow, DEFAULT_WINDOW_NODES, MAX_WINDOW_CELLS, WINDOW_DROP_BUDGET, WINDOW_MASS_FLOOR,
    WINDOW_SIGMAS,
};

use crate::error::Result;
use crate::fftutil::FftPlan;
use crate::hilbert::{DensityOperator, SpaceGrid};
use crate::linalg::CMat;
use crate::transport::{exact_plan, DiscreteMeasure, TransportPlan};
use num_complex::Complex64;

/// Universal floor: the squared pseudo-distance is never below hbar/2
/// (one spatial dimension).
pub fn energy_floor(hbar: f64) -> f64 {
    0.5 * hbar
}

/// The four scalar moments of a (possibly sub-normalized) operator Q that
/// determine trace(c(z) Q) for every phase point z.
#[derive(Debug, Clone, Copy)]
pub struct CostMoments {
    pub trace: f64,
    pub raw_x: f64,
    pub raw_xi: f64,
    pub raw_x2: f64,
    pub raw_xi2: f64,
}

impl CostMoments {
    /// trace(c(z) Q) expanded in raw moments:
    /// (x^2 + xi^2)/2 tr Q - x tr(y Q) - xi tr(p Q) + (tr(y^2 Q) + tr(p^2 Q))/2.
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        0.5 * (x * x + xi * xi) * self.trace - x * self.raw_x - xi * self.raw_xi
            + 0.5 * (self.raw_x2 + self.raw_xi2)
    }

    /// Second moment trace((y^2 + p^2)/2 Q) = trace(c(0) Q).
    pub fn second_moment(&self) -> f64 {
        0.5 * (self.raw_x2 + self.raw_xi2)
    }
}

/// Extract the cost moments of a density operator.
pub fn cost_moments(r: &DensityOperator, hbar: f64) -> Result<CostMoments> {
    Ok(CostMoments {
        trace: r.trace(),
        raw_x: r.moment_x(1)?,
        raw_xi: r.moment_xi(hbar, 1)?,
        raw_x2: r.moment_x(2)?,
        raw_xi2: r.moment_xi(hbar, 2)?,
    })
}

/// trace(c(z) R) via the moment route.
pub fn trace_cost(r: &DensityOperator, hbar: f64, x: f64, xi: f64) -> Result<f64> {
    Ok(cost_moments(r, hbar)?.eval(x, xi))
}

/// Dense cost operator matrix c(z) acting on coefficient vectors:
/// position part diagonal, momentum part spectral. Hermitian; for a stored
/// density matrix Q the pairing is the plain matrix trace of c(z) Q.
pub fn cost_operator(grid: &SpaceGrid, hbar: f64, x: f64, xi: f64) -> CMat {
    let n = grid.n;
    let mut c = CMat::zeros((n, n));
    let momenta = grid.momenta(hbar);
    let plan = FftPlan::new(n);
    // Momentum part: columns of F^{-1} diag((xi - hbar k)^2 / 2) F.
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        plan.forward(&mut col, &mut scratch);
        for (v, pk) in col.iter_mut().zip(&momenta) {
            let d = xi - pk;
            *v *= 0.5 * d * d;
        }
        plan.inverse(&mut col, &mut scratch);
        for i in 0..n {
            c[[i, j]] = col[i];
        }
    }
    for i in 0..n {
        let d = x - grid.node(i);
        c[[i, i]] += 0.5 * d * d;
    }
    // Symmetrize away FFT roundoff so downstream eigensolves see an exactly
    // Hermitian matrix.
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (c[[i, j]] + c[[j, i]].conj());
            c[[i, j]] = m;
            c[[j, i]] = m.conj();
        }
        c[[i, i]] = Complex64::new(c[[i, i]].re, 0.0);
    }
    c
}

/// Cost of the product coupling Q_k = p_k R: an upper bound needing only
/// moments, equal to m2(p) + m2(R) - <mean p, mean R>.
pub fn trivial_coupling_cost(p: &DiscreteMeasure, r: &DensityOperator, hbar: f64) -> Result<f64> {
    let m = cost_moments(r, hbar)?;
    Ok(p
        .points
        .iter()
        .zip(&p.weights)
        .map(|(&(x, xi), w)| w * m.eval(x, xi))
        .sum())
}

/// Upper bound from lifting a classical optimal plan between p and the atom
/// measure mu of a coherent mixture R = sum_l mu_l h |z_l><z_l|: each unit
/// of plan mass picks up the coherent packet cost |z - z'|^2 / 2 + hbar/2,
/// so the bound is the transport cost plus hbar/2.
pub fn lift_upper_bound(
    p: &DiscreteMeasure,
    mu_r: &DiscreteMeasure,
    hbar: f64,
) -> Result<(f64, TransportPlan)> {
    let plan = exact_plan(p, mu_r)?;
    Ok((plan.cost + 0.5 * hbar, plan))
}

/// Lower bound from the Husimi distribution of R: every coupling induces a
/// classical coupling between p and the Husimi measure whose transport cost
/// it dominates up to the smoothing offset hbar/2, so
///     E^2 >= max(hbar/2, OT_cost(p, husimi) - hbar/2).
pub fn husimi_lower_bound(
    p: &DiscreteMeasure,
    husimi_r: &DiscreteMeasure,
    hbar: f64,
) -> Result<(f64, TransportPlan)> {
    let plan = exact_plan(p, husimi_r)?;
    let raw = plan.cost - 0.5 * hbar;
    Ok((raw.max(energy_floor(hbar)), plan))
}

/// Two-sided estimate of the squared pseudo-distance.
#[derive(Debug, Clone, Copy)]
pub struct EhSquaredBounds {
    pub lower: f64,
    pub upper: f64,
    pub floor: f64,
}

impl EhSquaredBounds {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }
}

/// Bundle the computable bounds for p against a coherent mixture
/// R = sum_l (mu_r)_l h |z_l><z_l| with Husimi measure `husimi_r`.
pub fn eh_squared_bounds(
    p: &DiscreteMeasure,
    mu_r: &DiscreteMeasure,
    husimi_r: &DiscreteMeasure,
    r: &DensityOperator,
    hbar: f64,
) -> Result<EhSquaredBounds> {
    let (lower, _) = husimi_lower_bound(p, husimi_r, hbar)?;
    let (lift, _) = lift_upper_bound(p, mu_r, hbar)?;
    let trivial = trivial_coupling_cost(p, r, hbar)?;
    Ok(EhSquaredBounds {
        lower,
        upper: lift.min(trivial),
        floor: energy_floor(hbar),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, DensityOperator};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn coherent_projector(grid: &SpaceGrid, hbar: f64, x0: f64, xi0: f64) -> DensityOperator {
        let psi = coherent_state(grid, hbar, x0, xi0).unwrap();
        DensityOperator::from_pure(&psi)
    }

    fn coherent_mixture(
        grid: &SpaceGrid,
        hbar: f64,
        parts: &[(f64, f64, f64)],
    ) -> DensityOperator {
        let terms: Vec<_> = parts
            .iter()
            .map(|&(w, x0, xi0)| (w, coherent_state(grid, hbar, x0, xi0).unwrap()))
            .collect();
        DensityOperator::mixture(&terms).unwrap()
    }

    #[test]
    fn moment_route_matches_dense_operator_pairing() {
        let hbar = 0.5;
        let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 64).unwrap();
        let r = coherent_mixture(&grid, hbar, &[(0.3, 0.4, -0.3), (0.7, -0.8, 0.6)]);
        for &(x, xi) in &[(0.0, 0.0), (0.9, -0.5), (-1.4, 1.1)] {
            let via_moments = trace_cost(&r, hbar, x, xi).unwrap();
            let c = cost_operator(&grid, hbar, x, xi);
            let direct: f64 = (0..grid.n)
                .map(|i| {
                    (0..grid.n)
                        .map(|j| (c[[i, j]] * r.mat[[j, i]]).re)
                        .sum::<f64>()
                })
                .sum();
            assert_abs_diff_eq!(via_moments, direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn coherent_cost_has_the_two_point_closed_form() {
        // trace(c(z) |z'><z'|) = |z - z'|^2 / 2 + hbar / 2 exactly.
        let hbar = 0.25;
        let grid = SpaceGrid::new(-PI, PI, 64).unwrap();
        let r = coherent_projector(&grid, hbar, 0.3, -0.2);
        for &(x, xi) in &[(0.3, -0.2), (0.8, 0.5), (-0.4, 0.1)] {
            let dx = x - 0.3;
            let dxi = xi + 0.2;
            let expect = 0.5 * (dx * dx + dxi * dxi) + 0.5 * hbar;
            assert_abs_diff_eq!(trace_cost(&r, hbar, x, xi).unwrap(), expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn cost_at_the_mean_attains_the_floor_for_coherent_states() {
        let hbar = 0.5;
        let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 128).unwrap();
        let r = coherent_projector(&grid, hbar, 0.6, 0.4);
        let at_mean = trace_cost(&r, hbar, 0.6, 0.4).unwrap();
        assert_abs_diff_eq!(at_mean, energy_floor(hbar), epsilon = 1e-9);
        // Anywhere else the cost exceeds the floor.
        assert!(trace_cost(&r, hbar, 1.0, 0.4).unwrap() > energy_floor(hbar));
    }

    #[test]
    fn trivial_coupling_cost_equals_moment_identity() {
        let hbar = 0.5;
        let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 64).unwrap();
        let r = coherent_mixture(&grid, hbar, &[(0.5, 0.4, -0.3), (0.5, -0.2, 0.5)]);
        let p = DiscreteMeasure::new(vec![(0.5, 0.1), (-0.3, -0.6)], vec![0.4, 0.6]).unwrap();
        let cost = trivial_coupling_cost(&p, &r, hbar).unwrap();
        let m = cost_moments(&r, hbar).unwrap();
        let (px, pxi) = p.mean();
        let identity =
            p.second_moment() + m.second_moment() - (px * m.raw_x + pxi * m.raw_xi);
        assert_abs_diff_eq!(cost, identity, epsilon = 1e-12);
    }

    #[test]
    fn bounds_order_correctly_on_a_matched_pair() {
        // p = atom measure of R: the lift over the identity plan costs
        // exactly hbar/2, which is also the universal floor, so lower and
        // upper bounds pinch to hbar/2.
        let hbar = 0.25;
        let grid = SpaceGrid::new(-2.0 * PI, 2.0 * PI, 64).unwrap();
        let atoms = DiscreteMeasure::new(
            vec![(-0.6, 0.0), (0.7, 0.3)],
            vec![1.0 / 3.0, 2.0 / 3.0],
        )
        .unwrap();
        let r = coherent_mixture(
            &grid,
            hbar,
            &[(1.0 / 3.0, -0.6, 0.0), (2.0 / 3.0, 0.7, 0.3)],
        );
        let (lift, plan) = lift_upper_bound(&atoms, &atoms, hbar).unwrap();
        assert_abs_diff_eq!(plan.cost, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lift, energy_floor(hbar), epsilon = 1e-14);
        let trivial = trivial_coupling_cost(&atoms, &r, hbar).unwrap();
        assert!(trivial >= lift - 1e-12, "product coupling can't beat the lift here");
    }
}
