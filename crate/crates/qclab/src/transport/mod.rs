//! Discrete optimal transport with half-squared-distance cost.
//!
//! Measures are weighted point families in phase space; the transport cost
//! between atoms is c(z, w) = |z - w|^2 / 2, so the optimal value is half the
//! squared quadratic transport distance: W2^2 = 2 * cost.
//!
//! The exact solver is a transportation network simplex over a candidate arc
//! pool (nearest-sink arcs plus the initial basis), re-priced against the
//! full bipartite graph until no arc has negative reduced cost; the returned
//! dual potentials certify optimality, and the certificate (feasibility plus
//! vanishing duality gap) is checked by the caller-facing API rather than
//! trusted. Large instances fall back to entropic scaling, explicitly
//! flagged in the plan's method tag.

mod entropic;
mod simplex;

pub use entropic::entropic_plan;
pub use simplex::exact_plan;

use crate::error::{QcError, Result};
use crate::phasespace::{ParticleCloud, PhaseDensity};

/// Largest support size per side routed to the exact solver by default.
pub const MAX_EXACT_SUPPORT: usize = 2048;

/// Weighted atoms in phase space with unit total mass.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<(f64, f64)>, mut weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(QcError::InvalidMeasure(
                "measure needs matching nonempty points and weights".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(QcError::InvalidMeasure("weights must be finite and >= 0".into()));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(QcError::InvalidMeasure(format!(
                "measure mass {mass} differs from 1 beyond 1e-9"
            )));
        }
        for w in weights.iter_mut() {
            *w /= mass;
        }
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn from_cloud(cloud: &ParticleCloud) -> Result<Self> {
        DiscreteMeasure::new(
            cloud.particles.iter().map(|p| (p.x, p.xi)).collect(),
            cloud.particles.iter().map(|p| p.w).collect(),
        )
    }

    pub fn from_density(density: &PhaseDensity) -> Result<Self> {
        Self::from_cloud(&density.to_particles()?)
    }

    pub fn support_len(&self) -> usize {
        self.points.len()
    }

    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&(x, xi), w)| 0.5 * w * (x * x + xi * xi))
            .sum()
    }

    pub fn mean(&self) -> (f64, f64) {
        let mut mx = 0.0;
        let mut mxi = 0.0;
        for (&(x, xi), w) in self.points.iter().zip(&self.weights) {
            mx += w * x;
            mxi += w * xi;
        }
        (mx, mxi)
    }

    /// Drop atoms below `floor` and renormalize. Fails if the dropped mass
    /// exceeds `max_dropped`.
    pub fn trim(&self, floor: f64, max_dropped: f64) -> Result<Self> {
        let dropped: f64 = self
            .weights
            .iter()
            .filter(|w| **w < floor)
            .sum();
        if dropped > max_dropped {
            return Err(QcError::InvalidMeasure(format!(
                "trimming would drop mass {dropped}, above the {max_dropped} budget"
            )));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (&p, &w) in self.points.iter().zip(&self.weights) {
            if w >= floor {
                points.push(p);
                weights.push(w);
            }
        }
        let mass: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= mass;
        }
        Ok(DiscreteMeasure { points, weights })
    }
}

/// Half squared distance between phase points.
pub fn half_sq_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dxi = a.1 - b.1;
    0.5 * (dx * dx + dxi * dxi)
}

/// How a plan was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanMethod {
    NetworkSimplex,
    Entropic { epsilon: f64 },
}

/// A transport plan between two discrete measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub method: PlanMethod,
    /// (source index, sink index, mass), strictly positive masses only.
    pub entries: Vec<(u32, u32, f64)>,
    /// sum of mass * half squared distance.
    pub cost: f64,
    /// Dual potentials (exact method; empty for entropic plans).
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Worst dual feasibility violation max(0, u_i + v_j - c_ij) over all
    /// pairs, and the duality gap cost - (a.u + b.v). Both ~0 certify
    /// optimality of an exact plan.
    pub dual_violation: f64,
    pub dual_gap: f64,
}

impl TransportPlan {
    /// Standard squared quadratic transport distance, 2 * cost.
    pub fn w2_squared_standard(&self) -> f64 {
        2.0 * self.cost
    }

    /// Largest deviation of the plan's marginals from the prescribed masses.
    pub fn marginal_defect(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut row = vec![0.0; mu.support_len()];
        let mut col = vec![0.0; nu.support_len()];
        for &(i, j, m) in &self.entries {
            row[i as usize] += m;
            col[j as usize] += m;
        }
        let dr = row
            .iter()
            .zip(&mu.weights)
            .map(|(r, w)| (r - w).abs())
            .fold(0.0, f64::max);
        let dc = col
            .iter()
            .zip(&nu.weights)
            .map(|(c, w)| (c - w).abs())
            .fold(0.0, f64::max);
        dr.max(dc)
    }
}

/// Solve for an optimal (or flagged near-optimal) plan: exact network
/// simplex up to [`MAX_EXACT_SUPPORT`] atoms per side, entropic scaling
/// beyond that.
pub fn optimal_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportPlan> {
    if mu.support_len() <= MAX_EXACT_SUPPORT && nu.support_len() <= MAX_EXACT_SUPPORT {
        exact_plan(mu, nu)
    } else {
        entropic_plan(mu, nu, 1e-3, 2000)
    }
}

/// Product-coupling value int c d(mu x nu) — an upper bound on any optimal
/// cost, computable from moments alone:
/// m2(mu) + m2(nu) - mean(mu) . mean(nu).
pub fn tensor_cost_bound(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let (ax, axi) = mu.mean();
    let (bx, bxi) = nu.mean();
    mu.second_moment() + nu.second_moment() - (ax * bx + axi * bxi)
}

/// Mean-separation lower bound cost >= |mean(mu) - mean(nu)|^2 / 2.
pub fn mean_gap_bound(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let (ax, axi) = mu.mean();
    let (bx, bxi) = nu.mean();
    half_sq_dist((ax, axi), (bx, bxi))
}
