//! Classical phase-space states and their mean-field / N-body dynamics.
//!
//! A classical state is a probability measure on (x, xi) phase space carried
//! either on a rectangular grid ([`PhaseDensity`]) or by weighted particles
//! ([`ParticleCloud`]). The dynamics are
//!
//!   mean-field:  dx/dt = xi,   dxi/dt = -(grad V * rho)(x),
//!   N-body:      dx_k/dt = xi_k,  dxi_k/dt = -(1/N) sum_l grad V(x_k - x_l),
//!
//! both integrated with velocity Verlet. Pair potentials are even and
//! globally Lipschitz; see [`Potential`] for the built-in choices and their
//! exact constants.

mod field;
mod liouville;
mod vlasov;

pub use field::{mean_field_force, ForceField, SpatialGrid};
pub use liouville::{liouville_step, marginal_classical, nbody_hamiltonian, ClassicalEnsembleN, SampleN};
pub use vlasov::{
    characteristic_flow, vlasov_energy, vlasov_run, vlasov_step, MeanFieldPath, VlasovRun,
};

use crate::error::{QcError, Result};

/// Uniform rectangular grid on a phase-space window.
///
/// Cell (i, j) is centered at (x_min + (i+1/2) dx, xi_min + (j+1/2) dxi).
/// The spatial dimension is carried explicitly so cost formulas stay
/// dimension-aware, but constructors currently accept d = 1 only.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    d: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub nx: usize,
    pub nxi: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, xi_min: f64, xi_max: f64, nx: usize, nxi: usize) -> Result<Self> {
        if !(x_min < x_max && xi_min < xi_max) {
            return Err(QcError::GridMismatch(
                "phase grid bounds must be ordered".into(),
            ));
        }
        if nx < 2 || nxi < 2 {
            return Err(QcError::GridMismatch(
                "phase grid needs at least 2 cells per axis".into(),
            ));
        }
        Ok(PhaseGrid {
            d: 1,
            x_min,
            x_max,
            xi_min,
            xi_max,
            nx,
            nxi,
        })
    }

    /// Square window centered at `(x0, xi0)` with the given half-widths.
    pub fn window(x0: f64, xi0: f64, half_x: f64, half_xi: f64, nx: usize, nxi: usize) -> Result<Self> {
        PhaseGrid::new(x0 - half_x, x0 + half_x, xi0 - half_xi, xi0 + half_xi, nx, nxi)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dxi(&self) -> f64 {
        (self.xi_max - self.xi_min) / self.nxi as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dxi()
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.nxi
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn xi_center(&self, j: usize) -> f64 {
        self.xi_min + (j as f64 + 0.5) * self.dxi()
    }

    /// Cell containing the point, or None if outside the window.
    pub fn locate(&self, x: f64, xi: f64) -> Option<(usize, usize)> {
        if x < self.x_min || x >= self.x_max || xi < self.xi_min || xi >= self.xi_max {
            return None;
        }
        let i = ((x - self.x_min) / self.dx()) as usize;
        let j = ((xi - self.xi_min) / self.dxi()) as usize;
        Some((i.min(self.nx - 1), j.min(self.nxi - 1)))
    }
}

/// Weighted phase-space particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub xi: f64,
    pub w: f64,
}

/// Finite weighted particle family representing a probability measure.
#[derive(Debug, Clone, Default)]
pub struct ParticleCloud {
    pub particles: Vec<Particle>,
}

impl ParticleCloud {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        if particles.iter().any(|p| p.w < 0.0 || !p.w.is_finite()) {
            return Err(QcError::InvalidMeasure("particle weights must be >= 0".into()));
        }
        let mass: f64 = particles.iter().map(|p| p.w).sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(QcError::InvalidMeasure(format!(
                "particle mass {mass} differs from 1 beyond 1e-9"
            )));
        }
        Ok(ParticleCloud { particles })
    }

    pub fn mass(&self) -> f64 {
        self.particles.iter().map(|p| p.w).sum()
    }

    /// Second moment about the origin, (1/2) int (x^2 + xi^2) dmu.
    pub fn second_moment(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| 0.5 * p.w * (p.x * p.x + p.xi * p.xi))
            .sum()
    }

    /// Means and variances per axis: (mean_x, mean_xi, var_x, var_xi).
    pub fn moments(&self) -> (f64, f64, f64, f64) {
        let mass = self.mass().max(1e-300);
        let mut mx = 0.0;
        let mut mxi = 0.0;
        for p in &self.particles {
            mx += p.w * p.x;
            mxi += p.w * p.xi;
        }
        mx /= mass;
        mxi /= mass;
        let mut vx = 0.0;
        let mut vxi = 0.0;
        for p in &self.particles {
            vx += p.w * (p.x - mx) * (p.x - mx);
            vxi += p.w * (p.xi - mxi) * (p.xi - mxi);
        }
        (mx, mxi, vx / mass, vxi / mass)
    }

    /// Small Gauss-Hermite atom family matching a Gaussian's mean and
    /// variance per axis: `nodes = 3` uses offsets {0, +-sqrt(3) sigma} with
    /// weights {2/3, 1/6, 1/6} (matches moments through order 5); `nodes = 2`
    /// uses {+-sigma} with weights {1/2, 1/2} (through order 3). The cloud is
    /// the tensor product of the two axis rules.
    pub fn gauss_hermite(
        x0: f64,
        xi0: f64,
        sigma_x: f64,
        sigma_xi: f64,
        nodes: usize,
    ) -> Result<Self> {
        let rule = |sigma: f64| -> Result<Vec<(f64, f64)>> {
            match nodes {
                2 => Ok(vec![(-sigma, 0.5), (sigma, 0.5)]),
                3 => {
                    let s = 3.0f64.sqrt() * sigma;
                    Ok(vec![(0.0, 2.0 / 3.0), (-s, 1.0 / 6.0), (s, 1.0 / 6.0)])
                }
                _ => Err(QcError::InvalidConfig(format!(
                    "gauss_hermite supports 2 or 3 nodes per axis, got {nodes}"
                ))),
            }
        };
        let rx = rule(sigma_x)?;
        let rxi = rule(sigma_xi)?;
        let mut particles = Vec::with_capacity(rx.len() * rxi.len());
        for &(dx, wx) in &rx {
            for &(dxi, wxi) in &rxi {
                particles.push(Particle {
                    x: x0 + dx,
                    xi: xi0 + dxi,
                    w: wx * wxi,
                });
            }
        }
        ParticleCloud::new(particles)
    }

    /// Smallest axis-aligned box containing all particles.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut x_lo = f64::INFINITY;
        let mut x_hi = f64::NEG_INFINITY;
        let mut xi_lo = f64::INFINITY;
        let mut xi_hi = f64::NEG_INFINITY;
        for p in &self.particles {
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            xi_lo = xi_lo.min(p.xi);
            xi_hi = xi_hi.max(p.xi);
        }
        (x_lo, x_hi, xi_lo, xi_hi)
    }
}

/// Probability density on a [`PhaseGrid`], stored as per-cell masses.
///
/// Weights are nonnegative and sum to 1 within 1e-9; cells below 1e-14 are
/// zeroed at construction so downstream quadratures can skip them.
#[derive(Debug, Clone)]
pub struct PhaseDensity {
    pub grid: PhaseGrid,
    weights: Vec<f64>,
}

/// Weight floor below which a cell is treated as empty.
pub const CELL_MASS_FLOOR: f64 = 1e-14;

impl PhaseDensity {
    pub fn new(grid: PhaseGrid, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.n_cells() {
            return Err(QcError::GridMismatch(format!(
                "weight vector length {} does not match {} cells",
                weights.len(),
                grid.n_cells()
            )));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(QcError::InvalidMeasure("cell weights must be >= 0".into()));
        }
        for w in weights.iter_mut() {
            if *w < CELL_MASS_FLOOR {
                *w = 0.0;
            }
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(QcError::InvalidMeasure(format!(
                "cell mass {mass} differs from 1 beyond 1e-9"
            )));
        }
        // Flooring removed at most 1e-9 of mass; restore exact normalization.
        for w in weights.iter_mut() {
            *w /= mass;
        }
        Ok(PhaseDensity { grid, weights })
    }

    /// Gaussian blob centered at `(x0, xi0)` with the given axis widths,
    /// quadratured on the grid cells and renormalized.
    pub fn gaussian(grid: PhaseGrid, x0: f64, xi0: f64, sigma_x: f64, sigma_xi: f64) -> Result<Self> {
        let mut weights = vec![0.0; grid.n_cells()];
        for i in 0..grid.nx {
            let gx = (-(grid.x_center(i) - x0).powi(2) / (2.0 * sigma_x * sigma_x)).exp();
            for j in 0..grid.nxi {
                let gxi = (-(grid.xi_center(j) - xi0).powi(2) / (2.0 * sigma_xi * sigma_xi)).exp();
                weights[i * grid.nxi + j] = gx * gxi;
            }
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(QcError::InvalidMeasure(
                "gaussian mass vanished on the window".into(),
            ));
        }
        for w in weights.iter_mut() {
            *w /= mass;
        }
        PhaseDensity::new(grid, weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.grid.nxi + j]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn second_moment(&self) -> f64 {
        let mut m2 = 0.0;
        for i in 0..self.grid.nx {
            let x = self.grid.x_center(i);
            for j in 0..self.grid.nxi {
                let xi = self.grid.xi_center(j);
                m2 += 0.5 * self.weight(i, j) * (x * x + xi * xi);
            }
        }
        m2
    }

    /// Occupied cells as (x, xi, w) triples.
    pub fn occupied_cells(&self) -> Vec<Particle> {
        let mut out = Vec::new();
        for i in 0..self.grid.nx {
            for j in 0..self.grid.nxi {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push(Particle {
                        x: self.grid.x_center(i),
                        xi: self.grid.xi_center(j),
                        w,
                    });
                }
            }
        }
        out
    }

    /// Quiet-start particle family: one particle per occupied cell.
    pub fn to_particles(&self) -> Result<ParticleCloud> {
        ParticleCloud::new(self.occupied_cells())
    }

    /// Deposit a particle family onto `grid` with a clipped Gaussian kernel
    /// of bandwidth one cell (3-cell stencil). Per-particle normalization
    /// over the in-window stencil keeps deposited mass exact; only particles
    /// whose center leaves the window lose their mass. Returns the density
    /// (renormalized) together with the dropped mass.
    pub fn deposit(grid: PhaseGrid, cloud: &ParticleCloud) -> Result<(Self, f64)> {
        let mut weights = vec![0.0_f64; grid.n_cells()];
        let mut dropped = 0.0;
        let dx = grid.dx();
        let dxi = grid.dxi();
        let reach = 3_isize;
        let mut stencil: Vec<(usize, f64)> = Vec::with_capacity(49);
        for p in &cloud.particles {
            if p.w == 0.0 {
                continue;
            }
            let Some((ci, cj)) = grid.locate(p.x, p.xi) else {
                dropped += p.w;
                continue;
            };
            stencil.clear();
            let mut norm = 0.0;
            for di in -reach..=reach {
                let i = ci as isize + di;
                if i < 0 || i >= grid.nx as isize {
                    continue;
                }
                let ux = (grid.x_center(i as usize) - p.x) / dx;
                let gx = (-0.5 * ux * ux).exp();
                for dj in -reach..=reach {
                    let j = cj as isize + dj;
                    if j < 0 || j >= grid.nxi as isize {
                        continue;
                    }
                    let uxi = (grid.xi_center(j as usize) - p.xi) / dxi;
                    let g = gx * (-0.5 * uxi * uxi).exp();
                    stencil.push((i as usize * grid.nxi + j as usize, g));
                    norm += g;
                }
            }
            for (idx, g) in &stencil {
                weights[*idx] += p.w * g / norm;
            }
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(QcError::InvalidMeasure(
                "deposition produced an empty density".into(),
            ));
        }
        for w in weights.iter_mut() {
            *w /= mass;
        }
        Ok((PhaseDensity::new(grid, weights)?, dropped))
    }
}

/// Even, globally Lipschitz pair potentials with exact constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// V = 0 (free streaming).
    Zero,
    /// V(x) = cos(x); sup|V| = 1, sup|V'| = 1, Lip(V') = 1.
    Cosine,
    /// V(x) = a exp(-x^2 / (2 s^2)).
    GaussianBump { amplitude: f64, width: f64 },
}

impl Potential {
    pub fn v(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine => x.cos(),
            Potential::GaussianBump { amplitude, width } => {
                amplitude * (-(x * x) / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn grad_v(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine => -x.sin(),
            Potential::GaussianBump { amplitude, width } => {
                -amplitude * x / (width * width) * (-(x * x) / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn sup_v(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine => 1.0,
            Potential::GaussianBump { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn sup_grad_v(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine => 1.0,
            // |V'| peaks at x = s with value |a| / (s sqrt(e)).
            Potential::GaussianBump { amplitude, width } => {
                amplitude.abs() / (width * (1.0_f64).exp().sqrt())
            }
        }
    }

    /// Lipschitz constant of grad V (sup of |V''|).
    pub fn lipschitz_grad(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Cosine => 1.0,
            // |V''| peaks at x = 0 with value |a| / s^2.
            Potential::GaussianBump { amplitude, width } => amplitude.abs() / (width * width),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_hermite_matches_gaussian_moments() {
        for &nodes in &[2usize, 3] {
            let cloud = ParticleCloud::gauss_hermite(0.3, 0.2, 0.08, 0.08, nodes).unwrap();
            let (mx, mxi, vx, vxi) = cloud.moments();
            assert_abs_diff_eq!(cloud.mass(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(mx, 0.3, epsilon = 1e-15);
            assert_abs_diff_eq!(mxi, 0.2, epsilon = 1e-15);
            assert_abs_diff_eq!(vx, 0.08 * 0.08, epsilon = 1e-15);
            assert_abs_diff_eq!(vxi, 0.08 * 0.08, epsilon = 1e-15);
        }
        // Fourth moment: the 3-node rule reproduces the Gaussian value
        // 3 sigma^4, the 2-node rule only sigma^4.
        let c3 = ParticleCloud::gauss_hermite(0.0, 0.0, 0.1, 0.1, 3).unwrap();
        let m4: f64 = c3.particles.iter().map(|p| p.w * p.x.powi(4)).sum();
        assert_abs_diff_eq!(m4, 3.0 * 0.1f64.powi(4), epsilon = 1e-15);
        assert!(ParticleCloud::gauss_hermite(0.0, 0.0, 0.1, 0.1, 4).is_err());
    }

    #[test]
    fn grid_cells_and_lookup() {
        let g = PhaseGrid::new(-1.0, 1.0, -2.0, 2.0, 4, 8).unwrap();
        assert_abs_diff_eq!(g.dx(), 0.5);
        assert_abs_diff_eq!(g.dxi(), 0.5);
        assert_abs_diff_eq!(g.x_center(0), -0.75);
        assert_eq!(g.locate(-0.99, -1.99), Some((0, 0)));
        assert_eq!(g.locate(0.99, 1.99), Some((3, 7)));
        assert_eq!(g.locate(1.01, 0.0), None);
    }

    #[test]
    fn gaussian_density_normalizes_and_moments_match() {
        let g = PhaseGrid::window(0.3, -0.2, 1.2, 1.2, 96, 96).unwrap();
        let p = PhaseDensity::gaussian(g, 0.3, -0.2, 0.15, 0.2).unwrap();
        assert_abs_diff_eq!(p.mass(), 1.0, epsilon = 1e-12);
        // m2 = (x0^2 + xi0^2)/2 + (sx^2 + sxi^2)/2 for a Gaussian.
        let expect = 0.5 * (0.09 + 0.04) + 0.5 * (0.15_f64.powi(2) + 0.2_f64.powi(2));
        assert_abs_diff_eq!(p.second_moment(), expect, epsilon = 1e-6);
    }

    #[test]
    fn second_moment_point_mass_and_shift() {
        // Point mass at the origin has m2 = 0; shifting to (a, 0) adds a^2/2.
        let cloud = ParticleCloud::new(vec![Particle { x: 0.0, xi: 0.0, w: 1.0 }]).unwrap();
        assert_abs_diff_eq!(cloud.second_moment(), 0.0);
        let shifted = ParticleCloud::new(vec![Particle { x: 0.7, xi: 0.0, w: 1.0 }]).unwrap();
        assert_abs_diff_eq!(shifted.second_moment(), 0.5 * 0.49, epsilon = 1e-15);
    }

    #[test]
    fn deposition_conserves_mass_and_moments() {
        let g = PhaseGrid::window(0.0, 0.0, 1.0, 1.0, 64, 64).unwrap();
        let src = PhaseDensity::gaussian(g.clone(), 0.1, -0.05, 0.2, 0.25).unwrap();
        let cloud = src.to_particles().unwrap();
        let (dep, dropped) = PhaseDensity::deposit(g, &cloud).unwrap();
        assert_abs_diff_eq!(dropped, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dep.mass(), 1.0, epsilon = 1e-12);
        // One-cell smoothing shifts second moments by O(cell^2).
        assert_abs_diff_eq!(dep.second_moment(), src.second_moment(), epsilon = 2e-3);
    }

    #[test]
    fn deposition_reports_dropped_mass() {
        let g = PhaseGrid::window(0.0, 0.0, 0.5, 0.5, 16, 16).unwrap();
        let cloud = ParticleCloud::new(vec![
            Particle { x: 0.0, xi: 0.0, w: 0.5 },
            Particle { x: 5.0, xi: 0.0, w: 0.5 },
        ])
        .unwrap();
        let (_, dropped) = PhaseDensity::deposit(g, &cloud).unwrap();
        assert_abs_diff_eq!(dropped, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn potential_constants_dominate_samples() {
        for pot in [
            Potential::Cosine,
            Potential::GaussianBump { amplitude: 0.8, width: 0.5 },
        ] {
            let mut sup_v: f64 = 0.0;
            let mut sup_g: f64 = 0.0;
            let mut lip: f64 = 0.0;
            let mut prev_g = pot.grad_v(-8.0);
            let n = 16000;
            for i in 0..=n {
                let x = -8.0 + 16.0 * i as f64 / n as f64;
                sup_v = sup_v.max(pot.v(x).abs());
                sup_g = sup_g.max(pot.grad_v(x).abs());
                if i > 0 {
                    lip = lip.max((pot.grad_v(x) - prev_g).abs() / (16.0 / n as f64));
                }
                prev_g = pot.grad_v(x);
                // Evenness.
                assert_abs_diff_eq!(pot.v(x), pot.v(-x), epsilon = 1e-14);
            }
            assert!(sup_v <= pot.sup_v() + 1e-12);
            assert!(sup_g <= pot.sup_grad_v() + 1e-12);
            assert!(lip <= pot.lipschitz_grad() + 1e-6);
            // Bounds are tight within sampling error.
            assert!(sup_g > 0.98 * pot.sup_grad_v());
            assert!(lip > 0.98 * pot.lipschitz_grad());
        }
    }
}
