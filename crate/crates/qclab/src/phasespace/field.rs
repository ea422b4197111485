//! Mean-field force evaluation for weighted particle families.
//!
//! The self-consistent force on a particle at x is
//!
//!   F(x) = -(grad V * rho)(x) = -sum_j w_j grad V(x - x_j),
//!
//! where rho is the spatial marginal of the particle family. For the cosine
//! potential this collapses to two moments of rho: with S = sum_j w_j e^{i x_j},
//!
//!   (grad V * rho)(x) = -sum_j w_j sin(x - x_j) = -Im(e^{ix} conj(S)),
//!
//! so a single pass over the family prices the force everywhere at O(1) per
//! evaluation. Generic potentials fall back to a tabulated convolution on a
//! spatial grid with linear interpolation.

use super::{ParticleCloud, Potential};
use crate::error::{QcError, Result};

/// Uniform spatial grid used for tabulated force fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) || n < 2 {
            return Err(QcError::GridMismatch("spatial grid needs x_min < x_max and n >= 2".into()));
        }
        Ok(SpatialGrid { x_min, x_max, n })
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }
}

/// Frozen mean-field force at one time slice.
#[derive(Debug, Clone)]
pub enum ForceField {
    /// No force.
    Zero,
    /// Exact closed form for V = cos: stores S = sum_j w_j e^{i x_j}.
    CosineMoment { re_s: f64, im_s: f64 },
    /// Tabulated -(grad V * rho) on grid nodes, linearly interpolated,
    /// clamped to the end values outside the grid.
    Grid { grid: SpatialGrid, force: Vec<f64> },
}

impl ForceField {
    /// Force at position x.
    pub fn at(&self, x: f64) -> f64 {
        match self {
            ForceField::Zero => 0.0,
            // F(x) = -sum_j w_j (-sin(x - x_j)) ... careful: grad cos = -sin,
            // so F = -(grad V * rho)(x) = sum_j w_j sin(x - x_j)
            //      = Im(e^{ix} conj(S)).
            ForceField::CosineMoment { re_s, im_s } => {
                let (sin_x, cos_x) = x.sin_cos();
                sin_x * re_s - cos_x * im_s
            }
            ForceField::Grid { grid, force } => {
                let h = grid.h();
                let u = (x - grid.x_min) / h;
                if u <= 0.0 {
                    return force[0];
                }
                let n = force.len();
                if u >= (n - 1) as f64 {
                    return force[n - 1];
                }
                let i = u as usize;
                let t = u - i as f64;
                force[i] * (1.0 - t) + force[i + 1] * t
            }
        }
    }

    /// Potential energy of the particle family in its own mean field,
    /// (1/2) sum_jk w_j w_k V(x_j - x_k). Exact for the cosine moment form:
    /// (1/2)|S|^2.
    pub fn self_energy(&self, cloud: &ParticleCloud, pot: &Potential) -> f64 {
        match self {
            ForceField::CosineMoment { re_s, im_s } => 0.5 * (re_s * re_s + im_s * im_s),
            _ => {
                let ps = &cloud.particles;
                let mut e = 0.0;
                for (a, pa) in ps.iter().enumerate() {
                    // Diagonal term included: V is even and finite at 0.
                    e += 0.5 * pa.w * pa.w * pot.v(0.0);
                    for pb in ps.iter().skip(a + 1) {
                        e += pa.w * pb.w * pot.v(pa.x - pb.x);
                    }
                }
                e
            }
        }
    }
}

/// Freeze the mean-field force generated by `cloud` under `pot`.
///
/// The cosine potential takes the exact moment path. Other potentials are
/// tabulated on `table` if given (direct summation at the nodes), which keeps
/// each evaluation O(1); with no table the Zero potential is the only other
/// supported choice.
pub fn mean_field_force(
    cloud: &ParticleCloud,
    pot: &Potential,
    table: Option<&SpatialGrid>,
) -> Result<ForceField> {
    match pot {
        Potential::Zero => Ok(ForceField::Zero),
        Potential::Cosine => {
            let mut re_s = 0.0;
            let mut im_s = 0.0;
            for p in &cloud.particles {
                let (s, c) = p.x.sin_cos();
                re_s += p.w * c;
                im_s += p.w * s;
            }
            Ok(ForceField::CosineMoment { re_s, im_s })
        }
        Potential::GaussianBump { .. } => {
            let grid = table
                .ok_or_else(|| {
                    QcError::InvalidConfig(
                        "bump potential needs a tabulation grid for the mean-field force".into(),
                    )
                })?
                .clone();
            let mut force = vec![0.0; grid.n + 1];
            for (i, f) in force.iter_mut().enumerate() {
                let x = grid.node(i);
                *f = -cloud.particles.iter().map(|p| p.w * pot.grad_v(x - p.x)).sum::<f64>();
            }
            Ok(ForceField::Grid { grid, force })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::Particle;
    use approx::assert_abs_diff_eq;

    fn two_particle_cloud() -> ParticleCloud {
        ParticleCloud::new(vec![
            Particle { x: 0.4, xi: 0.0, w: 0.3 },
            Particle { x: -1.1, xi: 0.0, w: 0.7 },
        ])
        .unwrap()
    }

    #[test]
    fn cosine_moment_force_matches_direct_sum() {
        let cloud = two_particle_cloud();
        let f = mean_field_force(&cloud, &Potential::Cosine, None).unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.9, 2.5] {
            let direct: f64 = cloud
                .particles
                .iter()
                .map(|p| p.w * (x - p.x).sin()) // -grad cos = sin
                .sum();
            assert_abs_diff_eq!(f.at(x), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn cosine_self_energy_matches_double_sum() {
        let cloud = two_particle_cloud();
        let f = mean_field_force(&cloud, &Potential::Cosine, None).unwrap();
        let mut direct = 0.0;
        for a in &cloud.particles {
            for b in &cloud.particles {
                direct += 0.5 * a.w * b.w * (a.x - b.x).cos();
            }
        }
        assert_abs_diff_eq!(f.self_energy(&cloud, &Potential::Cosine), direct, epsilon = 1e-14);
    }

    #[test]
    fn tabulated_bump_force_interpolates_direct_sum() {
        let cloud = two_particle_cloud();
        let pot = Potential::GaussianBump { amplitude: 0.5, width: 0.6 };
        let grid = SpatialGrid::new(-4.0, 4.0, 512).unwrap();
        let f = mean_field_force(&cloud, &pot, Some(&grid)).unwrap();
        for &x in &[-2.2, -0.1, 0.7, 1.9] {
            let direct: f64 = cloud.particles.iter().map(|p| -p.w * pot.grad_v(x - p.x)).sum();
            assert_abs_diff_eq!(f.at(x), direct, epsilon = 5e-5);
        }
        // Clamped outside the window.
        assert_abs_diff_eq!(f.at(-9.0), f.at(-4.0), epsilon = 1e-15);
    }
}
