//! Mean-field (Vlasov) transport of weighted particle families.
//!
//! The particle family solves the characteristic system of the mean-field
//! equation: every particle obeys
//!
//!   dx/dt = xi,   dxi/dt = F(t, x),   F(t, .) = -(grad V * rho_t),
//!
//! with rho_t the family's own spatial marginal. Time stepping is velocity
//! Verlet in kick-drift-kick form; the force is re-frozen from the drifted
//! positions before the closing kick, which makes the scheme the exact
//! symplectic Verlet integrator of the weighted interacting Hamiltonian
//!
//!   H = sum_j w_j xi_j^2 / 2 + (1/2) sum_jk w_j w_k V(x_j - x_k).
//!
//! Each run records the frozen force at every time node in a
//! [`MeanFieldPath`]; replaying a point through the path reproduces the run's
//! arithmetic exactly, and the replay is exactly invertible, so couplings can
//! be transported along the same discrete characteristics that moved the
//! density.

use super::field::{mean_field_force, ForceField, SpatialGrid};
use super::{ParticleCloud, Potential};
use crate::error::{QcError, Result};

/// Frozen mean-field force at every time node of a run.
#[derive(Debug, Clone)]
pub struct MeanFieldPath {
    dt: f64,
    fields: Vec<ForceField>,
}

impl MeanFieldPath {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    pub fn field(&self, node: usize) -> &ForceField {
        &self.fields[node]
    }

    /// Advance one point from time node `from` to node `to` along the frozen
    /// path. Backward replay inverts each substep exactly, so
    /// `flow(flow(z, a, b), b, a) == z` up to float roundoff.
    pub fn flow(&self, mut x: f64, mut xi: f64, from: usize, to: usize) -> Result<(f64, f64)> {
        let last = self.fields.len() - 1;
        if from > last || to > last {
            return Err(QcError::TimeOutsidePath(format!(
                "nodes {from}->{to} outside path of {last} steps"
            )));
        }
        if to >= from {
            for k in from..to {
                xi += 0.5 * self.dt * self.fields[k].at(x);
                x += self.dt * xi;
                xi += 0.5 * self.dt * self.fields[k + 1].at(x);
            }
        } else {
            for k in (to..from).rev() {
                xi -= 0.5 * self.dt * self.fields[k + 1].at(x);
                x -= self.dt * xi;
                xi -= 0.5 * self.dt * self.fields[k].at(x);
            }
        }
        Ok((x, xi))
    }
}

/// Transport a single phase point along a recorded mean-field path.
pub fn characteristic_flow(
    path: &MeanFieldPath,
    x: f64,
    xi: f64,
    from: usize,
    to: usize,
) -> Result<(f64, f64)> {
    path.flow(x, xi, from, to)
}

/// One velocity-Verlet step with `field_now` frozen at the current
/// positions. Returns the re-frozen force at the new positions (the opening
/// force of the next step).
fn step_with(
    cloud: &mut ParticleCloud,
    field_now: &ForceField,
    pot: &Potential,
    table: Option<&SpatialGrid>,
    dt: f64,
) -> Result<ForceField> {
    for p in cloud.particles.iter_mut() {
        p.xi += 0.5 * dt * field_now.at(p.x);
        p.x += dt * p.xi;
    }
    let field_next = mean_field_force(cloud, pot, table)?;
    for p in cloud.particles.iter_mut() {
        p.xi += 0.5 * dt * field_next.at(p.x);
    }
    Ok(field_next)
}

/// Single mean-field step; freezes the opening force from the current
/// positions itself. Prefer [`vlasov_run`] for full trajectories, which
/// reuses the closing force of each step as the next opening force.
pub fn vlasov_step(
    cloud: &mut ParticleCloud,
    pot: &Potential,
    table: Option<&SpatialGrid>,
    dt: f64,
) -> Result<ForceField> {
    let field_now = mean_field_force(cloud, pot, table)?;
    step_with(cloud, &field_now, pot, table, dt)
}

/// Total mean-field energy: kinetic plus self-consistent potential energy.
pub fn vlasov_energy(cloud: &ParticleCloud, field: &ForceField, pot: &Potential) -> f64 {
    let kinetic: f64 = cloud.particles.iter().map(|p| 0.5 * p.w * p.xi * p.xi).sum();
    kinetic + field.self_energy(cloud, pot)
}

/// Completed mean-field trajectory with its force path and diagnostics.
#[derive(Debug, Clone)]
pub struct VlasovRun {
    pub initial: ParticleCloud,
    pub cloud: ParticleCloud,
    pub path: MeanFieldPath,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl VlasovRun {
    /// Replay the initial family to a time node. Uses the identical
    /// per-particle arithmetic as the original run.
    pub fn cloud_at(&self, node: usize) -> Result<ParticleCloud> {
        let mut particles = self.initial.particles.clone();
        for p in particles.iter_mut() {
            let (x, xi) = self.path.flow(p.x, p.xi, 0, node)?;
            p.x = x;
            p.xi = xi;
        }
        Ok(ParticleCloud { particles })
    }

    /// Largest relative excursion of the energy series from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(1.0);
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Integrate the mean-field characteristics for `n_steps` steps of size `dt`,
/// recording the frozen force, energy, and second moment at every node.
pub fn vlasov_run(
    initial: &ParticleCloud,
    pot: &Potential,
    table: Option<&SpatialGrid>,
    dt: f64,
    n_steps: usize,
) -> Result<VlasovRun> {
    if !(dt > 0.0) || dt > 0.1 {
        return Err(QcError::StepTooLarge(format!(
            "dt = {dt} outside the supported range (0, 0.1]"
        )));
    }
    let mut cloud = initial.clone();
    let mut field = mean_field_force(&cloud, pot, table)?;
    let mut fields = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut energy = Vec::with_capacity(n_steps + 1);
    let mut second_moment = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        times.push(k as f64 * dt);
        energy.push(vlasov_energy(&cloud, &field, pot));
        second_moment.push(cloud.second_moment());
        fields.push(field.clone());
        if k < n_steps {
            field = step_with(&mut cloud, &field, pot, table, dt)?;
        }
    }
    Ok(VlasovRun {
        initial: initial.clone(),
        cloud,
        path: MeanFieldPath { dt, fields },
        times,
        energy,
        second_moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::{Particle, PhaseDensity, PhaseGrid};
    use approx::assert_abs_diff_eq;

    fn small_cloud() -> ParticleCloud {
        ParticleCloud::new(vec![
            Particle { x: 0.4, xi: 0.1, w: 0.5 },
            Particle { x: -0.9, xi: -0.3, w: 0.3 },
            Particle { x: 1.3, xi: 0.2, w: 0.2 },
        ])
        .unwrap()
    }

    #[test]
    fn free_streaming_is_exact() {
        let cloud = small_cloud();
        let run = vlasov_run(&cloud, &Potential::Zero, None, 0.01, 250).unwrap();
        for (p0, pt) in cloud.particles.iter().zip(&run.cloud.particles) {
            assert_abs_diff_eq!(pt.x, p0.x + 2.5 * p0.xi, epsilon = 1e-12);
            assert_abs_diff_eq!(pt.xi, p0.xi, epsilon = 1e-15);
        }
    }

    /// Classical RK4 on the coupled characteristic system, as an
    /// integrator-independent reference.
    fn rk4_reference(cloud: &ParticleCloud, dt: f64, n_steps: usize) -> ParticleCloud {
        let deriv = |state: &[(f64, f64)]| -> Vec<(f64, f64)> {
            let probe = ParticleCloud {
                particles: state
                    .iter()
                    .zip(&cloud.particles)
                    .map(|(&(x, xi), p0)| Particle { x, xi, w: p0.w })
                    .collect(),
            };
            let f = mean_field_force(&probe, &Potential::Cosine, None).unwrap();
            state.iter().map(|&(x, xi)| (xi, f.at(x))).collect()
        };
        let mut state: Vec<(f64, f64)> = cloud.particles.iter().map(|p| (p.x, p.xi)).collect();
        for _ in 0..n_steps {
            let k1 = deriv(&state);
            let s2: Vec<_> = state
                .iter()
                .zip(&k1)
                .map(|(&(x, xi), &(dx, dxi))| (x + 0.5 * dt * dx, xi + 0.5 * dt * dxi))
                .collect();
            let k2 = deriv(&s2);
            let s3: Vec<_> = state
                .iter()
                .zip(&k2)
                .map(|(&(x, xi), &(dx, dxi))| (x + 0.5 * dt * dx, xi + 0.5 * dt * dxi))
                .collect();
            let k3 = deriv(&s3);
            let s4: Vec<_> = state
                .iter()
                .zip(&k3)
                .map(|(&(x, xi), &(dx, dxi))| (x + dt * dx, xi + dt * dxi))
                .collect();
            let k4 = deriv(&s4);
            for i in 0..state.len() {
                state[i].0 += dt / 6.0 * (k1[i].0 + 2.0 * k2[i].0 + 2.0 * k3[i].0 + k4[i].0);
                state[i].1 += dt / 6.0 * (k1[i].1 + 2.0 * k2[i].1 + 2.0 * k3[i].1 + k4[i].1);
            }
        }
        ParticleCloud {
            particles: state
                .iter()
                .zip(&cloud.particles)
                .map(|(&(x, xi), p0)| Particle { x, xi, w: p0.w })
                .collect(),
        }
    }

    #[test]
    fn verlet_matches_rk4_reference() {
        let cloud = small_cloud();
        let run = vlasov_run(&cloud, &Potential::Cosine, None, 1e-3, 500).unwrap();
        let oracle = rk4_reference(&cloud, 2e-5, 25_000);
        for (a, b) in run.cloud.particles.iter().zip(&oracle.particles) {
            assert_abs_diff_eq!(a.x, b.x, epsilon = 1e-6);
            assert_abs_diff_eq!(a.xi, b.xi, epsilon = 1e-6);
        }
    }

    #[test]
    fn energy_is_conserved_along_the_run() {
        let grid = PhaseGrid::window(0.6, 0.4, 0.6, 0.6, 48, 48).unwrap();
        let blob = PhaseDensity::gaussian(grid, 0.6, 0.4, 0.1, 0.1).unwrap();
        let cloud = blob.to_particles().unwrap();
        let run = vlasov_run(&cloud, &Potential::Cosine, None, 0.002, 500).unwrap();
        assert!(
            run.energy_drift() < 1e-6,
            "relative energy drift {} exceeds 1e-6",
            run.energy_drift()
        );
    }

    #[test]
    fn second_moment_obeys_exponential_envelope() {
        // Along the mean-field flow, m2(t) <= e^t (m2(0) + sup|V|).
        let grid = PhaseGrid::window(0.6, 0.4, 0.6, 0.6, 32, 32).unwrap();
        let blob = PhaseDensity::gaussian(grid, 0.6, 0.4, 0.1, 0.1).unwrap();
        let cloud = blob.to_particles().unwrap();
        let pot = Potential::Cosine;
        let run = vlasov_run(&cloud, &pot, None, 0.002, 500).unwrap();
        let envelope0 = run.second_moment[0] + pot.sup_v();
        for (t, m2) in run.times.iter().zip(&run.second_moment) {
            assert!(
                *m2 <= t.exp() * envelope0 + 1e-12,
                "m2({t}) = {m2} escapes the exponential envelope"
            );
        }
    }

    #[test]
    fn replay_reproduces_the_run_exactly() {
        let cloud = small_cloud();
        let run = vlasov_run(&cloud, &Potential::Cosine, None, 0.002, 300).unwrap();
        let replay = run.cloud_at(300).unwrap();
        for (a, b) in replay.particles.iter().zip(&run.cloud.particles) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.xi, b.xi);
        }
    }

    #[test]
    fn backward_flow_inverts_forward_flow() {
        let cloud = small_cloud();
        let run = vlasov_run(&cloud, &Potential::Cosine, None, 0.002, 400).unwrap();
        let (x1, xi1) = run.path.flow(0.55, -0.35, 0, 400).unwrap();
        let (x0, xi0) = run.path.flow(x1, xi1, 400, 0).unwrap();
        assert_abs_diff_eq!(x0, 0.55, epsilon = 1e-11);
        assert_abs_diff_eq!(xi0, -0.35, epsilon = 1e-11);
    }

    #[test]
    fn flow_outside_path_is_rejected() {
        let cloud = small_cloud();
        let run = vlasov_run(&cloud, &Potential::Cosine, None, 0.002, 10).unwrap();
        assert!(run.path.flow(0.0, 0.0, 0, 11).is_err());
    }
}
