//! Classical N-body ensembles with mean-field-scaled pair interaction.
//!
//! An ensemble is a weighted family of N-body configurations
//! (x_1..x_N, xi_1..xi_N) representing a symmetric probability measure on
//! N-fold phase space. The configurations follow the Hamiltonian
//!
//!   H_N = sum_k xi_k^2 / 2 + (1/(2N)) sum_{j != k} V(x_j - x_k),
//!
//! whose characteristics are autonomous per configuration, so no force path
//! needs to be recorded: the pairwise flow of a configuration depends on that
//! configuration alone. Product initial data f^(x)N is realized exactly as
//! the full tensor product of the atoms of f (deterministic, no sampling).

use super::{Particle, ParticleCloud, Potential};
use crate::error::{QcError, Result};
use std::collections::HashMap;

/// Upper bound on stored configurations for a product ensemble.
const MAX_CONFIGURATIONS: usize = 500_000;

/// One weighted N-body configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleN {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub w: f64,
}

impl SampleN {
    pub fn n_body(&self) -> usize {
        self.x.len()
    }
}

/// Weighted family of N-body configurations.
#[derive(Debug, Clone)]
pub struct ClassicalEnsembleN {
    pub n_body: usize,
    pub samples: Vec<SampleN>,
}

impl ClassicalEnsembleN {
    /// Exact product measure f^(x)N from the atoms of a one-body family:
    /// every N-tuple of atoms becomes one configuration with the product
    /// weight. The configuration count is m^N for m atoms.
    pub fn product(atoms: &ParticleCloud, n_body: usize) -> Result<Self> {
        if n_body == 0 {
            return Err(QcError::InvalidConfig("product ensemble needs n_body >= 1".into()));
        }
        let m = atoms.particles.len();
        let mut count: usize = 1;
        for _ in 0..n_body {
            count = count
                .checked_mul(m)
                .filter(|c| *c <= MAX_CONFIGURATIONS)
                .ok_or_else(|| {
                    QcError::MemoryBudget(format!(
                        "product ensemble {m}^{n_body} exceeds {MAX_CONFIGURATIONS} configurations"
                    ))
                })?;
        }
        let mut samples = Vec::with_capacity(count);
        let mut index = vec![0usize; n_body];
        loop {
            let mut x = Vec::with_capacity(n_body);
            let mut xi = Vec::with_capacity(n_body);
            let mut w = 1.0;
            for &a in &index {
                let p = &atoms.particles[a];
                x.push(p.x);
                xi.push(p.xi);
                w *= p.w;
            }
            if w > 0.0 {
                samples.push(SampleN { x, xi, w });
            }
            // Odometer increment over the atom indices.
            let mut k = n_body;
            loop {
                if k == 0 {
                    return Ok(ClassicalEnsembleN { n_body, samples });
                }
                k -= 1;
                index[k] += 1;
                if index[k] < m {
                    break;
                }
                index[k] = 0;
            }
        }
    }

    pub fn mass(&self) -> f64 {
        self.samples.iter().map(|s| s.w).sum()
    }

    /// Per-body second moment, (1/N) sum over bodies of (x^2 + xi^2)/2.
    pub fn second_moment_per_body(&self) -> f64 {
        let n = self.n_body as f64;
        self.samples
            .iter()
            .map(|s| {
                let m2: f64 = s
                    .x
                    .iter()
                    .zip(&s.xi)
                    .map(|(x, xi)| 0.5 * (x * x + xi * xi))
                    .sum();
                s.w * m2 / n
            })
            .sum()
    }

    /// Advance every configuration one pairwise velocity-Verlet step.
    pub fn step(&mut self, pot: &Potential, dt: f64) {
        for s in self.samples.iter_mut() {
            liouville_step(s, pot, dt);
        }
    }

    /// Ensemble-averaged N-body energy.
    pub fn energy(&self, pot: &Potential) -> f64 {
        self.samples.iter().map(|s| s.w * nbody_hamiltonian(s, pot)).sum()
    }
}

/// Mean-field-scaled N-body Hamiltonian of one configuration.
pub fn nbody_hamiltonian(sample: &SampleN, pot: &Potential) -> f64 {
    let n = sample.n_body();
    let kinetic: f64 = sample.xi.iter().map(|xi| 0.5 * xi * xi).sum();
    let mut inter = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            inter += pot.v(sample.x[j] - sample.x[k]);
        }
    }
    kinetic + inter / n as f64
}

/// Pairwise forces -(1/N) sum_l grad V(x_k - x_l). The diagonal term is
/// included: grad V(0) = 0 for the even potentials supported here.
fn pairwise_forces(x: &[f64], pot: &Potential, out: &mut [f64]) {
    let n = x.len();
    match pot {
        Potential::Cosine => {
            // -(1/N) sum_l -sin(x_k - x_l) = Im(e^{i x_k} conj(S)) / N
            // with S = sum_l e^{i x_l}.
            let mut re_s = 0.0;
            let mut im_s = 0.0;
            for &xl in x {
                let (s, c) = xl.sin_cos();
                re_s += c;
                im_s += s;
            }
            for (k, f) in out.iter_mut().enumerate() {
                let (s, c) = x[k].sin_cos();
                *f = (s * re_s - c * im_s) / n as f64;
            }
        }
        _ => {
            for (k, f) in out.iter_mut().enumerate() {
                *f = -x.iter().map(|&xl| pot.grad_v(x[k] - xl)).sum::<f64>() / n as f64;
            }
        }
    }
}

/// One pairwise velocity-Verlet step of a single configuration.
pub fn liouville_step(sample: &mut SampleN, pot: &Potential, dt: f64) {
    let n = sample.n_body();
    let mut force = vec![0.0; n];
    pairwise_forces(&sample.x, pot, &mut force);
    for k in 0..n {
        sample.xi[k] += 0.5 * dt * force[k];
        sample.x[k] += dt * sample.xi[k];
    }
    pairwise_forces(&sample.x, pot, &mut force);
    for k in 0..n {
        sample.xi[k] += 0.5 * dt * force[k];
    }
}

/// Symmetrized one-body marginal of an ensemble: every body of every
/// configuration contributes its phase point with weight w/N, and atoms
/// landing on bit-identical coordinates are merged. For a freshly built
/// product ensemble this recovers exactly the one-body atom family.
pub fn marginal_classical(ens: &ClassicalEnsembleN) -> Result<ParticleCloud> {
    let n = ens.n_body as f64;
    let mut merged: HashMap<(u64, u64), f64> = HashMap::new();
    for s in &ens.samples {
        for (x, xi) in s.x.iter().zip(&s.xi) {
            *merged.entry((x.to_bits(), xi.to_bits())).or_insert(0.0) += s.w / n;
        }
    }
    let mut keys: Vec<_> = merged.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    ParticleCloud::new(
        keys.into_iter()
            .map(|((xb, xib), w)| Particle {
                x: f64::from_bits(xb),
                xi: f64::from_bits(xib),
                w,
            })
            .collect(),
    )
}
