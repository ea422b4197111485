//! Many-body limit laboratories: linear N-body quantum flow against either
//! the pairwise classical N-body flow (semiclassical limit, matched
//! generators) or N independent mean-field characteristics (combined
//! mean-field and classical limit, mismatched generators).
//!
//! Matched product data: a Gaussian one-body blob is realized as a
//! Gauss-Hermite atom family, the quantum state is the quantized N-fold
//! product reduced over permutation orbits, and the initial coupling pairs
//! every classical configuration with the quantum product column built from
//! the same atom tuple. Because the propagator commutes with body
//! permutations and bodies holding equal atoms keep equal marginals, the
//! whole coupling energy collapses onto orbit representatives:
//!
//!   E_N(t) = sum_reps W_s sum_bodies trace(c(z_{s,p}(t)) Q_{s,p}(t)),
//!
//! with z_{s,p}(t) the classical trajectory of body p of representative s
//! (pairwise flow of the representative configuration, or the mean-field
//! characteristic of its starting atom) and Q_{s,p}(t) the body-p moment
//! block of the evolved representative column. The per-body energy
//! E_N(t)/N is verified against its exponential envelope; the mean-field
//! comparison adds the 1/(N-1) consistency defect to the right-hand side.

use super::{
    bound_row, coupling_energy, matched_flow_rate, mismatch_consistency, mismatched_flow_rate,
    BoundReport, CouplingEnergy, CouplingSeries, MomentProbe, ReportLayout,
};
use crate::error::{QcError, Result};
use crate::hilbert::{husimi_table, marginal_from_columns, SpaceGrid};
use crate::phasespace::{
    marginal_classical, vlasov_run, ClassicalEnsembleN, ParticleCloud, Potential, SampleN,
};
use crate::qcdist::{table_window, windowed_measure_from_table, CostMoments, WINDOW_DROP_BUDGET};
use crate::qdynamics::{product_orbit_family, Propagator};
use crate::transport::{optimal_plan, DiscreteMeasure};

/// Configuration of one many-body limit experiment.
#[derive(Debug, Clone)]
pub struct ManyBodyLab {
    pub pot: Potential,
    pub hbar: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub n_body: usize,
    /// Center of the one-body Gaussian blob in phase space.
    pub center: (f64, f64),
    /// Standard deviations of the blob per coordinate.
    pub sigma: (f64, f64),
    /// Gauss-Hermite nodes per axis realizing the blob (2 or 3).
    pub hermite_nodes: usize,
    pub dt_quantum: f64,
    pub dt_classical: f64,
    pub t_final: f64,
    pub n_reports: usize,
    /// Verify the Husimi transport route on the one-body marginals every
    /// this many reports (0 = skip).
    pub transport_stride: usize,
    pub tol: f64,
    pub max_refinements: u32,
}

impl ManyBodyLab {
    /// Pinned semiclassical N-body acceptance experiment at a given hbar:
    /// two bodies, cosine interaction, matched product Gaussian data.
    pub fn pairwise_acceptance(hbar: f64) -> Self {
        ManyBodyLab {
            pot: Potential::Cosine,
            hbar,
            x_min: -2.0 * std::f64::consts::PI,
            x_max: 2.0 * std::f64::consts::PI,
            n_x: 128,
            n_body: 2,
            center: (0.3, 0.2),
            sigma: (0.08, 0.08),
            hermite_nodes: 3,
            dt_quantum: 0.002,
            dt_classical: 0.001,
            t_final: 1.0,
            n_reports: 11,
            transport_stride: 1,
            tol: 0.05,
            max_refinements: 1,
        }
    }

    /// Pinned combined-limit acceptance experiment at hbar = 0.25 for two or
    /// three bodies; the grid shrinks with the body count to keep the flat
    /// lattice at desk scale.
    pub fn mean_field_acceptance(n_body: usize) -> Self {
        let (n_x, hermite_nodes) = if n_body >= 3 { (32, 2) } else { (64, 3) };
        ManyBodyLab {
            pot: Potential::Cosine,
            hbar: 0.25,
            x_min: -std::f64::consts::PI,
            x_max: std::f64::consts::PI,
            n_x,
            n_body,
            center: (0.3, 0.2),
            sigma: (0.08, 0.08),
            hermite_nodes,
            dt_quantum: 0.002,
            dt_classical: 0.001,
            t_final: 1.5,
            n_reports: 16,
            transport_stride: 0,
            tol: 0.05,
            max_refinements: 1,
        }
    }
}

/// Result of a many-body limit experiment (last attempt if refined).
#[derive(Debug, Clone)]
pub struct ManyBodyOutcome {
    /// Per-body transported coupling energy against its envelope.
    pub gronwall: BoundReport,
    /// Husimi transport route on one-body marginals (empty when skipped).
    pub husimi: BoundReport,
    /// Per-body coupling energy series.
    pub series: CouplingSeries,
    /// Consistency defect entering each row's right-hand side (zero for the
    /// pairwise comparison).
    pub consistency: Vec<f64>,
    /// Per-body coupling energy at t = 0 (the floor hbar/2 for matched data).
    pub initial_energy: f64,
    pub rate: f64,
    pub dt_quantum: f64,
    pub dt_classical: f64,
    pub refinements: u32,
    pub norm_drift: f64,
    pub classical_energy_drift: f64,
    /// Largest mass dropped while windowing Husimi tables to measures.
    pub max_dropped_mass: f64,
}

impl ManyBodyOutcome {
    pub fn all_pass(&self) -> bool {
        self.gronwall.all_pass && self.husimi.all_pass
    }
}

/// Which classical dynamics rides against the N-body quantum flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClassicalSide {
    /// Pairwise N-body characteristics (matched generators).
    Pairwise,
    /// Mean-field characteristics of the one-body flow (mismatched).
    MeanField,
}

/// Verify the semiclassical limit: N-body quantum flow against the pairwise
/// classical flow, matched product data, per-body envelope at the matched
/// rate.
pub fn verify_schroedinger_liouville(lab: &ManyBodyLab) -> Result<ManyBodyOutcome> {
    run(lab, ClassicalSide::Pairwise)
}

/// Verify the combined mean-field and classical limit: N-body quantum flow
/// against N independent mean-field characteristics, per-body envelope at
/// the mismatched rate plus the 1/(N-1) consistency defect.
pub fn verify_schroedinger_vlasov(lab: &ManyBodyLab) -> Result<ManyBodyOutcome> {
    run(lab, ClassicalSide::MeanField)
}

fn run(lab: &ManyBodyLab, side: ClassicalSide) -> Result<ManyBodyOutcome> {
    let mut layout =
        ReportLayout::new(lab.t_final, lab.n_reports, lab.dt_quantum, lab.dt_classical)?;
    let mut refinements = 0u32;
    loop {
        let mut out = attempt(lab, &layout, side)?;
        out.refinements = refinements;
        if out.all_pass() || refinements >= lab.max_refinements {
            return Ok(out);
        }
        layout = layout.refined();
        refinements += 1;
    }
}

fn attempt(lab: &ManyBodyLab, layout: &ReportLayout, side: ClassicalSide) -> Result<ManyBodyOutcome> {
    if lab.n_body < 2 {
        return Err(QcError::InvalidConfig(
            "many-body comparisons need at least two bodies".into(),
        ));
    }
    let dt_q = layout.dt_quantum();
    let dt_cl = layout.dt_classical();
    if dt_q > 0.05 || dt_cl > 0.05 {
        return Err(QcError::StepTooLarge(format!(
            "steps dt_quantum = {dt_q}, dt_classical = {dt_cl} outside the supported (0, 0.05]"
        )));
    }
    let grid = SpaceGrid::new(lab.x_min, lab.x_max, lab.n_x)?;
    let (cx, cxi) = lab.center;
    let (sx, sxi) = lab.sigma;
    let atoms = ParticleCloud::gauss_hermite(cx, cxi, sx, sxi, lab.hermite_nodes)?;
    let family = product_orbit_family(&atoms, &grid, lab.hbar, lab.n_body)?;
    let n_body = lab.n_body;
    let nf = n_body as f64;

    // Quantum side: orbit representative columns under the pairwise flow.
    let mut prop = Propagator::new(&grid, n_body, lab.hbar, &lab.pot, dt_q);
    let mut cols: Vec<(f64, Vec<num_complex::Complex64>)> = family
        .iter()
        .map(|o| (o.weight, o.column.clone()))
        .collect();
    let mut probe = MomentProbe::new(&grid, n_body, lab.hbar);

    // Classical side: representative configurations under their own flow.
    let mut ensemble = match side {
        ClassicalSide::Pairwise => Some(ClassicalEnsembleN {
            n_body,
            samples: family
                .iter()
                .map(|o| SampleN {
                    x: o.atoms.iter().map(|&a| atoms.particles[a].x).collect(),
                    xi: o.atoms.iter().map(|&a| atoms.particles[a].xi).collect(),
                    w: o.weight,
                })
                .collect(),
        }),
        ClassicalSide::MeanField => None,
    };
    let vlasov = match side {
        ClassicalSide::MeanField => Some(vlasov_run(
            &atoms,
            &lab.pot,
            None,
            dt_cl,
            layout.classical_steps(),
        )?),
        ClassicalSide::Pairwise => None,
    };

    let rate = match side {
        ClassicalSide::Pairwise => matched_flow_rate(&lab.pot),
        ClassicalSide::MeanField => mismatched_flow_rate(&lab.pot),
    };

    let entries: Vec<(u32, u32, f64)> = family
        .iter()
        .enumerate()
        .flat_map(|(r, o)| {
            (0..n_body).map(move |p| {
                let i = (r * n_body + p) as u32;
                (i, i, o.weight)
            })
        })
        .collect();

    let mut series = CouplingSeries::default();
    let mut envelope_rows = Vec::with_capacity(layout.n_reports);
    let mut husimi_rows = Vec::new();
    let mut consistency = Vec::with_capacity(layout.n_reports);
    let mut initial_energy = 0.0;
    let mut norm_drift: f64 = 0.0;
    let mut classical_energy_drift: f64 = 0.0;
    let mut max_dropped: f64 = 0.0;
    let classical_e0 = ensemble.as_ref().map(|e| e.energy(&lab.pot));

    for report in 0..layout.n_reports {
        let t = layout.time(report);
        if report > 0 {
            for (_, col) in cols.iter_mut() {
                for _ in 0..layout.quantum_per_report {
                    prop.step(col);
                }
            }
            if let Some(ens) = ensemble.as_mut() {
                for _ in 0..layout.classical_per_report {
                    ens.step(&lab.pot, dt_cl);
                }
            }
        }

        // Per-representative, per-body moment blocks and classical points.
        let mut moments: Vec<CostMoments> = Vec::with_capacity(family.len() * n_body);
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(family.len() * n_body);
        let mean_field_cloud = match &vlasov {
            Some(v) => Some(v.cloud_at(report * layout.classical_per_report)?),
            None => None,
        };
        for (r, (_, col)) in cols.iter().enumerate() {
            moments.extend(probe.body_moments(col));
            match side {
                ClassicalSide::Pairwise => {
                    let s = &ensemble.as_ref().unwrap().samples[r];
                    points.extend(s.x.iter().zip(&s.xi).map(|(&x, &xi)| (x, xi)));
                }
                ClassicalSide::MeanField => {
                    let cloud = mean_field_cloud.as_ref().unwrap();
                    points.extend(family[r].atoms.iter().map(|&a| {
                        let p = &cloud.particles[a];
                        (p.x, p.xi)
                    }));
                }
            }
        }
        let total = coupling_energy(&entries, &points, &moments);
        let per_body = CouplingEnergy {
            energy: total.energy / nf,
            displacement: total.displacement / nf,
            dispersion: total.dispersion / nf,
        };
        if report == 0 {
            initial_energy = per_body.energy;
        }
        series.push(t, per_body);
        let defect = match side {
            ClassicalSide::Pairwise => 0.0,
            ClassicalSide::MeanField => mismatch_consistency(&lab.pot, n_body, t),
        };
        consistency.push(defect);
        let rhs = (rate * t).exp() * initial_energy + defect;
        envelope_rows.push(bound_row(t, per_body.energy, rhs, lab.tol));

        let norm: f64 = cols
            .iter()
            .zip(moments.chunks(n_body))
            .map(|((w, _), m)| w * m[0].trace)
            .sum();
        norm_drift = norm_drift.max((norm - 1.0).abs());
        if let (Some(ens), Some(e0)) = (ensemble.as_ref(), classical_e0) {
            let e = ens.energy(&lab.pot);
            classical_energy_drift =
                classical_energy_drift.max((e - e0).abs() / e0.abs().max(1.0));
        }

        if lab.transport_stride > 0 && report % lab.transport_stride == 0 {
            let marginal = marginal_from_columns(&cols, &grid, n_body)?;
            let table = husimi_table(&marginal, lab.hbar)?;
            let window = table_window(&table);
            let (husimi, dropped) =
                windowed_measure_from_table(&table, &window, WINDOW_DROP_BUDGET)?;
            max_dropped = max_dropped.max(dropped);
            let classical_cloud = match side {
                ClassicalSide::Pairwise => marginal_classical(ensemble.as_ref().unwrap())?,
                ClassicalSide::MeanField => mean_field_cloud.clone().unwrap(),
            };
            let classical = DiscreteMeasure::from_cloud(&classical_cloud)?;
            let plan = optimal_plan(&classical, &husimi)?;
            husimi_rows.push(bound_row(t, plan.cost, rhs + 0.5 * lab.hbar, lab.tol));
        }
    }

    if let Some(v) = &vlasov {
        classical_energy_drift = v.energy_drift();
    }

    Ok(ManyBodyOutcome {
        gronwall: BoundReport::new("per-body coupling energy envelope", rate, lab.tol, envelope_rows),
        husimi: BoundReport::new("marginal husimi transport envelope", rate, lab.tol, husimi_rows),
        series,
        consistency,
        initial_energy,
        rate,
        dt_quantum: dt_q,
        dt_classical: dt_cl,
        refinements: 0,
        norm_drift,
        classical_energy_drift,
        max_dropped_mass: max_dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, tensor_product};
    use crate::phasespace::{liouville_step, Particle};
    use approx::assert_abs_diff_eq;

    fn smoke_lab() -> ManyBodyLab {
        ManyBodyLab {
            pot: Potential::Cosine,
            hbar: 0.125,
            x_min: -std::f64::consts::PI,
            x_max: std::f64::consts::PI,
            n_x: 32,
            n_body: 2,
            center: (0.3, 0.0),
            sigma: (0.08, 0.08),
            hermite_nodes: 2,
            dt_quantum: 0.005,
            dt_classical: 0.0025,
            t_final: 0.2,
            n_reports: 3,
            transport_stride: 1,
            tol: 0.05,
            max_refinements: 0,
        }
    }

    #[test]
    fn pairwise_comparison_passes_on_a_short_run() {
        let out = verify_schroedinger_liouville(&smoke_lab()).unwrap();
        assert!(out.gronwall.all_pass, "envelope rows: {:?}", out.gronwall.rows);
        assert!(out.husimi.all_pass, "husimi rows: {:?}", out.husimi.rows);
        assert_abs_diff_eq!(out.initial_energy, 0.0625, epsilon = 1e-9);
        assert_abs_diff_eq!(out.gronwall.rows[0].ratio, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.rate, 5.0, epsilon = 1e-15);
        assert!(out.consistency.iter().all(|c| *c == 0.0));
        assert!(out.norm_drift < 1e-9, "norm drift {}", out.norm_drift);
        assert!(out.classical_energy_drift < 1e-6);
        // The diagonal atom-to-block pairing caps the t = 0 marginal
        // transport cost at hbar; overlap lets the plan undercut it while
        // the cost stays of order hbar.
        assert!(out.husimi.rows[0].lhs <= 0.125 + 1e-6);
        assert!(out.husimi.rows[0].lhs >= 0.25 * 0.125);
    }

    #[test]
    fn mean_field_comparison_passes_and_records_the_defect() {
        let mut lab = smoke_lab();
        lab.transport_stride = 0;
        let out = verify_schroedinger_vlasov(&lab).unwrap();
        assert!(out.gronwall.all_pass, "envelope rows: {:?}", out.gronwall.rows);
        assert!(out.husimi.rows.is_empty());
        assert_abs_diff_eq!(out.initial_energy, 0.0625, epsilon = 1e-9);
        assert_abs_diff_eq!(out.rate, 6.0, epsilon = 1e-15);
        for (j, c) in out.consistency.iter().enumerate() {
            let t = out.series.times[j];
            assert_abs_diff_eq!(*c, mismatch_consistency(&lab.pot, 2, t), epsilon = 1e-12);
        }
        assert!(out.consistency[out.consistency.len() - 1] > 0.0);
    }

    /// With no interaction the pairwise and mean-field classical flows both
    /// reduce to free streaming, so the two verifiers must produce the same
    /// coupling energy series (their envelopes differ only through the rate).
    #[test]
    fn zero_potential_makes_both_classical_sides_agree() {
        let mut lab = smoke_lab();
        lab.pot = Potential::Zero;
        lab.transport_stride = 0;
        let a = verify_schroedinger_liouville(&lab).unwrap();
        let b = verify_schroedinger_vlasov(&lab).unwrap();
        for (ea, eb) in a.series.energy.iter().zip(&b.series.energy) {
            assert_abs_diff_eq!(*ea, *eb, epsilon = 1e-12);
        }
        assert!(a.rate < b.rate);
    }

    /// The orbit-reduced coupling energy must agree with the brute-force sum
    /// over all ordered atom tuples, each evolving its own column and its own
    /// classical configuration.
    #[test]
    fn orbit_reduction_matches_the_ordered_tuple_sum() {
        let grid = SpaceGrid::new(-std::f64::consts::PI, std::f64::consts::PI, 32).unwrap();
        let hbar = 0.125;
        let pot = Potential::Cosine;
        let atoms = ParticleCloud::new(vec![
            Particle { x: 0.25, xi: 0.1, w: 0.7 },
            Particle { x: -0.15, xi: -0.05, w: 0.3 },
        ])
        .unwrap();
        let n_body = 2;
        let dt = 0.005;
        let n_steps = 30;

        // Orbit route.
        let family = product_orbit_family(&atoms, &grid, hbar, n_body).unwrap();
        let mut prop = Propagator::new(&grid, n_body, hbar, &pot, dt);
        let mut probe = MomentProbe::new(&grid, n_body, hbar);
        let mut orbit_cols: Vec<_> = family.iter().map(|o| o.column.clone()).collect();
        let mut orbit_samples: Vec<SampleN> = family
            .iter()
            .map(|o| SampleN {
                x: o.atoms.iter().map(|&a| atoms.particles[a].x).collect(),
                xi: o.atoms.iter().map(|&a| atoms.particles[a].xi).collect(),
                w: o.weight,
            })
            .collect();
        for _ in 0..n_steps {
            for col in orbit_cols.iter_mut() {
                prop.step(col);
            }
            for s in orbit_samples.iter_mut() {
                liouville_step(s, &pot, dt);
            }
        }
        let mut orbit_energy = 0.0;
        for (col, s) in orbit_cols.iter().zip(&orbit_samples) {
            let ms = probe.body_moments(col);
            for (p, m) in ms.iter().enumerate() {
                orbit_energy += s.w * m.eval(s.x[p], s.xi[p]);
            }
        }

        // Ordered route: all m^N tuples evolve independently.
        let states: Vec<_> = atoms
            .particles
            .iter()
            .map(|p| coherent_state(&grid, hbar, p.x, p.xi).unwrap())
            .collect();
        let mut ordered_energy = 0.0;
        for a in 0..2usize {
            for b in 0..2usize {
                let w = atoms.particles[a].w * atoms.particles[b].w;
                let mut col = tensor_product(&[&states[a], &states[b]]).unwrap();
                let mut s = SampleN {
                    x: vec![atoms.particles[a].x, atoms.particles[b].x],
                    xi: vec![atoms.particles[a].xi, atoms.particles[b].xi],
                    w,
                };
                for _ in 0..n_steps {
                    prop.step(&mut col);
                    liouville_step(&mut s, &pot, dt);
                }
                let ms = probe.body_moments(&col);
                for (p, m) in ms.iter().enumerate() {
                    ordered_energy += w * m.eval(s.x[p], s.xi[p]);
                }
            }
        }
        assert_abs_diff_eq!(orbit_energy, ordered_energy, epsilon = 1e-10);
    }
}
