//! Exact small-instance solver for operator-valued couplings.
//!
//! Minimizes sum_k trace(C_k Q_k) over Hermitian blocks Q_k subject to
//! Q_k >= 0, trace Q_k = p_k, sum_k Q_k = R. This is a semidefinite program;
//! it is solved by two-block ADMM. One block handles the affine constraints
//! in closed form (a Lagrange solve with gauge sum lambda_k = 0), the other
//! projects onto the positive cone. Both subproblems are exact, so the
//! iteration converges globally on these convex instances.
//!
//! Every feasible block satisfies 0 <= Q_k <= R, hence lives on the range of
//! R; the solve is performed inside that subspace, which keeps rank-deficient
//! inputs (coherent mixtures) small and well conditioned.

use crate::error::{QcError, Result};
use crate::linalg::{eigh, hermiticity_defect, psd_project, CMat};
use num_complex::Complex64;

/// Result of an exact coupling solve.
#[derive(Debug, Clone)]
pub struct CouplingSolution {
    /// Optimal cost sum_k trace(C_k Q_k) evaluated on the positive blocks.
    pub cost: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// max_k |trace Q_k - p_k| of the returned blocks.
    pub trace_defect: f64,
    /// Frobenius norm of sum_k Q_k - R of the returned blocks.
    pub sum_defect: f64,
    /// Optimal blocks in the original dimension, one per atom.
    pub couplings: Vec<CMat>,
}

fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn hermitize(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            out[[i, j]] = m;
            out[[j, i]] = m.conj();
        }
        out[[i, i]] = Complex64::new(a[[i, i]].re, 0.0);
    }
    out
}

fn plain_trace_re(a: &CMat) -> f64 {
    (0..a.nrows()).map(|i| a[[i, i]].re).sum()
}

fn pair_trace_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[[i, j]] * b[[j, i]]).re;
        }
    }
    s
}

/// Solve the coupling program exactly. `costs[k]` is the Hermitian cost
/// matrix paired with atom k (plain matrix-trace pairing), `masses[k]` its
/// prescribed trace, `r` the prescribed sum. Converges when both ADMM
/// residuals drop below `tol`.
pub fn solve_coupling_exact(
    costs: &[CMat],
    masses: &[f64],
    r: &CMat,
    tol: f64,
    max_iter: usize,
) -> Result<CouplingSolution> {
    let m_atoms = costs.len();
    if m_atoms == 0 || masses.len() != m_atoms {
        return Err(QcError::InvalidConfig(
            "coupling solve needs matching nonempty costs and masses".into(),
        ));
    }
    let n = r.nrows();
    if r.ncols() != n || costs.iter().any(|c| c.nrows() != n || c.ncols() != n) {
        return Err(QcError::GridMismatch(
            "cost and density matrices must share one square dimension".into(),
        ));
    }
    if masses.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(QcError::InvalidMeasure("atom masses must be >= 0".into()));
    }
    let trace_r = plain_trace_re(r);
    let mass_sum: f64 = masses.iter().sum();
    if (mass_sum - trace_r).abs() > 1e-8 * (1.0 + trace_r.abs()) {
        return Err(QcError::InfeasiblePlan(format!(
            "atom masses sum to {mass_sum} but trace R = {trace_r}"
        )));
    }
    let scale = frobenius(r).max(1.0);
    if hermiticity_defect(r) > 1e-8 * scale {
        return Err(QcError::InvalidMeasure("R must be Hermitian".into()));
    }

    // Atoms of zero mass are forced to Q_k = 0; solve for the rest.
    let active: Vec<usize> = (0..m_atoms).filter(|&k| masses[k] > 0.0).collect();
    let m = active.len();
    if m == 0 {
        return Err(QcError::InvalidMeasure("all atom masses vanish".into()));
    }

    // Restrict to the range of R.
    let (evals, evecs) = eigh(r)?;
    let emax = evals.iter().copied().fold(0.0_f64, f64::max);
    let kept: Vec<usize> = (0..n)
        .filter(|&i| evals[i] > 1e-12 * emax.max(1e-300))
        .collect();
    let d = kept.len();
    if d == 0 {
        return Err(QcError::InvalidMeasure("R has no positive spectrum".into()));
    }
    let mut v = CMat::zeros((n, d));
    for (col, &src) in kept.iter().enumerate() {
        for i in 0..n {
            v[[i, col]] = evecs[[i, src]];
        }
    }
    let vh = v.t().mapv(|z| z.conj());
    let mut r_hat = CMat::zeros((d, d));
    for (col, &src) in kept.iter().enumerate() {
        r_hat[[col, col]] = Complex64::new(evals[src], 0.0);
    }
    let c_hat: Vec<CMat> = active
        .iter()
        .map(|&k| hermitize(&vh.dot(&costs[k]).dot(&v)))
        .collect();

    // Fast path: a single atom has its block forced to R.
    if m == 1 {
        let cost = pair_trace_re(&c_hat[0], &r_hat);
        let mut couplings = vec![CMat::zeros((n, n)); m_atoms];
        couplings[active[0]] = hermitize(&v.dot(&r_hat).dot(&vh));
        return Ok(CouplingSolution {
            cost,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            trace_defect: (plain_trace_re(&r_hat) - masses[active[0]]).abs(),
            sum_defect: 0.0,
            couplings,
        });
    }

    let p: Vec<f64> = active.iter().map(|&k| masses[k]).collect();
    let mut rho = (c_hat.iter().map(frobenius).sum::<f64>() / m as f64).max(1e-6);
    let eye = CMat::eye(d);
    // Warm start at the product coupling, feasible for both constraint sets.
    let mut z: Vec<CMat> = p.iter().map(|&pk| r_hat.mapv(|x| x * pk)).collect();
    let mut u: Vec<CMat> = (0..m).map(|_| CMat::zeros((d, d))).collect();
    let mut q: Vec<CMat> = z.clone();

    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..max_iter {
        iterations = iter + 1;
        // Affine step: minimize <C,Q> + (rho/2)||Q - Z + U||^2 subject to
        // trace Q_k = p_k and sum Q_k = R, via multipliers Y (sum) and
        // lambda_k (traces) with gauge sum lambda = 0.
        let a: Vec<CMat> = (0..m)
            .map(|k| &z[k] - &u[k] - &c_hat[k].mapv(|x| x / rho))
            .collect();
        let mut s = r_hat.mapv(|x| -x);
        for ak in &a {
            s = &s + ak;
        }
        let y = s.mapv(|x| x * (rho / m as f64));
        let tr_y = plain_trace_re(&y);
        for k in 0..m {
            let lambda = (rho * (plain_trace_re(&a[k]) - p[k]) - tr_y) / d as f64;
            q[k] = &a[k] - &y.mapv(|x| x / rho) - &eye.mapv(|x| x * (lambda / rho));
        }
        // Positive-cone step and scaled dual update, with the usual
        // over-relaxation to speed up the linear tail of the iteration.
        let alpha = 1.7;
        let mut primal2 = 0.0;
        let mut dual2 = 0.0;
        for k in 0..m {
            let qh = &q[k].mapv(|x| x * alpha) + &z[k].mapv(|x| x * (1.0 - alpha));
            let w = hermitize(&(&qh + &u[k]));
            let z_new = psd_project(&w)?;
            let dz = &z_new - &z[k];
            dual2 += dz.iter().map(|x| x.norm_sqr()).sum::<f64>();
            u[k] = &(&u[k] + &qh) - &z_new;
            let dq = &q[k] - &z_new;
            primal2 += dq.iter().map(|x| x.norm_sqr()).sum::<f64>();
            z[k] = z_new;
        }
        primal = primal2.sqrt();
        dual = rho * dual2.sqrt();
        if primal < tol && dual < tol {
            break;
        }
        // Residual balancing keeps the two error channels comparable; a
        // lopsided pair means one channel crawls while the other idles.
        if iterations % 64 == 0 {
            if primal > 5.0 * dual && rho < 1e8 {
                rho *= 2.0;
                for uk in u.iter_mut() {
                    *uk = uk.mapv(|x| x * 0.5);
                }
            } else if dual > 5.0 * primal && rho > 1e-8 {
                rho *= 0.5;
                for uk in u.iter_mut() {
                    *uk = uk.mapv(|x| x * 2.0);
                }
            }
        }
    }
    if primal >= tol || dual >= tol {
        return Err(QcError::SolverNotConverged(format!(
            "coupling solve stalled after {iterations} iterations \
             (primal {primal:.3e}, dual {dual:.3e}, tol {tol:.1e})"
        )));
    }

    // Report from the positive blocks; their affine defects are bounded by
    // the primal residual.
    let cost = (0..m).map(|k| pair_trace_re(&c_hat[k], &z[k])).sum();
    let mut trace_defect = 0.0_f64;
    let mut sum = r_hat.mapv(|x| -x);
    for k in 0..m {
        trace_defect = trace_defect.max((plain_trace_re(&z[k]) - p[k]).abs());
        sum = &sum + &z[k];
    }
    let sum_defect = frobenius(&sum);
    let mut couplings = vec![CMat::zeros((n, n)); m_atoms];
    for (slot, &k) in active.iter().enumerate() {
        couplings[k] = hermitize(&v.dot(&z[slot]).dot(&vh));
    }
    Ok(CouplingSolution {
        cost,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        trace_defect,
        sum_defect,
        couplings,
    })
}
