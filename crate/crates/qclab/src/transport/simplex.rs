//! Transportation network simplex with candidate-arc pricing.
//!
//! The bipartite problem min sum c_ij x_ij with row sums a and column sums b
//! is solved on a spanning-tree basis. To avoid touching all m*n arcs every
//! pivot, entering arcs are drawn from a candidate pool (nearest sinks per
//! source plus the initial basis); once the pool is optimal, a full pricing
//! sweep either certifies global optimality or refills the pool with the
//! worst violators. Degenerate stalling switches the entering rule to
//! Bland's (first eligible arc by index), which cannot cycle.

use std::collections::HashSet;

use crate::error::{QcError, Result};
use crate::transport::{half_sq_dist, DiscreteMeasure, PlanMethod, TransportPlan};

/// Nearest sinks kept per source in the initial candidate pool.
const KNN_ARCS: usize = 16;
/// Cap on total pivots before declaring non-convergence.
const PIVOT_CAP_FACTOR: usize = 400;
/// Degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 256;
/// Violating arcs admitted per pricing round, as a multiple of m + n.
const REFILL_FACTOR: usize = 4;

struct Basis {
    /// parent[node] in the spanning tree; root is node 0 (source 0).
    parent: Vec<usize>,
    /// Arc flow on the edge to the parent.
    flow_to_parent: Vec<f64>,
    /// Tree adjacency: for each node, its tree neighbours.
    adj: Vec<Vec<usize>>,
    /// Breadth-first order from the root, recomputed after each pivot.
    order: Vec<usize>,
    m: usize,
}

impl Basis {
    fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Rebuild parent pointers and traversal order from the adjacency lists.
    fn reroot(&mut self) {
        let n = self.node_count();
        let mut seen = vec![false; n];
        self.order.clear();
        self.order.push(0);
        seen[0] = true;
        self.parent[0] = 0;
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            for idx in 0..self.adj[u].len() {
                let w = self.adj[u][idx];
                if !seen[w] {
                    seen[w] = true;
                    self.parent[w] = u;
                    self.order.push(w);
                }
            }
        }
        debug_assert_eq!(self.order.len(), n, "basis must span all nodes");
    }

    /// Dual potentials: u on sources, v on sinks, u[0] = 0, with
    /// u_i + v_j = c_ij on every basis arc.
    fn duals(&self, cost: &dyn Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let n = self.node_count() - m;
        let mut u = vec![0.0; m];
        let mut v = vec![0.0; n];
        for &node in self.order.iter().skip(1) {
            let p = self.parent[node];
            if node < m {
                // node is a source, parent is a sink
                u[node] = cost(node, p - m) - v[p - m];
            } else {
                v[node - m] = cost(p, node - m) - u[p];
            }
        }
        (u, v)
    }

    /// Path from `node` up to the root as a list of nodes.
    fn path_to_root(&self, mut node: usize) -> Vec<usize> {
        let mut path = vec![node];
        while node != 0 {
            node = self.parent[node];
            path.push(node);
        }
        path
    }
}

/// Initial feasible tree by the northwest-corner walk over index order.
/// Produces exactly m + n - 1 basis arcs (ties advance only the row pointer
/// and leave a zero-flow arc).
fn northwest_basis(a: &[f64], b: &[f64]) -> Vec<(usize, usize, f64)> {
    let (m, n) = (a.len(), b.len());
    let mut arcs = Vec::with_capacity(m + n - 1);
    let mut rem_a = a.to_vec();
    let mut rem_b = b.to_vec();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let q = rem_a[i].min(rem_b[j]);
        arcs.push((i, j, q));
        rem_a[i] -= q;
        rem_b[j] -= q;
        if i + 1 == m && j + 1 == n {
            break;
        }
        // On a tie advance only one pointer so the tree stays connected.
        if rem_a[i] <= rem_b[j] && i + 1 < m {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(arcs.len(), m + n - 1);
    arcs
}

fn build_basis(m: usize, n: usize, arcs: &[(usize, usize, f64)]) -> Basis {
    let total = m + n;
    let mut adj = vec![Vec::new(); total];
    let mut flow = vec![0.0; total];
    let mut basis = Basis {
        parent: vec![0; total],
        flow_to_parent: vec![0.0; total],
        adj: Vec::new(),
        order: Vec::new(),
        m,
    };
    for &(i, j, q) in arcs {
        adj[i].push(m + j);
        adj[m + j].push(i);
        // Flow is attached after rerooting; stash by arc below.
        let _ = q;
    }
    basis.adj = adj;
    basis.reroot();
    // Assign flows: each arc (i, j) is parent-child in exactly one direction.
    for &(i, j, q) in arcs {
        let (s, t) = (i, m + j);
        if basis.parent[s] == t {
            flow[s] = q;
        } else {
            debug_assert_eq!(basis.parent[t], s);
            flow[t] = q;
        }
    }
    basis.flow_to_parent = flow;
    basis
}

/// One simplex pivot: admit arc (ei, ej), push theta around the unique tree
/// cycle, drop the blocking arc. Returns false if the pivot was degenerate
/// (theta == 0).
fn pivot(basis: &mut Basis, ei: usize, ej: usize) -> bool {
    let m = basis.m;
    let (s, t) = (ei, m + ej);
    // Cycle = entering arc + tree path between its endpoints.
    let ps = basis.path_to_root(s);
    let pt = basis.path_to_root(t);
    let set: HashSet<usize> = ps.iter().copied().collect();
    let mut lca = 0;
    for &node in &pt {
        if set.contains(&node) {
            lca = node;
            break;
        }
    }
    // Orientation: pushing one unit along s -> t. Walking s up to the LCA,
    // an arc whose source side is nearer s carries flow in the same
    // direction as... Concretely: on the source-side path, each tree arc
    // (child -> parent) sees +1 if the child is a sink-side node, -1 if the
    // child is a source-side node; on the sink-side path the signs flip.
    let mut cycle: Vec<(usize, f64)> = Vec::new(); // (child node, sign)
    for &node in ps.iter().take_while(|&&nd| nd != lca) {
        let sign = if node < m { -1.0 } else { 1.0 };
        cycle.push((node, sign));
    }
    for &node in pt.iter().take_while(|&&nd| nd != lca) {
        let sign = if node < m { 1.0 } else { -1.0 };
        cycle.push((node, sign));
    }
    // theta = min flow over arcs that lose flow.
    let mut theta = f64::INFINITY;
    let mut leaving: Option<usize> = None;
    for &(node, sign) in &cycle {
        if sign < 0.0 && basis.flow_to_parent[node] < theta {
            theta = basis.flow_to_parent[node];
            leaving = Some(node);
        }
    }
    let leaving = leaving.expect("cycle must contain a decreasing arc");
    for &(node, sign) in &cycle {
        basis.flow_to_parent[node] = (basis.flow_to_parent[node] + sign * theta).max(0.0);
    }
    // Swap arcs in the adjacency: drop (leaving, parent), add (s, t).
    let lp = basis.parent[leaving];
    basis.adj[leaving].retain(|&x| x != lp);
    basis.adj[lp].retain(|&x| x != leaving);
    basis.adj[s].push(t);
    basis.adj[t].push(s);
    // Capture surviving flows keyed by arc endpoints, then reroot and
    // reassign (the parent orientation of untouched arcs can flip).
    let old_parent = basis.parent.clone();
    let mut arc_flows: Vec<(usize, usize, f64)> = Vec::with_capacity(basis.node_count() - 1);
    for node in 0..basis.node_count() {
        if node == 0 {
            continue;
        }
        if node == leaving {
            continue;
        }
        let p = old_parent[node];
        if node == s && p == t {
            continue;
        }
        if node == t && p == s {
            continue;
        }
        arc_flows.push((node, p, basis.flow_to_parent[node]));
    }
    arc_flows.push((s, t, theta));
    basis.reroot();
    let mut flow = vec![0.0; basis.node_count()];
    for &(x, y, q) in &arc_flows {
        if basis.parent[x] == y {
            flow[x] = q;
        } else {
            debug_assert_eq!(basis.parent[y], x);
            flow[y] = q;
        }
    }
    basis.flow_to_parent = flow;
    theta > 0.0
}

/// Exact optimal transport between two discrete measures by network simplex.
/// The returned plan carries dual potentials; `dual_violation` and
/// `dual_gap` are computed against the full cost matrix, so a plan with both
/// near zero is certified optimal independently of the solver's internals.
pub fn exact_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportPlan> {
    let m = mu.support_len();
    let n = nu.support_len();
    let cost = |i: usize, j: usize| half_sq_dist(mu.points[i], nu.points[j]);
    let cost_scale = 1.0
        + mu.points
            .iter()
            .chain(nu.points.iter())
            .map(|&(x, xi)| x * x + xi * xi)
            .fold(0.0, f64::max);
    let tol = 1e-12 * cost_scale;

    // Single-row / single-column problems are already determined.
    if m == 1 || n == 1 {
        let mut entries = Vec::new();
        let mut total = 0.0;
        if m == 1 {
            for j in 0..n {
                entries.push((0u32, j as u32, nu.weights[j]));
                total += nu.weights[j] * cost(0, j);
            }
        } else {
            for i in 0..m {
                entries.push((i as u32, 0u32, mu.weights[i]));
                total += mu.weights[i] * cost(i, 0);
            }
        }
        let (u, v) = if m == 1 {
            (vec![0.0], (0..n).map(|j| cost(0, j)).collect())
        } else {
            let v0 = (0..m).map(|i| cost(i, 0)).fold(f64::INFINITY, f64::min);
            ((0..m).map(|i| cost(i, 0) - v0).collect(), vec![v0])
        };
        let dual_obj: f64 = mu.weights.iter().zip(&u).map(|(a, ui)| a * ui).sum::<f64>()
            + nu.weights.iter().zip(&v).map(|(b, vj)| b * vj).sum::<f64>();
        return Ok(TransportPlan {
            method: PlanMethod::NetworkSimplex,
            entries: entries.into_iter().filter(|e| e.2 > 0.0).collect(),
            cost: total,
            dual_violation: 0.0,
            dual_gap: total - dual_obj,
            u,
            v,
        });
    }

    // Candidate pool: nearest sinks per source, nearest sources per sink,
    // and every initial basis arc.
    let mut pool: Vec<(usize, usize)> = Vec::new();
    let mut in_pool: HashSet<(u32, u32)> = HashSet::new();
    let admit = |pool: &mut Vec<(usize, usize)>,
                     in_pool: &mut HashSet<(u32, u32)>,
                     i: usize,
                     j: usize| {
        if in_pool.insert((i as u32, j as u32)) {
            pool.push((i, j));
        }
    };
    let k = KNN_ARCS.min(n);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..m {
        scored.clear();
        scored.extend((0..n).map(|j| (cost(i, j), j)));
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, j) in scored.iter().take(k) {
            admit(&mut pool, &mut in_pool, i, j);
        }
    }
    let k = KNN_ARCS.min(m);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(m);
    for j in 0..n {
        scored.clear();
        scored.extend((0..m).map(|i| (cost(i, j), i)));
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, i) in scored.iter().take(k) {
            admit(&mut pool, &mut in_pool, i, j);
        }
    }
    let init = northwest_basis(&mu.weights, &nu.weights);
    for &(i, j, _) in &init {
        admit(&mut pool, &mut in_pool, i, j);
    }
    let mut basis = build_basis(m, n, &init);

    let pivot_cap = PIVOT_CAP_FACTOR * (m + n);
    let mut pivots = 0usize;
    let mut stall = 0usize;
    let mut bland = false;
    let (mut u, mut v) = basis.duals(&cost);
    loop {
        // Entering arc from the pool.
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -tol;
        for &(i, j) in &pool {
            let r = cost(i, j) - u[i] - v[j];
            if bland {
                if r < -tol {
                    entering = Some((i, j));
                    break;
                }
            } else if r < best {
                best = r;
                entering = Some((i, j));
            }
        }
        match entering {
            Some((i, j)) => {
                // Skip arcs already in the tree (reduced cost 0 by
                // construction; a tiny negative value is roundoff).
                if basis.parent[i] == m + j || basis.parent[m + j] == i {
                    // Treat as numerically optimal for this arc.
                    pool.retain(|&(a, b)| (a, b) != (i, j));
                    in_pool.remove(&(i as u32, j as u32));
                    continue;
                }
                let improved = pivot(&mut basis, i, j);
                let d = basis.duals(&cost);
                u = d.0;
                v = d.1;
                pivots += 1;
                if pivots > pivot_cap {
                    return Err(QcError::SolverNotConverged(format!(
                        "network simplex exceeded {pivot_cap} pivots on {m}x{n} problem"
                    )));
                }
                if improved {
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        bland = true;
                    }
                }
            }
            None => {
                // Pool is optimal; price the full graph.
                let mut violators: Vec<(f64, usize, usize)> = Vec::new();
                for i in 0..m {
                    for j in 0..n {
                        let r = cost(i, j) - u[i] - v[j];
                        if r < -tol {
                            violators.push((r, i, j));
                        }
                    }
                }
                if violators.is_empty() {
                    break;
                }
                violators.sort_by(|a, b| a.0.total_cmp(&b.0));
                for &(_, i, j) in violators.iter().take(REFILL_FACTOR * (m + n)) {
                    admit(&mut pool, &mut in_pool, i, j);
                }
            }
        }
    }

    // Assemble the plan from strictly positive tree flows.
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    let mut total = 0.0;
    for node in 1..basis.node_count() {
        let q = basis.flow_to_parent[node];
        if q <= 0.0 {
            continue;
        }
        let p = basis.parent[node];
        let (i, j) = if node < m { (node, p - m) } else { (p, node - m) };
        entries.push((i as u32, j as u32, q));
        total += q * cost(i, j);
    }
    entries.sort_unstable_by_key(|&(i, j, _)| (i, j));

    // Independent optimality certificate.
    let mut violation = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            violation = violation.max(u[i] + v[j] - cost(i, j));
        }
    }
    let dual_obj: f64 = mu.weights.iter().zip(&u).map(|(a, ui)| a * ui).sum::<f64>()
        + nu.weights.iter().zip(&v).map(|(b, vj)| b * vj).sum::<f64>();

    Ok(TransportPlan {
        method: PlanMethod::NetworkSimplex,
        entries,
        cost: total,
        u,
        v,
        dual_violation: violation.max(0.0),
        dual_gap: total - dual_obj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{mean_gap_bound, tensor_cost_bound};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn certify(plan: &TransportPlan, mu: &DiscreteMeasure, nu: &DiscreteMeasure) {
        assert!(plan.marginal_defect(mu, nu) < 1e-12, "marginals must match");
        assert!(
            plan.dual_violation < 1e-9 * (1.0 + plan.cost),
            "dual infeasibility {}",
            plan.dual_violation
        );
        assert!(
            plan.dual_gap.abs() < 1e-8 * (1.0 + plan.cost),
            "duality gap {}",
            plan.dual_gap
        );
    }

    /// Minimum assignment cost over all permutations (equal-mass case),
    /// an exhaustive stand-in oracle for small square problems.
    fn permutation_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let n = mu.support_len();
        assert_eq!(n, nu.support_len());
        let mut idx: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        // Heap's algorithm, iterative.
        let mut c = vec![0usize; n];
        let eval = |perm: &[usize]| -> f64 {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| half_sq_dist(mu.points[i], nu.points[j]) / n as f64)
                .sum()
        };
        best = best.min(eval(&idx));
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    idx.swap(0, i);
                } else {
                    idx.swap(c[i], i);
                }
                best = best.min(eval(&idx));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best
    }

    #[test]
    fn identical_measures_cost_zero() {
        let m = DiscreteMeasure::new(
            vec![(0.0, 0.0), (1.0, -1.0), (2.0, 0.5)],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let plan = exact_plan(&m, &m).unwrap();
        certify(&plan, &m, &m);
        assert_abs_diff_eq!(plan.cost, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn translated_measure_costs_half_shift_squared() {
        // Shifting every atom by (dx, dxi) moves each unit of mass exactly
        // that far, so the optimal cost is |shift|^2 / 2 and the standard
        // squared distance is |shift|^2.
        let pts = vec![(0.0, 0.0), (0.7, -0.3), (-0.4, 0.9), (1.3, 0.2)];
        let w = vec![0.1, 0.4, 0.3, 0.2];
        let mu = DiscreteMeasure::new(pts.clone(), w.clone()).unwrap();
        let (dx, dxi) = (0.8, -0.6);
        let nu = DiscreteMeasure::new(
            pts.iter().map(|&(x, xi)| (x + dx, xi + dxi)).collect(),
            w,
        )
        .unwrap();
        let plan = exact_plan(&mu, &nu).unwrap();
        certify(&plan, &mu, &nu);
        let shift_sq = dx * dx + dxi * dxi;
        assert_abs_diff_eq!(plan.cost, 0.5 * shift_sq, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.w2_squared_standard(), shift_sq, epsilon = 1e-12);
    }

    #[test]
    fn matches_permutation_oracle_on_equal_mass_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..6 {
            let n = 5;
            let pts_a: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let pts_b: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let w = vec![1.0 / n as f64; n];
            let mu = DiscreteMeasure::new(pts_a, w.clone()).unwrap();
            let nu = DiscreteMeasure::new(pts_b, w).unwrap();
            let plan = exact_plan(&mu, &nu).unwrap();
            certify(&plan, &mu, &nu);
            let oracle = permutation_oracle(&mu, &nu);
            assert_abs_diff_eq!(plan.cost, oracle, epsilon = 1e-12);
            let _ = trial;
        }
    }

    #[test]
    fn certificates_hold_on_unbalanced_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(40usize, 55usize), (63, 17), (128, 128)] {
            let pts_a: Vec<(f64, f64)> = (0..m)
                .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let pts_b: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let mut wa: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sa: f64 = wa.iter().sum();
            wa.iter_mut().for_each(|w| *w /= sa);
            let mut wb: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sb: f64 = wb.iter().sum();
            wb.iter_mut().for_each(|w| *w /= sb);
            let mu = DiscreteMeasure::new(pts_a, wa).unwrap();
            let nu = DiscreteMeasure::new(pts_b, wb).unwrap();
            let plan = exact_plan(&mu, &nu).unwrap();
            certify(&plan, &mu, &nu);
            assert!(plan.cost <= tensor_cost_bound(&mu, &nu) + 1e-12);
            assert!(plan.cost + 1e-12 >= mean_gap_bound(&mu, &nu));
        }
    }

    #[test]
    fn single_atom_sides_are_immediate() {
        let mu = DiscreteMeasure::new(vec![(0.0, 0.0)], vec![1.0]).unwrap();
        let nu = DiscreteMeasure::new(
            vec![(1.0, 0.0), (0.0, 1.0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let plan = exact_plan(&mu, &nu).unwrap();
        certify(&plan, &mu, &nu);
        assert_abs_diff_eq!(plan.cost, 0.5 * (0.5 * 1.0 + 0.5 * 1.0), epsilon = 1e-15);
        let rev = exact_plan(&nu, &mu).unwrap();
        certify(&rev, &nu, &mu);
        assert_abs_diff_eq!(rev.cost, plan.cost, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_equal_masses_terminate() {
        // Many tied masses at lattice points: a degenerate instance that
        // exercises zero-flow pivots.
        let mut pts = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                pts.push((i as f64 * 0.25, j as f64 * 0.25));
            }
        }
        let w = vec![1.0 / 64.0; 64];
        let mu = DiscreteMeasure::new(pts.clone(), w.clone()).unwrap();
        let nu = DiscreteMeasure::new(
            pts.iter().map(|&(x, xi)| (xi, x)).collect(),
            w,
        )
        .unwrap();
        let plan = exact_plan(&mu, &nu).unwrap();
        certify(&plan, &mu, &nu);
        // The swap (x, xi) -> (xi, x) is a permutation of the same lattice,
        // so an exact rearrangement with zero cost exists.
        assert_abs_diff_eq!(plan.cost, 0.0, epsilon = 1e-12);
    }
}
