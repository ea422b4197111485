//! Optimal transport between discrete phase-space measures.
//!
//! Solves the quadratic-cost transport problem between two small atom
//! families with the exact network solver, prints the optimal plan with its
//! certified duality gap, and checks the displacement identity: between a
//! measure and its rigid translate, the optimal cost is exactly half the
//! squared shift.
//!
//! Run with: cargo run --example transport_plans

use qclab::transport::{optimal_plan, DiscreteMeasure};

fn main() -> qclab::Result<()> {
    let source = DiscreteMeasure::new(
        vec![(-0.8, 0.2), (0.1, -0.4), (0.9, 0.5)],
        vec![0.3, 0.45, 0.25],
    )?;
    let target = DiscreteMeasure::new(
        vec![(-0.5, 0.0), (0.4, -0.1), (1.2, 0.3), (0.0, 0.8)],
        vec![0.25, 0.3, 0.25, 0.2],
    )?;

    let plan = optimal_plan(&source, &target)?;
    println!("solver route: {:?}", plan.method);
    println!("plan ({} nonzero entries):", plan.entries.len());
    for &(i, j, w) in &plan.entries {
        let (sx, sxi) = source.points[i as usize];
        let (tx, txi) = target.points[j as usize];
        println!(
            "  ({sx:+.2}, {sxi:+.2}) -> ({tx:+.2}, {txi:+.2})   mass {w:.4}"
        );
    }
    println!("half-quadratic cost  = {:.8}", plan.cost);
    println!("squared W2 (display) = {:.8}", plan.w2_squared_standard());
    println!("duality gap          = {:.3e}", plan.dual_gap);

    // Rigid displacement: shift every atom by (dx, dxi).
    let (dx, dxi) = (0.35, -0.15);
    let shifted = DiscreteMeasure::new(
        source.points.iter().map(|&(x, xi)| (x + dx, xi + dxi)).collect(),
        source.weights.clone(),
    )?;
    let rigid = optimal_plan(&source, &shifted)?;
    let expect = 0.5 * (dx * dx + dxi * dxi);
    println!("rigid translate:     cost {:.8}  vs  |shift|^2/2 = {expect:.8}", rigid.cost);
    Ok(())
}
