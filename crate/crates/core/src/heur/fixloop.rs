//! Instruction-guided rounding with propagation after every fixing.

use std::time::Instant;

use crate::lp::{LpSolver, PrimalSimplex};
use crate::model::{BoundsBox, MipInstance, Tolerances};
use crate::propagate::{propagate, propagate_from};

use super::{final_lp, HeurError, HeuristicReport, HeuristicStatus, InstructionVector};

/// Runs the fix loop with the built-in simplex for the final LP.
pub fn fix_loop(
    inst: &MipInstance,
    start: &BoundsBox,
    phi: &InstructionVector,
    z_ref: &[f64],
    order: &[usize],
    prop_rounds: usize,
) -> Result<HeuristicReport, HeurError> {
    fix_loop_with(&PrimalSimplex::default(), inst, start, phi, z_ref, order, prop_rounds)
}

/// Walks the integers in `order` and rounds `z_ref` as `phi` says. `phi` and
/// `z_ref` are indexed by position in `integer_set`; `order` holds variable
/// indices. A fixing that propagation refutes is dropped.
pub fn fix_loop_with(
    solver: &dyn LpSolver,
    inst: &MipInstance,
    start: &BoundsBox,
    phi: &InstructionVector,
    z_ref: &[f64],
    order: &[usize],
    prop_rounds: usize,
) -> Result<HeuristicReport, HeurError> {
    let started = Instant::now();
    let ints = inst.integer_set();
    let nz = ints.len();
    for len in [phi.len(), z_ref.len(), order.len()] {
        if len != nz {
            return Err(HeurError::DimensionMismatch { expected: nz, got: len });
        }
    }
    if start.len() != inst.num_vars() {
        return Err(HeurError::DimensionMismatch {
            expected: inst.num_vars(),
            got: start.len(),
        });
    }
    let mut pos = vec![usize::MAX; inst.num_vars()];
    for (p, &j) in ints.iter().enumerate() {
        pos[j] = p;
    }
    let mut seen = vec![false; nz];
    for &j in order {
        let p = pos.get(j).copied().unwrap_or(usize::MAX);
        if p == usize::MAX || std::mem::replace(&mut seen[p], true) {
            return Err(HeurError::Precondition(format!("order is not a permutation of the integers (at {j})")));
        }
    }

    let int_tol = Tolerances::default().int_feas;
    let mut report = HeuristicReport::new("fixloop");
    let rounds = prop_rounds.max(1);

    let t = Instant::now();
    let root = propagate(inst, start, start, rounds)?;
    report.phase_times.propagation += t.elapsed().as_secs_f64();
    if !root.is_feasible() {
        report.status = HeuristicStatus::Infeasible;
        report.message = Some("start box is infeasible under propagation".into());
        report.finish(started);
        return Ok(report);
    }
    let mut bounds = root.bounds;

    for &j in order {
        if bounds.is_fixed(j) {
            continue;
        }
        let z = z_ref[pos[j]];
        let target = match phi.directives()[pos[j]] {
            0 => continue,
            d if d > 0 => (z - int_tol).ceil(),
            _ => (z + int_tol).floor(),
        };
        if target < bounds.lower[j] || target > bounds.upper[j] {
            report.infeasible_nodes += 1;
            continue;
        }
        let mut trial = bounds.clone();
        trial.fix(j, target);
        let t = Instant::now();
        let res = propagate_from(inst, &trial, &[j], rounds)?;
        report.phase_times.propagation += t.elapsed().as_secs_f64();
        if res.is_feasible() {
            bounds = res.bounds;
            report.fixings += 1;
        } else {
            report.infeasible_nodes += 1;
        }
    }

    if bounds.all_fixed(ints) {
        final_lp(inst, &bounds, solver, &mut report)?;
    } else {
        let open = ints.iter().filter(|&&j| !bounds.is_fixed(j)).count();
        report.message = Some(format!("{open} integer variables left unfixed"));
    }
    report.finish(started);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InstanceBuilder, RowSense};

    fn pair() -> MipInstance {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", -1.0, 0.0, 1.0, true);
        let y = b.add_var("y", -1.0, 0.0, 1.0, true);
        b.add_row("c", vec![(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        b.build().unwrap()
    }

    #[test]
    fn second_directive_skipped_after_propagation() {
        let inst = pair();
        let phi = InstructionVector::new(vec![1, 1]).unwrap();
        let rep = fix_loop(&inst, &inst.root_box(), &phi, &[0.6, 0.6], &[0, 1], 5).unwrap();
        assert!(rep.succeeded());
        assert_eq!(rep.solution.unwrap().values, vec![1.0, 0.0]);
        assert_eq!(rep.fixings, 1);
        assert_eq!(rep.infeasible_nodes, 0);
    }

    #[test]
    fn passive_fixing_by_propagation() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 1.0, 0.0, 1.0, true);
        let y = b.add_var("y", 1.0, 0.0, 1.0, true);
        b.add_row("c", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 2.0);
        let inst = b.build().unwrap();
        let rep = fix_loop(&inst, &inst.root_box(), &InstructionVector::zeros(2), &[0.5, 0.5], &[0, 1], 1).unwrap();
        assert!(rep.succeeded());
        assert_eq!(rep.fixings, 0);
        assert_eq!(rep.objective(), Some(2.0));
    }

    #[test]
    fn refuted_fixing_is_dropped() {
        // x + y >= 1, x + z >= 1, y + z <= 1: x = 0 forces y = z = 1
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 0.0, 0.0, 1.0, true);
        let y = b.add_var("y", 0.0, 0.0, 1.0, true);
        let z = b.add_var("z", 0.0, 0.0, 1.0, true);
        b.add_row("a", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 1.0);
        b.add_row("b", vec![(x, 1.0), (z, 1.0)], RowSense::Ge, 1.0);
        b.add_row("c", vec![(y, 1.0), (z, 1.0)], RowSense::Le, 1.0);
        let inst = b.build().unwrap();
        let phi = InstructionVector::new(vec![-1, -1, 1]).unwrap();
        let rep = fix_loop(&inst, &inst.root_box(), &phi, &[0.5, 0.5, 0.5], &[0, 1, 2], 5).unwrap();
        assert_eq!(rep.infeasible_nodes, 1);
        assert!(rep.succeeded());
        assert_eq!(rep.solution.unwrap().values, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn leaves_unfixed_means_no_solution() {
        let inst = pair();
        let rep = fix_loop(&inst, &inst.root_box(), &InstructionVector::zeros(2), &[0.5, 0.5], &[1, 0], 5).unwrap();
        assert_eq!(rep.status, HeuristicStatus::NoSolution);
    }

    #[test]
    fn rejects_bad_order() {
        let inst = pair();
        let phi = InstructionVector::zeros(2);
        assert!(fix_loop(&inst, &inst.root_box(), &phi, &[0.5, 0.5], &[0, 0], 5).is_err());
        assert!(fix_loop(&inst, &inst.root_box(), &phi, &[0.5], &[0, 1], 5).is_err());
    }
}
