//! Fix-and-Propagate: depth-first search over integer fixings without LP
//! solves, followed by one LP over the fixed integers.

use std::time::Instant;

use crate::lp::{LpSolver, PrimalSimplex};
use crate::model::{BoundsBox, MipInstance};
use crate::propagate::{propagate_from, PropagationResult, PropagationStatus};

use super::{
    final_lp, Direction, FixingStrategy, HeurError, HeuristicReport, HeuristicStatus, SearchLimits, SelectionStrategy,
};

struct Node {
    bounds: BoundsBox,
    /// Variable fixed when the node was created; `None` for the root.
    fixed: Option<usize>,
    /// Opposite-direction child, popped only after its sibling failed.
    second: bool,
}

pub fn fp_search(
    inst: &MipInstance,
    select: &SelectionStrategy,
    fix: &FixingStrategy,
    limits: &SearchLimits,
    prop_rounds: usize,
) -> Result<HeuristicReport, HeurError> {
    fp_search_with(&PrimalSimplex::default(), inst, select, fix, limits, prop_rounds)
}

/// Searches from the root box of `inst`. Randomness comes only from the seed
/// carried by `fix`, so equal inputs give equal reports.
pub fn fp_search_with(
    solver: &dyn LpSolver,
    inst: &MipInstance,
    select: &SelectionStrategy,
    fix: &FixingStrategy,
    limits: &SearchLimits,
    prop_rounds: usize,
) -> Result<HeuristicReport, HeurError> {
    let started = Instant::now();
    let ints = inst.integer_set();
    if select.order.len() != ints.len() {
        return Err(HeurError::DimensionMismatch {
            expected: ints.len(),
            got: select.order.len(),
        });
    }
    if let Some(&j) = select.order.iter().find(|&&j| !inst.is_integer(j)) {
        return Err(HeurError::Precondition(format!("selection order holds non-integer variable {j}")));
    }
    let rounds = prop_rounds.max(1);
    let all: Vec<usize> = (0..inst.num_vars()).collect();
    let mut report = HeuristicReport::new("fp");
    let mut stack = vec![Node {
        bounds: inst.root_box(),
        fixed: None,
        second: false,
    }];

    while let Some(node) = stack.pop() {
        if started.elapsed() > limits.time_limit {
            report.status = HeuristicStatus::LimitReached;
            report.message = Some("time limit".into());
            break;
        }
        if node.second {
            report.backtracks += 1;
        }
        let seeds = match &node.fixed {
            Some(j) => std::slice::from_ref(j),
            None => &all[..],
        };
        let t = Instant::now();
        let PropagationResult { status, bounds, .. } = propagate_from(inst, &node.bounds, seeds, rounds)?;
        report.phase_times.propagation += t.elapsed().as_secs_f64();
        if status == PropagationStatus::Infeasible {
            if node.fixed.is_none() {
                report.status = HeuristicStatus::Infeasible;
                report.message = Some("root propagation proves infeasibility".into());
                break;
            }
            report.infeasible_nodes += 1;
            if report.infeasible_nodes > limits.max_infeasible_nodes {
                report.status = HeuristicStatus::LimitReached;
                report.message = Some("too many infeasible nodes".into());
                break;
            }
            continue;
        }

        let Some(&j) = select.order.iter().find(|&&j| !bounds.is_fixed(j)) else {
            final_lp(inst, &bounds, solver, &mut report)?;
            break;
        };
        if report.fixings >= limits.max_fixings {
            report.status = HeuristicStatus::LimitReached;
            report.message = Some("fixing limit".into());
            break;
        }
        report.fixings += 1;

        let (lo, up) = (bounds.lower[j], bounds.upper[j]);
        let (first, other) = match fix.direction(&bounds, j) {
            Direction::Lower => (lo, up),
            Direction::Upper => (up, lo),
        };
        // an infinite bound cannot be fixed to; fall back to the finite side
        let (first, other) = match (first.is_finite(), other.is_finite()) {
            (true, true) => (first, Some(other)),
            (true, false) => (first, None),
            (false, true) => (other, None),
            (false, false) => (0.0_f64.clamp(lo, up), None),
        };
        if let Some(v) = other {
            let mut b = bounds.clone();
            b.fix(j, v);
            stack.push(Node {
                bounds: b,
                fixed: Some(j),
                second: true,
            });
        }
        let mut b = bounds;
        b.fix(j, first);
        stack.push(Node {
            bounds: b,
            fixed: Some(j),
            second: false,
        });
    }
    if stack.is_empty() && report.status == HeuristicStatus::NoSolution && report.message.is_none() {
        report.message = Some("search tree exhausted".into());
    }
    report.finish(started);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heur::{inferred_objective, make_strategies, StrategyAux, StrategyKind};
    use crate::model::{InstanceBuilder, RowSense};

    fn run(inst: &MipInstance, kind: StrategyKind, seed: u64) -> HeuristicReport {
        let io = inferred_objective(inst, 100);
        let aux = StrategyAux {
            inferred: Some(&io),
            seed: Some(seed),
            ..Default::default()
        };
        let (sel, fix) = make_strategies(kind, inst, aux).unwrap();
        fp_search(inst, &sel, &fix, &SearchLimits::for_instance(inst), 5).unwrap()
    }

    #[test]
    fn exactly_one_of_two() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 1.0, 0.0, 1.0, true);
        let y = b.add_var("y", 0.0, 0.0, 1.0, true);
        b.add_row("le", vec![(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        b.add_row("ge", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 1.0);
        let inst = b.build().unwrap();
        let rep = run(&inst, StrategyKind::InferredObjective, 0);
        assert!(rep.succeeded());
        assert_eq!(rep.solution.unwrap().values, vec![0.0, 1.0]);
        assert_eq!(rep.fixings, 1);
    }

    #[test]
    fn root_propagation_fixes_everything() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 1.0, 0.0, 1.0, true);
        let y = b.add_var("y", 1.0, 0.0, 1.0, true);
        b.add_row("ge", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 2.0);
        let inst = b.build().unwrap();
        let rep = run(&inst, StrategyKind::Random, 1);
        assert!(rep.succeeded());
        assert_eq!(rep.fixings, 0);
    }

    #[test]
    fn backtracks_after_bad_first_choice() {
        // x + y >= 1, x + z >= 1, y + z <= 1; x wants to go down (c_x > 0)
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 5.0, 0.0, 1.0, true);
        let y = b.add_var("y", 1.0, 0.0, 1.0, true);
        let z = b.add_var("z", 1.0, 0.0, 1.0, true);
        b.add_row("a", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 1.0);
        b.add_row("b", vec![(x, 1.0), (z, 1.0)], RowSense::Ge, 1.0);
        b.add_row("c", vec![(y, 1.0), (z, 1.0)], RowSense::Le, 1.0);
        let inst = b.build().unwrap();
        let rep = run(&inst, StrategyKind::InferredObjective, 0);
        assert!(rep.succeeded());
        assert_eq!(rep.backtracks, 1);
        assert_eq!(rep.infeasible_nodes, 1);
        assert_eq!(rep.solution.unwrap().values, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn infeasible_root() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 1.0, 0.0, 1.0, true);
        b.add_row("ge", vec![(x, 1.0)], RowSense::Ge, 2.0);
        let inst = b.build().unwrap();
        assert_eq!(run(&inst, StrategyKind::Random, 0).status, HeuristicStatus::Infeasible);
    }

    #[test]
    fn same_seed_same_report() {
        let mut b = InstanceBuilder::new();
        let v: Vec<usize> = (0..8).map(|k| b.add_var(format!("x{k}"), 0.0, 0.0, 1.0, true)).collect();
        for w in v.windows(3) {
            b.add_row("r", w.iter().map(|&j| (j, 1.0)).collect(), RowSense::Le, 1.0);
        }
        b.add_row("cover", v.iter().map(|&j| (j, 1.0)).collect(), RowSense::Ge, 3.0);
        let inst = b.build().unwrap();
        let strip = |mut r: HeuristicReport| {
            r.elapsed = 0.0;
            r.phase_times = Default::default();
            r
        };
        for seed in 0..5 {
            let a = strip(run(&inst, StrategyKind::Random, seed));
            let b = strip(run(&inst, StrategyKind::Random, seed));
            assert_eq!(a, b);
        }
    }
}
