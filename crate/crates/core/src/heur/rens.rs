//! Relaxation enforced neighborhood search.

use std::time::Instant;

use crate::bnb::{solve_mip_with, MipOptions, MipStatus};
use crate::lp::{LpResult, LpStatus};
use crate::model::{BoundsBox, MipInstance, SolutionStatus, Tolerances};

use super::{HeurError, HeuristicReport, HeuristicStatus, SearchLimits};

/// Default relative gap for the sub-MIP.
pub const DEFAULT_SUB_MIP_GAP: f64 = 1e-4;

/// Box with every integer restricted to `[floor(z), ceil(z)]` of its LP value,
/// or fixed when the value is integral within `int_tol`.
pub fn rens_bounds(inst: &MipInstance, z_lp: &[f64], int_tol: f64) -> Result<BoundsBox, HeurError> {
    if z_lp.len() != inst.num_vars() {
        return Err(HeurError::DimensionMismatch {
            expected: inst.num_vars(),
            got: z_lp.len(),
        });
    }
    let mut b = inst.root_box();
    for &j in inst.integer_set() {
        let z = z_lp[j];
        let (lo, up) = if (z - z.round()).abs() <= int_tol {
            (z.round(), z.round())
        } else {
            (z.floor(), z.ceil())
        };
        b.lower[j] = b.lower[j].max(lo);
        b.upper[j] = b.upper[j].min(up);
    }
    Ok(b)
}

/// Solves the sub-MIP around an optimal LP point with branch-and-bound.
///
/// `limits.max_fixings` is used as the sub-MIP node limit. `gap_vs_dual` is
/// measured against the LP objective.
pub fn rens(inst: &MipInstance, lp: &LpResult, sub_mip_gap: f64, limits: &SearchLimits) -> Result<HeuristicReport, HeurError> {
    let started = Instant::now();
    let z = match (lp.status, lp.values()) {
        (LpStatus::Optimal, Some(z)) => z,
        (status, _) => {
            return Err(HeurError::Precondition(format!("RENS needs an optimal LP, got {status:?}")));
        }
    };
    let tol = Tolerances::default();
    let sub = rens_bounds(inst, z, tol.int_feas)?;
    let mut report = HeuristicReport::new("rens");
    report.fixings = inst.integer_set().iter().filter(|&&j| sub.is_fixed(j)).count();
    if sub.is_infeasible() {
        report.message = Some("LP point lies outside the integer bounds".into());
        report.finish(started);
        return Ok(report);
    }

    let opts = MipOptions {
        gap_tol: sub_mip_gap,
        node_limit: limits.max_fixings.max(1),
        time_limit: limits.time_limit,
        tolerances: tol,
    };
    let log = solve_mip_with(inst, &sub, &opts)?;
    report.phase_times.lp = started.elapsed().as_secs_f64();
    match (&log.incumbent, log.status) {
        (Some(sol), _) if sol.status == SolutionStatus::IntegerFeasible => {
            report.status = HeuristicStatus::SolutionFound;
            report.solution = Some(sol.clone());
        }
        (_, MipStatus::LimitReached) => {
            report.status = HeuristicStatus::LimitReached;
            report.message = Some(format!("sub-MIP stopped after {} nodes", log.nodes));
        }
        (_, status) => {
            report.message = Some(format!("sub-MIP: {status:?}"));
        }
    }
    report.finish(started);
    Ok(report.with_dual_bound(lp.objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use crate::model::{InstanceBuilder, RowSense};

    #[test]
    fn one_fractional_variable() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", -1.0, 0.0, 1.0, true);
        b.add_row("r", vec![(x, 2.0)], RowSense::Le, 1.0);
        let inst = b.build().unwrap();
        let lp = solve_lp(&inst, &inst.root_box(), 100).unwrap();
        let sub = rens_bounds(&inst, lp.values().unwrap(), 1e-5).unwrap();
        assert_eq!((sub.lower[0], sub.upper[0]), (0.0, 1.0));
        let rep = rens(&inst, &lp, DEFAULT_SUB_MIP_GAP, &SearchLimits::for_instance(&inst)).unwrap();
        assert!(rep.succeeded());
        assert_eq!(rep.solution.unwrap().values, vec![0.0]);
        assert!(rep.gap_vs_dual.unwrap() > 0.0);
    }

    #[test]
    fn integral_lp_collapses_neighborhood() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", -1.0, 0.0, 3.0, true);
        let y = b.add_var("y", 1.0, 0.0, 10.0, false);
        b.add_row("r", vec![(x, 1.0), (y, -1.0)], RowSense::Le, 2.0);
        let inst = b.build().unwrap();
        let lp = solve_lp(&inst, &inst.root_box(), 100).unwrap();
        let sub = rens_bounds(&inst, lp.values().unwrap(), 1e-5).unwrap();
        assert!(sub.is_fixed(x));
        let fixed = solve_lp(&inst, &sub, 100).unwrap();
        let rep = rens(&inst, &lp, 0.0, &SearchLimits::for_instance(&inst)).unwrap();
        assert_eq!(rep.fixings, 1);
        assert!((rep.objective().unwrap() - fixed.objective).abs() < 1e-9);
    }

    #[test]
    fn needs_optimal_lp() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 1.0, 0.0, 1.0, true);
        b.add_row("r", vec![(x, 1.0)], RowSense::Ge, 2.0);
        let inst = b.build().unwrap();
        let lp = solve_lp(&inst, &inst.root_box(), 100).unwrap();
        assert!(matches!(
            rens(&inst, &lp, 0.0, &SearchLimits::for_instance(&inst)),
            Err(HeurError::Precondition(_))
        ));
    }
}
