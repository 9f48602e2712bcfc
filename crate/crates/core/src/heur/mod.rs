//! Primal heuristics and their shared report types.

mod fixloop;
mod fp;
mod inferred;
mod instructions;
mod rens;
mod strategy;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{relative_gap, MipError};
use crate::lp::{LpError, LpSolver, LpStatus, DEFAULT_ITER_LIMIT};
use crate::model::{check_solution, BoundsBox, MipInstance, Solution, SolutionStatus, Tolerances};
use crate::propagate::PropagateError;

pub use fixloop::{fix_loop, fix_loop_with};
pub use fp::{fp_search, fp_search_with};
pub use inferred::{inferred_objective, InferredObjective};
pub use instructions::InstructionVector;
pub use rens::{rens, rens_bounds, DEFAULT_SUB_MIP_GAP};
pub use strategy::{
    make_strategies, order_by_reliability, Direction, FixingStrategy, SelectionStrategy, StrategyAux, StrategyKind,
};

#[derive(Debug, Error)]
pub enum HeurError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("strategy {0:?} needs {1}")]
    MissingAux(StrategyKind, &'static str),
    #[error("invalid instruction vector: {0}")]
    Instructions(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Mip(#[from] MipError),
}

/// Budget for the search-based heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_fixings: usize,
    pub max_infeasible_nodes: usize,
    #[serde(with = "secs")]
    pub time_limit: Duration,
}

impl SearchLimits {
    /// `10 * n_z` fixings, `n_z` infeasible nodes, one minute.
    pub fn for_instance(inst: &MipInstance) -> Self {
        let nz = inst.num_integers().max(1);
        Self {
            max_fixings: 10 * nz,
            max_infeasible_nodes: nz,
            time_limit: Duration::from_secs(60),
        }
    }
}

/// Default number of propagation rounds after each fixing.
pub const DEFAULT_PROP_ROUNDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicStatus {
    SolutionFound,
    NoSolution,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub propagation: f64,
    pub lp: f64,
    pub other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicReport {
    pub heuristic: String,
    pub status: HeuristicStatus,
    pub solution: Option<Solution>,
    pub gap_vs_dual: Option<f64>,
    pub fixings: usize,
    pub infeasible_nodes: usize,
    pub backtracks: usize,
    /// Wall time in seconds.
    pub elapsed: f64,
    pub phase_times: PhaseTimes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl HeuristicReport {
    fn new(heuristic: &str) -> Self {
        Self {
            heuristic: heuristic.to_string(),
            status: HeuristicStatus::NoSolution,
            solution: None,
            gap_vs_dual: None,
            fixings: 0,
            infeasible_nodes: 0,
            backtracks: 0,
            elapsed: 0.0,
            phase_times: PhaseTimes::default(),
            message: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status == HeuristicStatus::SolutionFound
    }

    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.objective_value)
    }

    /// Fills `gap_vs_dual` against a known dual (lower) bound.
    pub fn with_dual_bound(mut self, dual: f64) -> Self {
        self.gap_vs_dual = self.objective().map(|p| relative_gap(p, dual));
        self
    }

    fn finish(&mut self, started: Instant) {
        self.elapsed = started.elapsed().as_secs_f64();
        let t = &mut self.phase_times;
        t.other = (self.elapsed - t.propagation - t.lp).max(0.0);
    }
}

pub(crate) mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Solves the LP left after all integers are fixed in `bounds` and certifies
/// the point on the instance.
fn final_lp(
    inst: &MipInstance,
    bounds: &BoundsBox,
    solver: &dyn LpSolver,
    report: &mut HeuristicReport,
) -> Result<(), HeurError> {
    let t = Instant::now();
    let mut fixed = bounds.clone();
    for &j in inst.integer_set() {
        let v = fixed.lower[j].round();
        fixed.fix(j, v);
    }
    let res = solver.solve(inst, &fixed, DEFAULT_ITER_LIMIT)?;
    report.phase_times.lp += t.elapsed().as_secs_f64();
    match (res.status, res.solution) {
        (LpStatus::Optimal, Some(sol)) => {
            let tol = Tolerances::default();
            let checked = check_solution(inst, &sol.values, tol.int_feas, tol.row_feas).expect("dimensions match");
            if checked.status == SolutionStatus::IntegerFeasible {
                report.status = HeuristicStatus::SolutionFound;
                report.solution = Some(checked);
            } else {
                report.status = HeuristicStatus::NoSolution;
                report.message = Some(format!("final point failed certification ({})", checked.status));
            }
        }
        (status, _) => {
            report.status = HeuristicStatus::NoSolution;
            report.message = Some(format!("final LP over fixed integers: {status:?}"));
        }
    }
    Ok(())
}
