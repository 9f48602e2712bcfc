//! LP relaxations: `min c^T x  s.t.  Ax <= b,  l <= x <= u`.
//!
//! Heuristics only depend on the [`LpSolver`] trait; [`PrimalSimplex`] is the
//! built-in engine.

mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{check_solution, BoundsBox, MipInstance, Solution, Tolerances};

pub(crate) use simplex::{Outcome, Simplex, VarState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: instance has {expected} variables, box has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inconsistent box: lower > upper for variable {0}")]
    InconsistentBox(usize),
    #[error("basis is singular beyond repair")]
    SingularBasis,
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    /// Present when `status == Optimal`.
    pub solution: Option<Solution>,
    pub objective: f64,
    pub iterations: usize,
    /// Name of the engine that produced the result.
    pub solver: String,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.solution.as_ref().map(|s| s.values.as_slice())
    }
}

/// Anything that maps `(instance, box)` to an [`LpResult`].
pub trait LpSolver: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, inst: &MipInstance, bounds: &BoundsBox, iter_limit: usize) -> Result<LpResult, LpError>;
}

/// Default iteration cap used when callers have no preference.
pub const DEFAULT_ITER_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct PrimalSimplex {
    pub tolerances: Tolerances,
}

impl LpSolver for PrimalSimplex {
    fn name(&self) -> &str {
        "primal-simplex"
    }

    fn solve(&self, inst: &MipInstance, bounds: &BoundsBox, iter_limit: usize) -> Result<LpResult, LpError> {
        validate_box(inst, bounds)?;
        let mut spx = Simplex::new(inst);
        spx.set_bounds(bounds);
        let outcome = spx.solve(iter_limit)?;
        Ok(finish(inst, &spx, outcome, self.name(), &self.tolerances))
    }
}

/// Solves the relaxation over `bounds` with the built-in simplex.
pub fn solve_lp(inst: &MipInstance, bounds: &BoundsBox, iter_limit: usize) -> Result<LpResult, LpError> {
    PrimalSimplex::default().solve(inst, bounds, iter_limit)
}

pub(crate) fn validate_box(inst: &MipInstance, bounds: &BoundsBox) -> Result<(), LpError> {
    let n = inst.num_vars();
    if bounds.lower.len() != n || bounds.upper.len() != n {
        return Err(LpError::DimensionMismatch {
            expected: n,
            got: bounds.lower.len(),
        });
    }
    if let Some(j) = (0..n).find(|&j| bounds.lower[j].partial_cmp(&bounds.upper[j]).is_none_or(|o| o.is_gt())) {
        return Err(LpError::InconsistentBox(j));
    }
    Ok(())
}

pub(crate) fn finish(inst: &MipInstance, spx: &Simplex<'_>, outcome: Outcome, name: &str, tol: &Tolerances) -> LpResult {
    let status = match outcome {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Infeasible => LpStatus::Infeasible,
        Outcome::Unbounded => LpStatus::Unbounded,
        Outcome::IterationLimit => LpStatus::IterationLimit,
    };
    let (solution, objective) = if status == LpStatus::Optimal {
        let x = spx.structural_values();
        let sol = check_solution(inst, &x, tol.int_feas, tol.row_feas).expect("dimensions validated");
        let obj = sol.objective_value;
        (Some(sol), obj)
    } else if status == LpStatus::Unbounded {
        (None, f64::NEG_INFINITY)
    } else {
        (None, f64::NAN)
    };
    LpResult {
        status,
        solution,
        objective,
        iterations: spx.iterations,
        solver: name.to_string(),
    }
}

/// Reusable simplex state for sequences of related solves (branch-and-bound
/// dives). Only bounds change between solves.
pub(crate) struct WarmLp<'a> {
    spx: Simplex<'a>,
    tol: Tolerances,
}

impl<'a> WarmLp<'a> {
    pub(crate) fn new(inst: &'a MipInstance) -> Self {
        Self {
            spx: Simplex::new(inst),
            tol: Tolerances::default(),
        }
    }

    pub(crate) fn solve(
        &mut self,
        inst: &MipInstance,
        bounds: &BoundsBox,
        basis: Option<&[VarState]>,
        iter_limit: usize,
    ) -> Result<LpResult, LpError> {
        validate_box(inst, bounds)?;
        if let Some(states) = basis {
            self.spx.load_states(states)?;
        }
        self.spx.set_bounds(bounds);
        let start = self.spx.iterations;
        let outcome = self.spx.solve(start.saturating_add(iter_limit))?;
        let mut res = finish(inst, &self.spx, outcome, "primal-simplex", &self.tol);
        res.iterations -= start;
        Ok(res)
    }

    pub(crate) fn basis(&self) -> Vec<VarState> {
        self.spx.states()
    }
}
