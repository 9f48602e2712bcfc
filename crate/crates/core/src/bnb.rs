//! Exact LP-based branch-and-bound.
//!
//! Depth-first search with most-fractional branching and one propagation round
//! per node. Every 500 nodes the open node with the smallest bound is taken
//! instead of the stack top. The simplex state is reused while diving; nodes
//! popped out of order reload their parent's basis.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, LpError, LpStatus, VarState, WarmLp, DEFAULT_ITER_LIMIT};
use crate::model::{check_solution, BoundsBox, MipInstance, Solution, SolutionStatus, Tolerances};
use crate::propagate::{propagate_from, PropagateError};

const PLUNGE_RESTART: usize = 500;

#[derive(Debug, Error)]
pub enum MipError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error("gap tolerance must be non-negative, got {0}")]
    NegativeGap(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MipStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    LimitReached,
}

/// One point of the bound trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvent {
    pub elapsed: f64,
    /// Nodes processed when the event was recorded; a timer-free clock.
    #[serde(default)]
    pub node: usize,
    pub primal: f64,
    pub dual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipRunLog {
    pub incumbent: Option<Solution>,
    pub dual_bound: f64,
    pub status: MipStatus,
    pub events: Vec<BoundEvent>,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl MipRunLog {
    pub fn primal_bound(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective_value)
    }

    /// Relative duality gap `|primal - dual| / |primal|`.
    pub fn gap(&self) -> f64 {
        relative_gap(self.primal_bound(), self.dual_bound)
    }

    /// Writes the bound trajectory as `elapsed_s,node,primal,dual` lines.
    pub fn write_events_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "elapsed_s,node,primal,dual")?;
        for e in &self.events {
            writeln!(out, "{},{},{},{}", e.elapsed, e.node, e.primal, e.dual)?;
        }
        Ok(())
    }
}

pub fn relative_gap(primal: f64, dual: f64) -> f64 {
    if primal == dual {
        return 0.0;
    }
    if !primal.is_finite() || !dual.is_finite() {
        return f64::INFINITY;
    }
    (primal - dual).abs() / primal.abs().max(1e-10)
}

#[derive(Debug, Clone, Copy)]
pub struct MipOptions {
    pub gap_tol: f64,
    pub node_limit: usize,
    pub time_limit: Duration,
    pub tolerances: Tolerances,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            gap_tol: 0.0,
            node_limit: usize::MAX,
            time_limit: Duration::from_secs(3600),
            tolerances: Tolerances::default(),
        }
    }
}

struct Node {
    id: usize,
    parent: usize,
    bounds: BoundsBox,
    branched: Option<usize>,
    parent_bound: f64,
    basis: Option<Arc<Vec<VarState>>>,
}

/// Solves `inst` restricted to `bounds`.
pub fn solve_mip(
    inst: &MipInstance,
    bounds: &BoundsBox,
    gap_tol: f64,
    node_limit: usize,
    time_limit: Duration,
) -> Result<MipRunLog, MipError> {
    solve_mip_with(
        inst,
        bounds,
        &MipOptions {
            gap_tol,
            node_limit,
            time_limit,
            ..MipOptions::default()
        },
    )
}

pub fn solve_mip_with(inst: &MipInstance, bounds: &BoundsBox, opts: &MipOptions) -> Result<MipRunLog, MipError> {
    if opts.gap_tol < 0.0 || opts.gap_tol.is_nan() {
        return Err(MipError::NegativeGap(opts.gap_tol));
    }
    let start = Instant::now();
    let tol = opts.tolerances;
    let mut lp = WarmLp::new(inst);
    let mut log = MipRunLog {
        incumbent: None,
        dual_bound: f64::NEG_INFINITY,
        status: MipStatus::Infeasible,
        events: Vec::new(),
        nodes: 0,
        lp_iterations: 0,
    };
    let mut primal = f64::INFINITY;
    let mut stack = vec![Node {
        id: 0,
        parent: usize::MAX,
        bounds: bounds.clone(),
        branched: None,
        parent_bound: f64::NEG_INFINITY,
        basis: None,
    }];
    let mut next_id = 1;
    let mut last_solved = usize::MAX;
    let mut incomplete = false;
    let mut stopped_by = None;

    let record = |log: &mut MipRunLog, primal: f64| {
        let elapsed = start.elapsed().as_secs_f64();
        let dual = log.dual_bound;
        if log
            .events
            .last()
            .is_none_or(|e| e.primal != primal || e.dual != dual)
        {
            log.events.push(BoundEvent {
                elapsed,
                node: log.nodes,
                primal,
                dual,
            });
        }
    };

    while !stack.is_empty() {
        if log.nodes >= opts.node_limit || start.elapsed() >= opts.time_limit {
            stopped_by = Some(MipStatus::LimitReached);
            break;
        }
        let pick = if log.nodes > 0 && log.nodes.is_multiple_of(PLUNGE_RESTART) {
            (0..stack.len())
                .min_by(|&a, &b| stack[a].parent_bound.total_cmp(&stack[b].parent_bound))
                .expect("non-empty stack")
        } else {
            stack.len() - 1
        };
        let node = stack.remove(pick);
        let cutoff = if primal.is_finite() { primal - 1e-9 * primal.abs().max(1.0) } else { f64::INFINITY };
        if node.parent_bound >= cutoff {
            continue;
        }
        log.nodes += 1;

        let seeds: Vec<usize> = match node.branched {
            Some(j) => vec![j],
            None => (0..inst.num_vars()).collect(),
        };
        let prop = propagate_from(inst, &node.bounds, &seeds, 1)?;
        let node_dual = |stack: &[Node], primal: f64| stack.iter().map(|n| n.parent_bound).fold(primal, f64::min);
        if !prop.is_feasible() {
            let d = node_dual(&stack, primal);
            if d > log.dual_bound {
                log.dual_bound = d;
                record(&mut log, primal);
            }
            continue;
        }
        let basis = if node.parent == last_solved { None } else { node.basis.as_deref().map(|b| b.as_slice()) };
        let res = lp.solve(inst, &prop.bounds, basis, DEFAULT_ITER_LIMIT)?;
        last_solved = node.id;
        log.lp_iterations += res.iterations;
        match res.status {
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => {
                log.status = MipStatus::Unbounded;
                log.dual_bound = f64::NEG_INFINITY;
                return Ok(log);
            }
            LpStatus::IterationLimit => incomplete = true,
            LpStatus::Optimal => {
                let bound = res.objective;
                if node.id == 0 {
                    log.dual_bound = bound;
                    record(&mut log, primal);
                }
                if bound < cutoff {
                    let x = &res.solution.as_ref().expect("optimal has a point").values;
                    match most_fractional(inst, x, tol.int_feas) {
                        None => {
                            if let Some(sol) = integral_point(inst, &prop.bounds, x, &tol)? {
                                if sol.objective_value < primal {
                                    primal = sol.objective_value;
                                    log.incumbent = Some(sol);
                                    record(&mut log, primal);
                                }
                            }
                        }
                        Some(j) => {
                            let v = x[j];
                            let shared = Arc::new(lp.basis());
                            let mut down = prop.bounds.clone();
                            down.upper[j] = v.floor();
                            let mut up = prop.bounds;
                            up.lower[j] = v.ceil();
                            let mk = |b: BoundsBox, id| Node {
                                id,
                                parent: node.id,
                                bounds: b,
                                branched: Some(j),
                                parent_bound: bound,
                                basis: Some(Arc::clone(&shared)),
                            };
                            // the child on the rounding side is explored first
                            let (first, second) = if v - v.floor() >= 0.5 { (up, down) } else { (down, up) };
                            stack.push(mk(second, next_id));
                            stack.push(mk(first, next_id + 1));
                            next_id += 2;
                        }
                    }
                }
            }
        }
        let d = node_dual(&stack, primal);
        if d > log.dual_bound {
            log.dual_bound = d;
            record(&mut log, primal);
        }
        if primal.is_finite() && relative_gap(primal, log.dual_bound) <= opts.gap_tol {
            stopped_by = Some(if relative_gap(primal, log.dual_bound) <= 1e-9 {
                MipStatus::Optimal
            } else {
                MipStatus::Feasible
            });
            break;
        }
    }

    log.status = match stopped_by {
        Some(s) => s,
        None if incomplete => MipStatus::LimitReached,
        None if log.incumbent.is_some() => {
            log.dual_bound = log.dual_bound.max(primal);
            record(&mut log, primal);
            MipStatus::Optimal
        }
        None => MipStatus::Infeasible,
    };
    if log.status == MipStatus::Optimal {
        log.dual_bound = log.dual_bound.max(primal).min(primal);
    }
    Ok(log)
}

fn most_fractional(inst: &MipInstance, x: &[f64], int_tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_frac = int_tol;
    for &j in inst.integer_set() {
        let f = x[j] - x[j].floor();
        let d = f.min(1.0 - f);
        if d > best_frac {
            best_frac = d;
            best = Some(j);
        }
    }
    best
}

/// Snaps integers and certifies the point; falls back to re-solving the LP with
/// integers fixed when snapping breaks a row.
fn integral_point(
    inst: &MipInstance,
    bounds: &BoundsBox,
    x: &[f64],
    tol: &Tolerances,
) -> Result<Option<Solution>, MipError> {
    let mut snapped = x.to_vec();
    for &j in inst.integer_set() {
        snapped[j] = snapped[j].round();
    }
    let sol = check_solution(inst, &snapped, tol.int_feas, tol.row_feas).expect("dimensions match");
    if sol.status == SolutionStatus::IntegerFeasible {
        return Ok(Some(sol));
    }
    let mut fixed = bounds.clone();
    for &j in inst.integer_set() {
        fixed.fix(j, snapped[j]);
    }
    let res = solve_lp(inst, &fixed, DEFAULT_ITER_LIMIT)?;
    Ok(res
        .solution
        .filter(|s| s.status == SolutionStatus::IntegerFeasible))
}
