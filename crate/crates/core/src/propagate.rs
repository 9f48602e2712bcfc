//! Activity-based bound propagation over `<=` rows.
//!
//! For row `i` with minimal activity `act = sum_{a>0} a*l + sum_{a<0} a*u`, every
//! variable `k` in the row receives
//!
//! ```text
//! a_ik > 0:  u_k <- min(u_k, l_k + (b_i - act) / a_ik)
//! a_ik < 0:  l_k <- max(l_k, u_k + (b_i - act) / a_ik)
//! ```
//!
//! with integer bounds rounded inward. Changed variables re-enter a FIFO queue
//! until it drains or the round limit is reached.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BoundsBox, MipInstance};

/// Relative size below which a bound change is ignored.
const MIN_CHANGE: f64 = 1e-9;
/// Slack used before rounding implied integer bounds.
const INT_ROUND_EPS: f64 = 1e-6;
/// Tolerance for the empty-domain and infeasible-row tests.
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PropagateError {
    #[error("dimension mismatch: instance has {expected} variables, bounds have {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NaN bound for variable {0}")]
    NotANumber(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropagationStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub status: PropagationStatus,
    pub bounds: BoundsBox,
    pub num_tightenings: usize,
    pub rounds_used: usize,
}

impl PropagationResult {
    pub fn is_feasible(&self) -> bool {
        self.status == PropagationStatus::Feasible
    }
}

/// Minimal activity of a row split into its finite part and the number of
/// infinite contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowActivity {
    pub min_activity: f64,
    pub num_infinite_contrib: usize,
}

impl RowActivity {
    /// Minimal activity as a single value, `-inf` when some term is unbounded.
    pub fn value(&self) -> f64 {
        if self.num_infinite_contrib > 0 {
            f64::NEG_INFINITY
        } else {
            self.min_activity
        }
    }
}

/// Lower bound contribution of `a * x` over `[lo, up]`.
#[inline]
fn min_term(a: f64, lo: f64, up: f64) -> f64 {
    if a > 0.0 {
        a * lo
    } else {
        a * up
    }
}

pub fn row_min_activity(inst: &MipInstance, i: usize, bounds: &BoundsBox) -> RowActivity {
    let (idx, val) = inst.row(i);
    let mut act = 0.0;
    let mut ninf = 0;
    for (&j, &a) in idx.iter().zip(val) {
        let t = min_term(a, bounds.lower[j], bounds.upper[j]);
        if t.is_finite() {
            act += t;
        } else {
            ninf += 1;
        }
    }
    RowActivity {
        min_activity: act,
        num_infinite_contrib: ninf,
    }
}

fn check_box(inst: &MipInstance, b: &BoundsBox) -> Result<(), PropagateError> {
    let n = inst.num_vars();
    if b.lower.len() != n || b.upper.len() != n {
        return Err(PropagateError::DimensionMismatch {
            expected: n,
            got: b.lower.len().min(b.upper.len()),
        });
    }
    if let Some(j) = (0..n).find(|&j| b.lower[j].is_nan() || b.upper[j].is_nan()) {
        return Err(PropagateError::NotANumber(j));
    }
    Ok(())
}

fn significant(old: f64, new: f64) -> bool {
    if !old.is_finite() {
        return new.is_finite();
    }
    (old - new).abs() > MIN_CHANGE * old.abs().max(1.0)
}

/// Tightens `tightened` using all rows touching variables whose bounds differ
/// from `current`. When nothing differs every variable is seeded, which yields
/// a full propagation of `tightened`.
///
/// `max_rounds` caps the number of full queue drains; pass `usize::MAX` to run
/// to a fixpoint.
pub fn propagate(
    inst: &MipInstance,
    current: &BoundsBox,
    tightened: &BoundsBox,
    max_rounds: usize,
) -> Result<PropagationResult, PropagateError> {
    check_box(inst, current)?;
    check_box(inst, tightened)?;
    let mut seeds: Vec<usize> = (0..inst.num_vars())
        .filter(|&j| current.lower[j] != tightened.lower[j] || current.upper[j] != tightened.upper[j])
        .collect();
    if seeds.is_empty() {
        seeds = (0..inst.num_vars()).collect();
    }
    propagate_from(inst, tightened, &seeds, max_rounds)
}

/// Propagates `bounds` starting from an explicit queue of changed variables.
pub fn propagate_from(
    inst: &MipInstance,
    bounds: &BoundsBox,
    seeds: &[usize],
    max_rounds: usize,
) -> Result<PropagationResult, PropagateError> {
    check_box(inst, bounds)?;
    let n = inst.num_vars();
    let mut bounds = bounds.clone();
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(seeds.len());
    for &j in seeds {
        if j >= n {
            return Err(PropagateError::DimensionMismatch { expected: n, got: j + 1 });
        }
        if !queued[j] {
            queued[j] = true;
            queue.push_back(j);
        }
    }

    let infeasible = |bounds: BoundsBox, num_tightenings, rounds_used| PropagationResult {
        status: PropagationStatus::Infeasible,
        bounds,
        num_tightenings,
        rounds_used,
    };

    if (0..n).any(|j| bounds.lower[j] > bounds.upper[j]) {
        return Ok(infeasible(bounds, 0, 0));
    }

    let mut num_tightenings = 0;
    let mut rounds_used = 0;
    // rows already propagated since their last bound change
    let mut row_stamp = vec![usize::MAX; inst.num_rows()];
    let mut pops = 0usize;
    let mut var_stamp = vec![0usize; n];

    while !queue.is_empty() && rounds_used < max_rounds {
        rounds_used += 1;
        let this_round = queue.len();
        for _ in 0..this_round {
            let j = queue.pop_front().expect("queue length checked");
            queued[j] = false;
            pops += 1;
            let (rows, _) = inst.column(j);
            for &i in rows {
                // skip rows whose variables have not moved since the row was last processed
                if row_stamp[i] != usize::MAX {
                    let (idx, _) = inst.row(i);
                    if idx.iter().all(|&k| var_stamp[k] <= row_stamp[i]) {
                        continue;
                    }
                }
                row_stamp[i] = pops;
                let act = row_min_activity(inst, i, &bounds);
                let b = inst.rhs()[i];
                if act.num_infinite_contrib == 0
                    && act.min_activity > b + FEAS_EPS * b.abs().max(act.min_activity.abs()).max(1.0)
                {
                    return Ok(infeasible(bounds, num_tightenings, rounds_used));
                }
                if act.num_infinite_contrib >= 2 {
                    continue;
                }
                let slack = b - act.min_activity;
                let (idx, val) = inst.row(i);
                for (&k, &a) in idx.iter().zip(val) {
                    let (lo, up) = (bounds.lower[k], bounds.upper[k]);
                    let own = min_term(a, lo, up);
                    if act.num_infinite_contrib == 1 && own.is_finite() {
                        continue;
                    }
                    let changed = if a > 0.0 {
                        let mut cand = if own.is_finite() {
                            lo + slack / a
                        } else {
                            slack / a
                        };
                        if inst.is_integer(k) {
                            cand = (cand + INT_ROUND_EPS).floor() + 0.0;
                        }
                        if cand < up && significant(up, cand) {
                            bounds.upper[k] = cand;
                            true
                        } else {
                            false
                        }
                    } else {
                        let mut cand = if own.is_finite() {
                            up + slack / a
                        } else {
                            slack / a
                        };
                        if inst.is_integer(k) {
                            cand = (cand - INT_ROUND_EPS).ceil() + 0.0;
                        }
                        if cand > lo && significant(lo, cand) {
                            bounds.lower[k] = cand;
                            true
                        } else {
                            false
                        }
                    };
                    if !changed {
                        continue;
                    }
                    num_tightenings += 1;
                    let (lo, up) = (bounds.lower[k], bounds.upper[k]);
                    if lo > up {
                        let scale = lo.abs().max(up.abs()).max(1.0);
                        if inst.is_integer(k) || lo - up > FEAS_EPS * scale {
                            return Ok(infeasible(bounds, num_tightenings, rounds_used));
                        }
                        // numerical crossing of a continuous domain
                        let mid = 0.5 * (lo + up);
                        bounds.lower[k] = mid;
                        bounds.upper[k] = mid;
                    }
                    var_stamp[k] = pops + 1;
                    if !queued[k] {
                        queued[k] = true;
                        queue.push_back(k);
                    }
                }
                // a row pass only moves bounds that do not enter act_-, so the
                // cached activity is the recomputed one
            }
        }
    }

    Ok(PropagationResult {
        status: PropagationStatus::Feasible,
        bounds,
        num_tightenings,
        rounds_used,
    })
}
