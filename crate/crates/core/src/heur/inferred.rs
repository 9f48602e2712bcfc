//! Inferred objective: cost scores for variables whose own objective
//! coefficient is zero, propagated through shared rows.
//!
//! Scores start at `sign(c_j)`. In each round every variable with a zero score
//! collects, over all rows `i` containing it, the scores `s_k` of its row
//! partners with `a_ij * s_k > 0`: raising `x_j` in a row where it has a
//! positive coefficient pushes partners against a positive cost, so their
//! cost is inherited (and symmetrically for negative coefficients). Rounds use
//! the previous round's scores and stop once no score leaves zero.

use serde::{Deserialize, Serialize};

use crate::model::MipInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredObjective {
    pub scores: Vec<f64>,
    pub rounds_used: usize,
    /// True when the round cap stopped the iteration before a fixpoint.
    pub capped: bool,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn inferred_objective(inst: &MipInstance, max_rounds: usize) -> InferredObjective {
    let max_rounds = max_rounds.max(1);
    let mut scores: Vec<f64> = inst.objective().iter().map(|&c| sign(c)).collect();
    let mut rounds_used = 0;
    let mut moved = true;
    while moved && rounds_used < max_rounds {
        rounds_used += 1;
        moved = false;
        let prev = scores.clone();
        for j in 0..inst.num_vars() {
            if prev[j] != 0.0 {
                continue;
            }
            let (rows, vals) = inst.column(j);
            let mut acc = 0.0;
            for (&i, &aij) in rows.iter().zip(vals) {
                let (cols, _) = inst.row(i);
                for &k in cols {
                    if k != j && aij * prev[k] > 0.0 {
                        acc += prev[k];
                    }
                }
            }
            if acc != 0.0 {
                scores[j] = acc;
                moved = true;
            }
        }
    }
    InferredObjective {
        scores,
        rounds_used,
        capped: moved,
    }
}
