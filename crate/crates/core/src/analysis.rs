//! LP/MIP proximity measures and the primal-dual integral.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::BoundEvent;
use crate::model::{MipInstance, Tolerances};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("event list is empty")]
    EmptyEvents,
    #[error("events are not sorted by time")]
    Unsorted,
    #[error("no finite gap in the event list to derive a default cap from")]
    NoFiniteGap,
}

/// `|f_lp - f_mip| / |f_mip|`, zero when both vanish.
pub fn initial_gap(f_lp: f64, f_mip: f64) -> f64 {
    if f_lp == f_mip {
        return 0.0;
    }
    if f_mip == 0.0 {
        return f64::INFINITY;
    }
    (f_lp - f_mip).abs() / f_mip.abs()
}

fn check_len(a: &[f64], b: &[f64]) -> Result<(), AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// Euclidean distance divided by the dimension; zero for empty vectors.
pub fn normalized_distance(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    check_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sq.sqrt() / a.len() as f64)
}

/// Fraction of positions where `|a - b| < tol`, with `a` rounded to the
/// nearest integer first when `rounded` is set. Empty vectors give 1.
pub fn coinciding_integers(z_lp: &[f64], z_mip: &[f64], tol: f64, rounded: bool) -> Result<f64, AnalysisError> {
    check_len(z_lp, z_mip)?;
    if z_lp.is_empty() {
        return Ok(1.0);
    }
    let hits = z_lp
        .iter()
        .zip(z_mip)
        .filter(|(&a, &b)| {
            let a = if rounded { a.round() } else { a };
            (a - b).abs() < tol
        })
        .count();
    Ok(hits as f64 / z_lp.len() as f64)
}

/// Area between primal and dual bound step curves over `[t_0, horizon]`.
///
/// Each event holds until the next one. Segments where the gap is infinite
/// count as `cap`, which defaults to ten times the first finite gap.
pub fn primal_dual_integral(events: &[BoundEvent], horizon: f64, cap: Option<f64>) -> Result<f64, AnalysisError> {
    if events.is_empty() {
        return Err(AnalysisError::EmptyEvents);
    }
    if events.windows(2).any(|w| w[1].elapsed < w[0].elapsed) {
        return Err(AnalysisError::Unsorted);
    }
    let finite_gap = |e: &BoundEvent| {
        let g = e.primal - e.dual;
        g.is_finite().then_some(g)
    };
    let cap = match cap {
        Some(c) => c,
        None if events.iter().all(|e| finite_gap(e).is_some()) => 0.0,
        None => 10.0 * events.iter().find_map(finite_gap).ok_or(AnalysisError::NoFiniteGap)?.abs(),
    };
    let mut area = 0.0;
    for (k, e) in events.iter().enumerate() {
        let end = events.get(k + 1).map_or(horizon, |n| n.elapsed).min(horizon);
        let width = end - e.elapsed;
        if width <= 0.0 {
            continue;
        }
        area += width * finite_gap(e).unwrap_or(cap);
    }
    Ok(area)
}

/// `exp(mean(ln(v + shift))) - shift`.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let s: f64 = values.iter().map(|v| (v + shift).ln()).sum();
    (s / values.len() as f64).exp() - shift
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub initial_gap: f64,
    pub dist_all: f64,
    pub dist_int: f64,
    pub coincide_raw: f64,
    pub coincide_rounded: f64,
    /// Which LP engine produced `x_lp`; interior and vertex points differ.
    pub lp_solver_tag: String,
}

/// Compares an LP relaxation optimum with a MIP optimum.
pub fn analyze(
    inst: &MipInstance,
    x_lp: &[f64],
    f_lp: f64,
    x_mip: &[f64],
    f_mip: f64,
    lp_solver_tag: &str,
    tol: &Tolerances,
) -> Result<AnalysisReport, AnalysisError> {
    let n = inst.num_vars();
    for x in [x_lp, x_mip] {
        if x.len() != n {
            return Err(AnalysisError::LengthMismatch { expected: n, got: x.len() });
        }
    }
    let z_lp = inst.integer_part(x_lp);
    let z_mip = inst.integer_part(x_mip);
    Ok(AnalysisReport {
        initial_gap: initial_gap(f_lp, f_mip),
        dist_all: normalized_distance(x_mip, x_lp)?,
        dist_int: normalized_distance(&z_mip, &z_lp)?,
        coincide_raw: coinciding_integers(&z_lp, &z_mip, tol.coincide, false)?,
        coincide_rounded: coinciding_integers(&z_lp, &z_mip, tol.coincide, true)?,
        lp_solver_tag: lp_solver_tag.to_string(),
    })
}
