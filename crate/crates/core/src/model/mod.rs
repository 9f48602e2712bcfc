//! MIP data model: `min c^T x  s.t.  Ax <= b,  l <= x <= u,  x_j integer for j in I`.
//!
//! Every constraint is stored in `<=` form. `>=` rows are negated and equality
//! or ranged rows are split into two `<=` rows when an instance is built.

mod json;
mod mps;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::{read_json, write_json};
pub use mps::{parse_mps, write_mps};

/// Reads an instance from disk: `.mps` files as MPS, anything else as
/// native JSON.
pub fn read_instance_file(path: &std::path::Path) -> Result<MipInstance, ModelError> {
    let bytes = std::fs::read(path)?;
    let is_mps = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("mps"));
    if is_mps {
        parse_mps(&bytes)
    } else {
        read_json(bytes.as_slice())
    }
}

/// Magnitude at or beyond which a bound is treated as infinite.
pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("row {row}: duplicate entry for column {col}")]
    DuplicateEntry { row: String, col: String },
    #[error("NaN encountered in {0}")]
    NotANumber(String),
    #[error("variable {var} has empty domain [{lower}, {upper}]")]
    EmptyDomain { var: String, lower: f64, upper: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Feasibility tolerances shared by checks, heuristics and analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub int_feas: f64,
    pub row_feas: f64,
    pub coincide: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            int_feas: 1e-5,
            row_feas: 1e-6,
            coincide: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

/// Normalized mixed-integer program. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    name: Option<String>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    // row-major
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    // column-major
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    integer_set: Vec<usize>,
    is_int: Vec<bool>,
    var_names: Option<Vec<String>>,
    row_names: Option<Vec<String>>,
}

impl MipInstance {
    /// Builds an instance directly from `<=` rows given as `(indices, values, rhs)`.
    ///
    /// Integer bounds are rounded inward; an empty domain is an error.
    #[allow(clippy::too_many_arguments)]
    pub fn from_le_rows(
        name: Option<String>,
        objective: Vec<f64>,
        rows: Vec<(Vec<usize>, Vec<f64>, f64)>,
        mut lower: Vec<f64>,
        mut upper: Vec<f64>,
        integers: Vec<usize>,
        var_names: Option<Vec<String>>,
        row_names: Option<Vec<String>>,
    ) -> Result<Self, ModelError> {
        let n = objective.len();
        for v in [&lower, &upper] {
            if v.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        if let Some(names) = &var_names {
            if names.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: names.len() });
            }
        }
        if let Some(names) = &row_names {
            if names.len() != rows.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: rows.len(),
                    got: names.len(),
                });
            }
        }
        if objective.iter().any(|c| c.is_nan()) {
            return Err(ModelError::NotANumber("objective".into()));
        }
        if lower.iter().chain(upper.iter()).any(|b| b.is_nan()) {
            return Err(ModelError::NotANumber("bounds".into()));
        }

        let mut is_int = vec![false; n];
        for &j in &integers {
            if j >= n {
                return Err(ModelError::IndexOutOfRange { index: j, limit: n });
            }
            is_int[j] = true;
        }
        let integer_set: Vec<usize> = (0..n).filter(|&j| is_int[j]).collect();
        for &j in &integer_set {
            if lower[j].is_finite() {
                lower[j] = (lower[j] - 1e-9).ceil() + 0.0;
            }
            if upper[j].is_finite() {
                upper[j] = (upper[j] + 1e-9).floor() + 0.0;
            }
        }
        for j in 0..n {
            if lower[j] > upper[j] {
                let var = var_names.as_ref().map_or_else(|| format!("x{j}"), |v| v[j].clone());
                return Err(ModelError::EmptyDomain { var, lower: lower[j], upper: upper[j] });
            }
        }

        let m = rows.len();
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_col = Vec::new();
        let mut row_val = Vec::new();
        let mut rhs = Vec::with_capacity(m);
        let mut seen = vec![usize::MAX; n];
        row_start.push(0);
        for (i, (idx, val, b)) in rows.into_iter().enumerate() {
            if idx.len() != val.len() {
                return Err(ModelError::DimensionMismatch { expected: idx.len(), got: val.len() });
            }
            if b.is_nan() {
                return Err(ModelError::NotANumber(format!("rhs of row {i}")));
            }
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(idx.len());
            for (j, a) in idx.into_iter().zip(val) {
                if j >= n {
                    return Err(ModelError::IndexOutOfRange { index: j, limit: n });
                }
                if a.is_nan() {
                    return Err(ModelError::NotANumber(format!("coefficient ({i}, {j})")));
                }
                if seen[j] == i {
                    return Err(ModelError::DuplicateEntry {
                        row: row_names.as_ref().map_or_else(|| format!("r{i}"), |r| r[i].clone()),
                        col: var_names.as_ref().map_or_else(|| format!("x{j}"), |v| v[j].clone()),
                    });
                }
                seen[j] = i;
                if a != 0.0 {
                    entries.push((j, a));
                }
            }
            entries.sort_by_key(|e| e.0);
            for (j, a) in entries {
                row_col.push(j);
                row_val.push(a);
            }
            row_start.push(row_col.len());
            rhs.push(b);
        }

        let mut counts = vec![0usize; n + 1];
        for &j in &row_col {
            counts[j + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let mut col_row = vec![0; row_col.len()];
        let mut col_val = vec![0.0; row_col.len()];
        for i in 0..m {
            for k in row_start[i]..row_start[i + 1] {
                let j = row_col[k];
                col_row[fill[j]] = i;
                col_val[fill[j]] = row_val[k];
                fill[j] += 1;
            }
        }

        Ok(Self {
            name,
            objective,
            lower,
            upper,
            rhs,
            row_start,
            row_col,
            row_val,
            col_start,
            col_row,
            col_val,
            integer_set,
            is_int,
            var_names,
            row_names,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.row_val.len()
    }

    pub fn num_integers(&self) -> usize {
        self.integer_set.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Sorted indices of the integer variables.
    pub fn integer_set(&self) -> &[usize] {
        &self.integer_set
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.is_int[j]
    }

    /// Column indices and coefficients of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_start[i]..self.row_start[i + 1];
        (&self.row_col[r.clone()], &self.row_val[r])
    }

    /// Row indices and coefficients of column `j`, sorted by row.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_start[j]..self.col_start[j + 1];
        (&self.col_row[r.clone()], &self.col_val[r])
    }

    pub fn var_name(&self, j: usize) -> String {
        self.var_names.as_ref().map_or_else(|| format!("x{j}"), |v| v[j].clone())
    }

    pub fn row_name(&self, i: usize) -> String {
        self.row_names.as_ref().map_or_else(|| format!("r{i}"), |v| v[i].clone())
    }

    pub fn var_names(&self) -> Option<&[String]> {
        self.var_names.as_deref()
    }

    pub fn row_names(&self) -> Option<&[String]> {
        self.row_names.as_deref()
    }

    pub fn root_box(&self) -> BoundsBox {
        BoundsBox {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, a)| a * x[j]).sum()
    }

    /// Restricts `x` to the integer positions, in `integer_set` order.
    pub fn integer_part(&self, x: &[f64]) -> Vec<f64> {
        self.integer_set.iter().map(|&j| x[j]).collect()
    }
}

/// Lower/upper bound vectors; also the node type of the depth-first searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundsBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// True when some variable has `lower > upper`.
    pub fn is_infeasible(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l > u)
    }

    pub fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    pub fn all_fixed(&self, vars: &[usize]) -> bool {
        vars.iter().all(|&j| self.is_fixed(j))
    }

    pub fn fix(&mut self, j: usize, value: f64) {
        self.lower[j] = value;
        self.upper[j] = value;
    }

    /// True when `self` lies inside `outer` componentwise.
    pub fn is_within(&self, outer: &BoundsBox) -> bool {
        self.len() == outer.len()
            && (0..self.len()).all(|j| self.lower[j] >= outer.lower[j] && self.upper[j] <= outer.upper[j])
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .enumerate()
            .all(|(j, &v)| v >= self.lower[j] - tol && v <= self.upper[j] + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionStatus {
    Feasible,
    IntegerFeasible,
    Infeasible,
    Unknown,
}

impl fmt::Display for SolutionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Feasible => "feasible",
            Self::IntegerFeasible => "integer_feasible",
            Self::Infeasible => "infeasible",
            Self::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: SolutionStatus,
}

/// Classifies `x` against bounds, rows and integrality of `inst`.
///
/// Bounds are checked with `row_feas_tol` as well.
pub fn check_solution(
    inst: &MipInstance,
    x: &[f64],
    int_feas_tol: f64,
    row_feas_tol: f64,
) -> Result<Solution, ModelError> {
    if x.len() != inst.num_vars() {
        return Err(ModelError::DimensionMismatch {
            expected: inst.num_vars(),
            got: x.len(),
        });
    }
    let objective_value = inst.objective_value(x);
    let bounds_ok = x.iter().enumerate().all(|(j, &v)| {
        !v.is_nan() && v >= inst.lower[j] - row_feas_tol && v <= inst.upper[j] + row_feas_tol
    });
    let rows_ok = bounds_ok
        && (0..inst.num_rows()).all(|i| inst.row_activity(i, x) <= inst.rhs[i] + row_feas_tol);
    let status = if !rows_ok {
        SolutionStatus::Infeasible
    } else if inst
        .integer_set
        .iter()
        .all(|&j| (x[j] - x[j].round()).abs() <= int_feas_tol)
    {
        SolutionStatus::IntegerFeasible
    } else {
        SolutionStatus::Feasible
    };
    Ok(Solution {
        // adding zero turns -0.0 into 0.0
        values: x.iter().map(|v| v + 0.0).collect(),
        objective_value,
        status,
    })
}

struct PendingRow {
    name: String,
    entries: Vec<(usize, f64)>,
    sense: RowSense,
    rhs: f64,
    range: Option<f64>,
}

/// Incremental construction of an instance with mixed row senses.
#[derive(Default)]
pub struct InstanceBuilder {
    name: Option<String>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integers: Vec<usize>,
    var_names: Vec<String>,
    rows: Vec<PendingRow>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, obj: f64, lower: f64, upper: f64, integer: bool) -> usize {
        let j = self.objective.len();
        self.objective.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.var_names.push(name.into());
        if integer {
            self.integers.push(j);
        }
        j
    }

    pub fn set_objective(&mut self, j: usize, obj: f64) {
        self.objective[j] = obj;
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_integer(&mut self, j: usize) {
        if !self.integers.contains(&j) {
            self.integers.push(j);
        }
    }

    pub fn add_row(&mut self, name: impl Into<String>, entries: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.rows.push(PendingRow {
            name: name.into(),
            entries,
            sense,
            rhs,
            range: None,
        });
    }

    /// Row with an MPS-style range value.
    pub fn add_ranged_row(
        &mut self,
        name: impl Into<String>,
        entries: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
        range: f64,
    ) {
        self.rows.push(PendingRow {
            name: name.into(),
            entries,
            sense,
            rhs,
            range: Some(range),
        });
    }

    /// Normalizes all rows to `<=` and builds the instance.
    pub fn build(self) -> Result<MipInstance, ModelError> {
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut names = Vec::with_capacity(self.rows.len());
        for row in self.rows {
            let (idx, val): (Vec<usize>, Vec<f64>) = row.entries.iter().copied().unzip();
            let neg: Vec<f64> = val.iter().map(|a| -a).collect();
            // interval [lo, hi] on the activity
            let (lo, hi) = match (row.sense, row.range) {
                (RowSense::Le, None) => (-INF, row.rhs),
                (RowSense::Ge, None) => (row.rhs, INF),
                (RowSense::Eq, None) => (row.rhs, row.rhs),
                (RowSense::Le, Some(r)) => (row.rhs - r.abs(), row.rhs),
                (RowSense::Ge, Some(r)) => (row.rhs, row.rhs + r.abs()),
                (RowSense::Eq, Some(r)) if r >= 0.0 => (row.rhs, row.rhs + r),
                (RowSense::Eq, Some(r)) => (row.rhs + r, row.rhs),
            };
            let both = lo.is_finite() && hi.is_finite();
            if hi.is_finite() {
                rows.push((idx.clone(), val, hi));
                names.push(if both { format!("{}_le", row.name) } else { row.name.clone() });
            }
            if lo.is_finite() {
                rows.push((idx, neg, -lo));
                names.push(if both { format!("{}_ge", row.name) } else { row.name });
            }
        }
        MipInstance::from_le_rows(
            self.name,
            self.objective,
            rows,
            self.lower,
            self.upper,
            self.integers,
            Some(self.var_names),
            Some(names),
        )
    }
}
