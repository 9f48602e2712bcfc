//! Manifest-driven experiment runs and the CSV report.
//!
//! A manifest is a JSON array of `{"instance", "heur", "seed", "params"}`
//! objects. Each entry yields one [`BatchRecord`]. Everything except the
//! timing columns (which come last) is a deterministic function of the
//! entry, so reruns can be diffed after masking them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{analyze, AnalysisReport};
use crate::bnb::{solve_mip, MipRunLog};
use crate::heur::{
    self, fix_loop, fp_search, inferred_objective, make_strategies, rens, HeurError, HeuristicReport,
    InstructionVector, SearchLimits, StrategyAux, StrategyKind, DEFAULT_PROP_ROUNDS, DEFAULT_SUB_MIP_GAP,
};
use crate::lp::{LpResult, LpSolver, PrimalSimplex, DEFAULT_ITER_LIMIT};
use crate::model::{read_instance_file, MipInstance, Tolerances};
use crate::par;

/// First line of every report file.
pub const REPORT_HEADER: &str = "# fixprop-batch-report v1";

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeurKind {
    Rens,
    Fixloop,
    Fp,
}

impl HeurKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rens => "rens",
            Self::Fixloop => "fixloop",
            Self::Fp => "fp",
        }
    }
}

fn default_strategy() -> StrategyKind {
    StrategyKind::InferredObjective
}
fn default_prop_rounds() -> usize {
    DEFAULT_PROP_ROUNDS
}
fn default_time_limit() -> f64 {
    60.0
}
fn default_sub_mip_gap() -> f64 {
    DEFAULT_SUB_MIP_GAP
}
fn default_true() -> bool {
    true
}
fn default_oracle_nodes() -> usize {
    20_000
}
fn default_inferred_rounds() -> usize {
    100
}

/// Per-entry knobs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    #[serde(default = "default_prop_rounds")]
    pub prop_rounds: usize,
    #[serde(default)]
    pub max_fixings: Option<usize>,
    #[serde(default)]
    pub max_infeasible_nodes: Option<usize>,
    /// Seconds.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_sub_mip_gap")]
    pub sub_mip_gap: f64,
    /// Instruction file for `fixloop`; nearest rounding of the LP otherwise.
    #[serde(default)]
    pub instructions: Option<PathBuf>,
    /// Run branch-and-bound for the dual bound and the LP/MIP analysis.
    #[serde(default = "default_true")]
    pub oracle: bool,
    /// Node budget of the oracle; a node limit keeps reports reproducible.
    #[serde(default = "default_oracle_nodes")]
    pub oracle_node_limit: usize,
    #[serde(default = "default_inferred_rounds")]
    pub inferred_rounds: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub instance: PathBuf,
    pub heur: HeurKind,
    pub seed: u64,
    #[serde(default)]
    pub params: RunParams,
}

/// Parses a manifest and resolves relative instance paths against `base`.
pub fn read_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, BatchError> {
    let mut entries: Vec<ManifestEntry> = serde_json::from_str(text)?;
    for e in &mut entries {
        if e.instance.is_relative() {
            e.instance = base.join(&e.instance);
        }
        if let Some(p) = &mut e.params.instructions {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(entries)
}

/// One report line. Timing columns are the trailing `time_*` fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub instance: String,
    pub heur: String,
    pub seed: u64,
    pub strategy: String,
    pub prop_rounds: usize,
    pub status: String,
    pub objective: Option<f64>,
    pub dual_bound: Option<f64>,
    pub gap_vs_dual: Option<f64>,
    pub fixings: usize,
    pub infeasible_nodes: usize,
    pub backtracks: usize,
    pub oracle_status: String,
    pub oracle_objective: Option<f64>,
    pub initial_gap: Option<f64>,
    pub dist_all: Option<f64>,
    pub dist_int: Option<f64>,
    pub coincide_raw: Option<f64>,
    pub coincide_rounded: Option<f64>,
    pub lp_solver_tag: String,
    pub message: String,
    pub time_total: f64,
    pub time_propagation: f64,
    pub time_lp: f64,
    pub time_other: f64,
}

impl BatchRecord {
    fn blank(entry: &ManifestEntry) -> Self {
        Self {
            instance: entry.instance.display().to_string(),
            heur: entry.heur.name().to_string(),
            seed: entry.seed,
            strategy: strategy_name(entry.params.strategy).to_string(),
            prop_rounds: entry.params.prop_rounds,
            status: "error".into(),
            objective: None,
            dual_bound: None,
            gap_vs_dual: None,
            fixings: 0,
            infeasible_nodes: 0,
            backtracks: 0,
            oracle_status: "skipped".into(),
            oracle_objective: None,
            initial_gap: None,
            dist_all: None,
            dist_int: None,
            coincide_raw: None,
            coincide_rounded: None,
            lp_solver_tag: String::new(),
            message: String::new(),
            time_total: 0.0,
            time_propagation: 0.0,
            time_lp: 0.0,
            time_other: 0.0,
        }
    }
}

fn strategy_name(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::InferredObjective => "inferred",
        StrategyKind::NearestLp => "nearest",
        StrategyKind::Random => "random",
    }
}

fn status_name(report: &HeuristicReport) -> &'static str {
    match report.status {
        heur::HeuristicStatus::SolutionFound => "solution_found",
        heur::HeuristicStatus::NoSolution => "no_solution",
        heur::HeuristicStatus::Infeasible => "infeasible",
        heur::HeuristicStatus::LimitReached => "limit_reached",
    }
}

/// Runs one heuristic on a loaded instance. `lp` must be the root relaxation
/// result; `dual` is the bound the gap is measured against.
pub fn run_heuristic(
    inst: &MipInstance,
    kind: HeurKind,
    seed: u64,
    params: &RunParams,
    lp: &LpResult,
) -> Result<HeuristicReport, HeurError> {
    let mut limits = SearchLimits::for_instance(inst);
    if let Some(v) = params.max_fixings {
        limits.max_fixings = v;
    }
    if let Some(v) = params.max_infeasible_nodes {
        limits.max_infeasible_nodes = v;
    }
    limits.time_limit = Duration::try_from_secs_f64(params.time_limit)
        .map_err(|e| HeurError::Precondition(format!("time_limit: {e}")))?;
    match kind {
        HeurKind::Rens => rens(inst, lp, params.sub_mip_gap, &limits),
        HeurKind::Fixloop => {
            let z = lp
                .values()
                .ok_or_else(|| HeurError::Precondition(format!("fixloop needs an optimal LP, got {:?}", lp.status)))?;
            let z_ref = inst.integer_part(z);
            let phi = match &params.instructions {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| HeurError::Instructions(format!("{}: {e}", path.display())))?;
                    InstructionVector::from_json(inst, &text)?
                }
                None => InstructionVector::nearest(&z_ref),
            };
            let aux = StrategyAux {
                lp: Some(lp),
                ..Default::default()
            };
            let (order, _) = make_strategies(StrategyKind::NearestLp, inst, aux)?;
            fix_loop(inst, &inst.root_box(), &phi, &z_ref, &order.order, params.prop_rounds)
        }
        HeurKind::Fp => {
            let io = inferred_objective(inst, params.inferred_rounds.max(1));
            let aux = StrategyAux {
                inferred: Some(&io),
                lp: Some(lp),
                seed: Some(seed),
            };
            let (sel, fix) = make_strategies(params.strategy, inst, aux)?;
            fp_search(inst, &sel, &fix, &limits, params.prop_rounds)
        }
    }
}

/// Oracle solve used for the dual bound and the analysis columns.
pub fn run_oracle(inst: &MipInstance, node_limit: usize) -> Result<MipRunLog, HeurError> {
    Ok(solve_mip(inst, &inst.root_box(), 0.0, node_limit, Duration::from_secs(3600))?)
}

/// Runs one manifest entry; failures end up in the record, not as errors.
pub fn run_entry(entry: &ManifestEntry) -> BatchRecord {
    let started = std::time::Instant::now();
    let mut rec = BatchRecord::blank(entry);
    if let Err(msg) = fill_record(entry, &mut rec) {
        rec.status = "error".into();
        rec.message = msg;
    }
    rec.time_total = started.elapsed().as_secs_f64();
    rec
}

fn fill_record(entry: &ManifestEntry, rec: &mut BatchRecord) -> Result<(), String> {
    let inst = read_instance_file(&entry.instance).map_err(|e| format!("{}: {e}", entry.instance.display()))?;
    let solver = PrimalSimplex::default();
    let lp = solver
        .solve(&inst, &inst.root_box(), DEFAULT_ITER_LIMIT)
        .map_err(|e| e.to_string())?;
    rec.lp_solver_tag = solver.name().to_string();
    let p = &entry.params;
    let mut dual = lp.is_optimal().then_some(lp.objective);
    if p.oracle && lp.is_optimal() {
        let log = run_oracle(&inst, p.oracle_node_limit).map_err(|e| e.to_string())?;
        rec.oracle_status = format!("{:?}", log.status).to_lowercase();
        dual = Some(log.dual_bound);
        if let (Some(sol), Some(x_lp)) = (&log.incumbent, lp.values()) {
            rec.oracle_objective = Some(sol.objective_value);
            let a: AnalysisReport = analyze(
                &inst,
                x_lp,
                lp.objective,
                &sol.values,
                sol.objective_value,
                solver.name(),
                &Tolerances::default(),
            )
            .map_err(|e| e.to_string())?;
            rec.initial_gap = Some(a.initial_gap);
            rec.dist_all = Some(a.dist_all);
            rec.dist_int = Some(a.dist_int);
            rec.coincide_raw = Some(a.coincide_raw);
            rec.coincide_rounded = Some(a.coincide_rounded);
        }
    }
    rec.dual_bound = dual;
    let mut report = run_heuristic(&inst, entry.heur, entry.seed, p, &lp).map_err(|e| e.to_string())?;
    if let Some(d) = dual {
        report = report.with_dual_bound(d);
    }
    rec.status = status_name(&report).to_string();
    rec.objective = report.objective();
    rec.gap_vs_dual = report.gap_vs_dual;
    rec.fixings = report.fixings;
    rec.infeasible_nodes = report.infeasible_nodes;
    rec.backtracks = report.backtracks;
    rec.message = report.message.unwrap_or_default();
    rec.time_propagation = report.phase_times.propagation;
    rec.time_lp = report.phase_times.lp;
    rec.time_other = report.phase_times.other;
    Ok(())
}

/// Runs all entries on `workers` threads; records keep manifest order.
pub fn run_batch(entries: &[ManifestEntry], workers: usize) -> Vec<BatchRecord> {
    par::map(entries, workers, |e| {
        log::debug!("running {} on {}", e.heur.name(), e.instance.display());
        run_entry(e)
    })
}

/// Same as [`run_batch`] but always on the calling thread.
pub fn run_batch_sequential(entries: &[ManifestEntry]) -> Vec<BatchRecord> {
    par::map_sequential(entries, run_entry)
}

/// Writes the versioned header line followed by CSV rows.
pub fn write_report<W: Write>(records: &[BatchRecord], mut out: W) -> Result<(), BatchError> {
    writeln!(out, "{REPORT_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
