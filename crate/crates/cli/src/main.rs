use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fixprop::analysis::analyze;
use fixprop::batch::{self, read_manifest, run_heuristic, write_report, HeurKind, RunParams};
use fixprop::bnb::{solve_mip, MipStatus};
use fixprop::gen::{generate, DemandProfile, GenSpec};
use fixprop::heur::{HeuristicStatus, StrategyKind, DEFAULT_PROP_ROUNDS, DEFAULT_SUB_MIP_GAP};
use fixprop::lp::{solve_lp, LpStatus, DEFAULT_ITER_LIMIT};
use fixprop::model::{read_instance_file, write_json, write_mps, MipInstance, Solution, Tolerances};

/// Input that is well-formed but infeasible; maps to exit code 2.
#[derive(Debug)]
struct InfeasibleInput(String);

impl std::fmt::Display for InfeasibleInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "infeasible: {}", self.0)
    }
}

impl std::error::Error for InfeasibleInput {}

#[derive(Parser)]
#[command(name = "fixprop", version, about = "MIP primal heuristics and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate unit-commitment instances
    Generate(GenerateArgs),
    /// Solve an instance with branch-and-bound or its LP relaxation
    Solve(SolveArgs),
    /// Run a primal heuristic and print its report as JSON
    Heur(HeurArgs),
    /// Compare an LP and a MIP solution
    Analyze(AnalyzeArgs),
    /// Run a manifest of (instance, heuristic, seed) tuples into a CSV report
    Batch(BatchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Mps,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scale preset
    #[arg(long, value_parser = ["tiny", "small", "medium"], default_value = "tiny")]
    preset: String,
    /// JSON spec file; replaces the preset
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances, with consecutive seeds
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    timesteps: Option<usize>,
    /// Thermal units per node
    #[arg(long)]
    thermal: Option<usize>,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long)]
    price_co2: Option<f64>,
    #[arg(long)]
    renewable_share: Option<f64>,
    #[arg(long, value_parser = ["sinusoidal", "random-walk"])]
    demand_profile: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file for a single instance, directory otherwise
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bnb,
    Lp,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "bnb")]
    method: Method,
    /// Relative gap at which branch-and-bound stops
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Seconds
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Write the bound trajectory as CSV
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeurName {
    Rens,
    Fixloop,
    Fp,
}

#[derive(Args)]
struct HeurArgs {
    #[arg(value_enum)]
    heuristic: HeurName,
    instance: PathBuf,
    /// Strategy for fp: inferred, nearest or random
    #[arg(long, default_value = "inferred")]
    strategy: StrategyKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PROP_ROUNDS)]
    prop_rounds: usize,
    #[arg(long)]
    max_fixings: Option<usize>,
    #[arg(long)]
    max_infeasible_nodes: Option<usize>,
    /// Seconds
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = DEFAULT_SUB_MIP_GAP)]
    sub_mip_gap: f64,
    /// Instruction vector for fixloop (JSON keyed by variable name)
    #[arg(long)]
    instructions: Option<PathBuf>,
    /// Dual bound to report the gap against; defaults to the LP optimum
    #[arg(long)]
    dual_bound: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// LP solution (a solution object or `solve --method lp` output)
    #[arg(long)]
    lp: PathBuf,
    /// MIP solution (a solution object or `solve` output)
    #[arg(long)]
    mip: PathBuf,
    /// Instance, for the integer set; without it every variable counts
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "primal-simplex")]
    lp_solver: String,
}

#[derive(Args)]
struct BatchArgs {
    manifest: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FIXPROP_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<InfeasibleInput>() => {
            eprintln!("fixprop: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fixprop: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Heur(a) => cmd_heur(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Batch(a) => cmd_batch(a),
    }
}

fn load(path: &Path) -> Result<MipInstance> {
    read_instance_file(path).with_context(|| format!("cannot load instance {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn duration(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).map_err(|e| anyhow!("invalid time limit {secs}: {e}"))
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut base = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str::<GenSpec>(&text).with_context(|| format!("malformed spec {}", p.display()))?
        }
        None => GenSpec::preset(&a.preset, a.seed).expect("clap restricts presets"),
    };
    if let Some(v) = a.nodes {
        base.num_nodes = v;
    }
    if let Some(v) = a.timesteps {
        base.num_timesteps = v;
    }
    if let Some(v) = a.thermal {
        base.num_thermal = v;
    }
    if let Some(v) = a.lines {
        base.num_lines = v;
    }
    if let Some(v) = a.price_co2 {
        base.price_co2 = v;
    }
    if let Some(v) = a.renewable_share {
        base.renewable_share = v;
    }
    if let Some(v) = &a.demand_profile {
        base.demand_profile = if v == "sinusoidal" {
            DemandProfile::Sinusoidal
        } else {
            DemandProfile::RandomWalk
        };
    }
    let ext = match a.format {
        Format::Json => "json",
        Format::Mps => "mps",
    };
    if a.count > 1 {
        fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    }
    let first = if a.config.is_some() { base.seed } else { a.seed };
    for k in 0..a.count {
        let spec = GenSpec {
            seed: first + k,
            ..base.clone()
        };
        let inst = generate(&spec)?;
        let path = if a.count > 1 {
            a.out.join(format!("{}.{ext}", inst.name().unwrap_or("instance")))
        } else {
            a.out.clone()
        };
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let w = BufWriter::new(file);
        match a.format {
            Format::Json => write_json(&inst, w)?,
            Format::Mps => write_mps(&inst, w)?,
        }
        log::info!("wrote {} ({} vars, {} rows)", path.display(), inst.num_vars(), inst.num_rows());
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    match a.method {
        Method::Lp => {
            let res = solve_lp(&inst, &inst.root_box(), DEFAULT_ITER_LIMIT)?;
            print_json(&res)?;
            if res.status == LpStatus::Infeasible {
                bail!(InfeasibleInput("LP relaxation has no solution".into()));
            }
        }
        Method::Bnb => {
            let log = solve_mip(
                &inst,
                &inst.root_box(),
                a.gap,
                a.node_limit.unwrap_or(usize::MAX),
                duration(a.time_limit)?,
            )?;
            if let Some(path) = &a.events {
                let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                log.write_events_csv(BufWriter::new(f))?;
            }
            print_json(&log)?;
            if log.status == MipStatus::Infeasible {
                bail!(InfeasibleInput("instance has no integer solution".into()));
            }
        }
    }
    Ok(())
}

fn cmd_heur(a: HeurArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let lp = solve_lp(&inst, &inst.root_box(), DEFAULT_ITER_LIMIT)?;
    if lp.status == LpStatus::Infeasible {
        bail!(InfeasibleInput("LP relaxation has no solution".into()));
    }
    let params = RunParams {
        strategy: a.strategy,
        prop_rounds: a.prop_rounds,
        max_fixings: a.max_fixings,
        max_infeasible_nodes: a.max_infeasible_nodes,
        time_limit: a.time_limit,
        sub_mip_gap: a.sub_mip_gap,
        instructions: a.instructions,
        ..RunParams::default()
    };
    let kind = match a.heuristic {
        HeurName::Rens => HeurKind::Rens,
        HeurName::Fixloop => HeurKind::Fixloop,
        HeurName::Fp => HeurKind::Fp,
    };
    let mut report = run_heuristic(&inst, kind, a.seed, &params, &lp)?;
    if let Some(d) = a.dual_bound.or(lp.is_optimal().then_some(lp.objective)) {
        report = report.with_dual_bound(d);
    }
    print_json(&report)?;
    if report.status == HeuristicStatus::Infeasible {
        bail!(InfeasibleInput(report.message.unwrap_or_default()));
    }
    Ok(())
}

/// Accepts a bare solution, an LP result (`solution`) or a MIP log (`incumbent`).
fn read_solution(path: &Path) -> Result<Solution> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    for key in ["solution", "incumbent"] {
        if let Some(inner) = v.get_mut(key) {
            if inner.is_null() {
                bail!(InfeasibleInput(format!("{} holds no solution", path.display())));
            }
            v = inner.take();
            break;
        }
    }
    serde_json::from_value(v).with_context(|| format!("{} holds no solution object", path.display()))
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let lp = read_solution(&a.lp)?;
    let mip = read_solution(&a.mip)?;
    let n = lp.values.len();
    if mip.values.len() != n {
        bail!("solutions differ in length ({n} vs {})", mip.values.len());
    }
    let inst = match &a.instance {
        Some(p) => load(p)?,
        None => {
            // every variable integer, no rows: only the integer set matters here
            let mut b = fixprop::model::InstanceBuilder::new();
            for j in 0..n {
                b.add_var(format!("x{j}"), 0.0, f64::NEG_INFINITY, f64::INFINITY, true);
            }
            b.build()?
        }
    };
    let report = analyze(
        &inst,
        &lp.values,
        lp.objective_value,
        &mip.values,
        mip.objective_value,
        &a.lp_solver,
        &Tolerances::default(),
    )?;
    print_json(&report)
}

fn cmd_batch(a: BatchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("cannot read {}", a.manifest.display()))?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let entries = read_manifest(&text, base).with_context(|| format!("malformed manifest {}", a.manifest.display()))?;
    let records = batch::run_batch(&entries, a.workers);
    let file = File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_report(&records, BufWriter::new(file))?;
    let failed = records.iter().filter(|r| r.status == "error").count();
    if failed > 0 {
        log::warn!("{failed} of {} entries failed; see the message column", records.len());
    }
    Ok(())
}
