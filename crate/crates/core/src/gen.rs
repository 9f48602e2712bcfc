//! Seeded unit-commitment instances with discrete capacity expansion.
//!
//! Let `G = num_nodes * num_thermal` units, `N` nodes, `L` lines and `T`
//! timesteps. Variables, in index order:
//!
//! | block | count | kind |
//! |-------|-------|------|
//! | `u_g{g}_t{t}` commitment | `G*T` | binary |
//! | `p_g{g}_t{t}` dispatch | `G*T` | continuous |
//! | `y_g{g}` expansion blocks | `G` | integer in `[0, max_expansion]` |
//! | `r_n{n}_t{t}` renewable infeed | `N*T` if `renewable_share > 0` | continuous |
//! | `f_l{l}_t{t}` line flow | `L*T` | continuous, free sign |
//! | `z_l{l}` line expansion | `L` | integer in `[0, max_expansion]` |
//!
//! Rows per unit and timestep: `p - Pcap*u <= 0`, `p - B*y <= E`,
//! `Pmin*u - p <= 0`. Minimum up time `UT` adds `u_t - u_{t-1} <= u_s` for
//! `t < s < t + UT`, minimum down time `DT` adds `u_{t-1} - u_t <= 1 - u_s` for
//! `t < s < t + DT` (pairwise sliding window). Per node and timestep one
//! balance row `sum p + r + inflow - outflow >= demand - import`; per line
//! and timestep two rows `+-f - Fb*z <= F0`. With
//! `S(k) = sum_{s=0}^{T-2} min(k, s)` the row count is
//!
//! `m = G*(3T + S(UT-1) + S(DT-1)) + N*T + 2*L*T`
//!
//! (see [`GenSpec::expected_rows`]). Every generated instance is certified
//! feasible: all units committed, maximal expansion, flows from an LP.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, LpError, LpStatus, DEFAULT_ITER_LIMIT};
use crate::model::{check_solution, InstanceBuilder, MipInstance, ModelError, RowSense, Solution, SolutionStatus};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("demand cannot be met: {0}")]
    Unsatisfiable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandProfile {
    Sinusoidal,
    RandomWalk,
}

fn default_min_up() -> usize {
    3
}
fn default_min_down() -> usize {
    2
}
fn default_max_expansion() -> u32 {
    2
}
fn default_cost_spread() -> f64 {
    0.1
}
fn default_demand_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub num_nodes: usize,
    pub num_timesteps: usize,
    /// Thermal units per node.
    pub num_thermal: usize,
    pub num_lines: usize,
    pub seed: u64,
    /// Currency per tonne of CO2.
    pub price_co2: f64,
    pub demand_profile: DemandProfile,
    pub renewable_share: f64,
    #[serde(default = "default_min_up")]
    pub min_up: usize,
    #[serde(default = "default_min_down")]
    pub min_down: usize,
    /// Upper bound of every expansion integer.
    #[serde(default = "default_max_expansion")]
    pub max_expansion: u32,
    /// Relative half-width of the uniform cost perturbation around nominal.
    #[serde(default = "default_cost_spread")]
    pub cost_spread: f64,
    /// Demand multiplier applied after capacities have been sized.
    #[serde(default = "default_demand_scale")]
    pub demand_scale: f64,
}

impl GenSpec {
    pub fn new(num_nodes: usize, num_timesteps: usize, num_thermal: usize, num_lines: usize, seed: u64) -> Self {
        Self {
            num_nodes,
            num_timesteps,
            num_thermal,
            num_lines,
            seed,
            price_co2: 25.0,
            demand_profile: DemandProfile::Sinusoidal,
            renewable_share: 0.0,
            min_up: default_min_up(),
            min_down: default_min_down(),
            max_expansion: default_max_expansion(),
            cost_spread: default_cost_spread(),
            demand_scale: default_demand_scale(),
        }
    }

    /// 2 nodes, 2 units each, 1 line, 12 steps: 137 variables, 53 integers.
    pub fn tiny(seed: u64) -> Self {
        Self {
            renewable_share: 0.2,
            ..Self::new(2, 12, 2, 1, seed)
        }
    }

    /// 3 nodes, 2 units each, 2 lines, 24 steps: 416 variables, 152 integers.
    pub fn small(seed: u64) -> Self {
        Self {
            renewable_share: 0.2,
            demand_profile: if seed.is_multiple_of(2) {
                DemandProfile::Sinusoidal
            } else {
                DemandProfile::RandomWalk
            },
            ..Self::new(3, 24, 2, 2, seed)
        }
    }

    /// 4 nodes, 4 units each, 4 lines, 48 steps: 1,940 variables.
    pub fn medium(seed: u64) -> Self {
        Self {
            renewable_share: 0.3,
            ..Self::new(4, 48, 4, 4, seed)
        }
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "tiny" => Some(Self::tiny(seed)),
            "small" => Some(Self::small(seed)),
            "medium" => Some(Self::medium(seed)),
            _ => None,
        }
    }

    fn num_units(&self) -> usize {
        self.num_nodes * self.num_thermal
    }

    pub fn expected_vars(&self) -> usize {
        let (g, t, l) = (self.num_units(), self.num_timesteps, self.num_lines);
        let r = if self.renewable_share > 0.0 { self.num_nodes * t } else { 0 };
        2 * g * t + g + r + l * t + l
    }

    pub fn expected_integers(&self) -> usize {
        let g = self.num_units();
        g * self.num_timesteps + g + self.num_lines
    }

    pub fn expected_rows(&self) -> usize {
        let t = self.num_timesteps;
        let window = |k: usize| -> usize { (0..t.saturating_sub(1)).map(|s| k.min(s)).sum() };
        let per_unit = 3 * t + window(self.min_up.saturating_sub(1)) + window(self.min_down.saturating_sub(1));
        self.num_units() * per_unit + self.num_nodes * t + 2 * self.num_lines * t
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidSpec(m.to_string()));
        if self.num_timesteps < 2 {
            return bad("num_timesteps must be at least 2");
        }
        if self.num_nodes == 0 || self.num_thermal == 0 {
            return bad("num_nodes and num_thermal must be at least 1");
        }
        if self.num_nodes == 1 && self.num_lines > 0 {
            return bad("lines need at least two nodes");
        }
        if !(0.0..=1.0).contains(&self.renewable_share) {
            return bad("renewable_share must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.cost_spread) {
            return bad("cost_spread must lie in [0, 1)");
        }
        if !(self.price_co2 >= 0.0 && self.price_co2.is_finite()) {
            return bad("price_co2 must be a non-negative number");
        }
        if !(self.demand_scale > 0.0 && self.demand_scale.is_finite()) {
            return bad("demand_scale must be positive");
        }
        if self.min_up == 0 || self.min_down == 0 {
            return bad("min_up and min_down must be at least 1");
        }
        Ok(())
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

struct Unit {
    node: usize,
    existing: f64,
    block: f64,
    min_load: f64,
    cost: f64,
    no_load: f64,
    invest: f64,
}

struct Line {
    from: usize,
    to: usize,
    existing: f64,
    block: f64,
    invest: f64,
}

pub fn generate(spec: &GenSpec) -> Result<MipInstance, GenError> {
    generate_with_witness(spec).map(|(inst, _)| inst)
}

/// Generates the instance together with the certified feasible point.
pub fn generate_with_witness(spec: &GenSpec) -> Result<(MipInstance, Solution), GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (nn, tt, nl) = (spec.num_nodes, spec.num_timesteps, spec.num_lines);
    let ymax = spec.max_expansion as f64;
    let spread = spec.cost_spread;
    let jitter = |rng: &mut ChaCha8Rng, nominal: f64| nominal * (1.0 + rng.gen_range(-spread..=spread));

    // demand and fixed imports
    let mut demand = vec![vec![0.0; tt]; nn];
    let mut import = vec![vec![0.0; tt]; nn];
    let mut base = vec![0.0; nn];
    for n in 0..nn {
        base[n] = rng.gen_range(80.0..120.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let mut walk: f64 = 0.0;
        let level = rng.gen_range(-0.05..0.05);
        for t in 0..tt {
            let shape = match spec.demand_profile {
                DemandProfile::Sinusoidal => {
                    0.2 * (2.0 * PI * t as f64 / 24.0 + phase).sin() + rng.gen_range(-0.03..0.03)
                }
                DemandProfile::RandomWalk => {
                    walk = (walk + rng.gen_range(-0.06..0.06)).clamp(-0.25, 0.25);
                    walk
                }
            };
            demand[n][t] = round3(base[n] * (1.0 + shape));
            import[n][t] = round3(base[n] * (level + rng.gen_range(-0.02..0.02)));
        }
    }
    let mut avail = vec![vec![0.0; tt]; nn];
    if spec.renewable_share > 0.0 {
        for n in 0..nn {
            let scale = rng.gen_range(0.7..1.0);
            for t in 0..tt {
                let sun = ((t % 24) as f64 - 6.0) * PI / 12.0;
                let weather = rng.gen_range(0.6..1.0);
                avail[n][t] = round3(2.0 * spec.renewable_share * base[n] * scale * sun.sin().max(0.0) * weather);
            }
        }
    }

    // thermal fleet sized on peak net demand
    let mut units = Vec::with_capacity(spec.num_units());
    for n in 0..nn {
        let peak = (0..tt).map(|t| demand[n][t] - import[n][t]).fold(0.0, f64::max);
        let existing_total = peak * rng.gen_range(0.85..0.95);
        let weights: Vec<f64> = (0..spec.num_thermal).map(|_| rng.gen_range(0.7..1.3)).collect();
        let wsum: f64 = weights.iter().sum();
        for w in weights {
            let existing = round3(existing_total * w / wsum);
            let block = round3(existing * rng.gen_range(0.1..0.2));
            let cost = round3(jitter(&mut rng, 40.0) + spec.price_co2 * jitter(&mut rng, 0.5));
            units.push(Unit {
                node: n,
                existing,
                block,
                min_load: round3(existing * rng.gen_range(0.3..0.5)),
                cost,
                no_load: round3(0.03 * cost * existing),
                invest: round3(0.15 * cost * block * tt as f64),
            });
        }
    }
    let lines: Vec<Line> = (0..nl)
        .map(|l| {
            let from = l % nn;
            let to = (l + 1 + l / nn) % nn;
            let to = if to == from { (from + 1) % nn } else { to };
            let existing = round3(rng.gen_range(5.0..15.0));
            let block = round3(rng.gen_range(5.0..10.0));
            Line {
                from,
                to,
                existing,
                block,
                invest: round3(jitter(&mut rng, 2.0) * block * tt as f64),
            }
        })
        .collect();

    for n in 0..nn {
        for t in 0..tt {
            demand[n][t] = round3(demand[n][t] * spec.demand_scale);
        }
    }

    let mut b = InstanceBuilder::new().with_name(format!(
        "uc-n{}-t{}-g{}-l{}-s{}",
        nn, tt, spec.num_thermal, nl, spec.seed
    ));
    let g_count = units.len();
    let u: Vec<Vec<usize>> = (0..g_count)
        .map(|g| {
            (0..tt)
                .map(|t| b.add_var(format!("u_g{g}_t{t}"), units[g].no_load, 0.0, 1.0, true))
                .collect()
        })
        .collect();
    let p: Vec<Vec<usize>> = (0..g_count)
        .map(|g| {
            (0..tt)
                .map(|t| b.add_var(format!("p_g{g}_t{t}"), units[g].cost, 0.0, f64::INFINITY, false))
                .collect()
        })
        .collect();
    let y: Vec<usize> = (0..g_count)
        .map(|g| b.add_var(format!("y_g{g}"), units[g].invest, 0.0, ymax, true))
        .collect();
    let r: Vec<Vec<usize>> = if spec.renewable_share > 0.0 {
        (0..nn)
            .map(|n| (0..tt).map(|t| b.add_var(format!("r_n{n}_t{t}"), 0.0, 0.0, avail[n][t], false)).collect())
            .collect()
    } else {
        Vec::new()
    };
    let f: Vec<Vec<usize>> = (0..nl)
        .map(|l| {
            let cap = lines[l].existing + lines[l].block * ymax;
            (0..tt).map(|t| b.add_var(format!("f_l{l}_t{t}"), 0.0, -cap, cap, false)).collect()
        })
        .collect();
    let z: Vec<usize> = (0..nl)
        .map(|l| b.add_var(format!("z_l{l}"), lines[l].invest, 0.0, ymax, true))
        .collect();

    for (g, unit) in units.iter().enumerate() {
        let pcap = unit.existing + unit.block * ymax;
        for t in 0..tt {
            b.add_row(format!("cap_g{g}_t{t}"), vec![(p[g][t], 1.0), (u[g][t], -pcap)], RowSense::Le, 0.0);
            b.add_row(format!("exp_g{g}_t{t}"), vec![(p[g][t], 1.0), (y[g], -unit.block)], RowSense::Le, unit.existing);
            b.add_row(format!("min_g{g}_t{t}"), vec![(u[g][t], unit.min_load), (p[g][t], -1.0)], RowSense::Le, 0.0);
        }
        for t in 1..tt {
            for s in t + 1..(t + spec.min_up).min(tt) {
                b.add_row(
                    format!("up_g{g}_t{t}_s{s}"),
                    vec![(u[g][t], 1.0), (u[g][t - 1], -1.0), (u[g][s], -1.0)],
                    RowSense::Le,
                    0.0,
                );
            }
            for s in t + 1..(t + spec.min_down).min(tt) {
                b.add_row(
                    format!("dn_g{g}_t{t}_s{s}"),
                    vec![(u[g][t - 1], 1.0), (u[g][t], -1.0), (u[g][s], 1.0)],
                    RowSense::Le,
                    1.0,
                );
            }
        }
    }
    for n in 0..nn {
        for t in 0..tt {
            let mut entries: Vec<(usize, f64)> = units
                .iter()
                .enumerate()
                .filter(|(_, un)| un.node == n)
                .map(|(g, _)| (p[g][t], 1.0))
                .collect();
            if !r.is_empty() {
                entries.push((r[n][t], 1.0));
            }
            for (l, line) in lines.iter().enumerate() {
                if line.to == n {
                    entries.push((f[l][t], 1.0));
                } else if line.from == n {
                    entries.push((f[l][t], -1.0));
                }
            }
            b.add_row(format!("bal_n{n}_t{t}"), entries, RowSense::Ge, round3(demand[n][t] - import[n][t]));
        }
    }
    for (l, line) in lines.iter().enumerate() {
        for t in 0..tt {
            b.add_row(format!("fp_l{l}_t{t}"), vec![(f[l][t], 1.0), (z[l], -line.block)], RowSense::Le, line.existing);
            b.add_row(format!("fn_l{l}_t{t}"), vec![(f[l][t], -1.0), (z[l], -line.block)], RowSense::Le, line.existing);
        }
    }
    let inst = b.build()?;
    debug_assert_eq!(inst.num_vars(), spec.expected_vars());
    debug_assert_eq!(inst.num_rows(), spec.expected_rows());

    // witness: everything committed and fully expanded, dispatch from an LP
    let mut wbox = inst.root_box();
    for &j in inst.integer_set() {
        let v = wbox.upper[j];
        wbox.fix(j, v);
    }
    let lp = solve_lp(&inst, &wbox, DEFAULT_ITER_LIMIT)?;
    let witness = match (lp.status, lp.solution) {
        (LpStatus::Optimal, Some(sol)) => sol,
        (status, _) => {
            return Err(GenError::Unsatisfiable(format!(
                "maximal fleet cannot cover demand (witness LP {status:?})"
            )))
        }
    };
    let checked = check_solution(&inst, &witness.values, 1e-9, 1e-6)?;
    if checked.status != SolutionStatus::IntegerFeasible {
        return Err(GenError::Unsatisfiable(format!("witness failed certification ({})", checked.status)));
    }
    Ok((inst, checked))
}
