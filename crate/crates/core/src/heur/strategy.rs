//! Variable selection orders and fixing directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp::LpResult;
use crate::model::{BoundsBox, MipInstance};

use super::{HeurError, InferredObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[serde(alias = "inferred")]
    InferredObjective,
    #[serde(alias = "nearest")]
    NearestLp,
    Random,
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inferred" | "inferred_objective" => Ok(Self::InferredObjective),
            "nearest" | "nearest_lp" => Ok(Self::NearestLp),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown strategy {other:?} (inferred, nearest, random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Lower,
    Upper,
}

/// Fixed permutation of the integer variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionStrategy {
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FixingStrategy {
    /// `Lower` for positive scores, `Upper` for negative, seeded coin otherwise.
    Inferred { scores: Vec<f64>, seed: u64 },
    /// Bound nearest to the LP value.
    NearestLp { values: Vec<f64> },
    Random { seed: u64 },
}

/// Per-variable coin flip that does not depend on call order.
fn coin(seed: u64, j: usize) -> Direction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    if rng.gen_bool(0.5) {
        Direction::Upper
    } else {
        Direction::Lower
    }
}

impl FixingStrategy {
    pub fn direction(&self, node: &BoundsBox, j: usize) -> Direction {
        match self {
            Self::Inferred { scores, seed } => {
                if scores[j] > 0.0 {
                    Direction::Lower
                } else if scores[j] < 0.0 {
                    Direction::Upper
                } else {
                    coin(*seed, j)
                }
            }
            Self::NearestLp { values } => {
                let (lo, up) = (node.lower[j], node.upper[j]);
                let v = values[j];
                if !up.is_finite() {
                    Direction::Lower
                } else if !lo.is_finite() || up - v <= v - lo {
                    Direction::Upper
                } else {
                    Direction::Lower
                }
            }
            Self::Random { seed } => coin(*seed, j),
        }
    }
}

/// Inputs the strategies may need.
#[derive(Debug, Default, Clone, Copy)]
pub struct StrategyAux<'a> {
    pub inferred: Option<&'a InferredObjective>,
    pub lp: Option<&'a LpResult>,
    pub seed: Option<u64>,
}

pub fn make_strategies(
    kind: StrategyKind,
    inst: &MipInstance,
    aux: StrategyAux<'_>,
) -> Result<(SelectionStrategy, FixingStrategy), HeurError> {
    let ints = inst.integer_set();
    match kind {
        StrategyKind::InferredObjective => {
            let io = aux
                .inferred
                .ok_or(HeurError::MissingAux(kind, "inferred objective scores"))?;
            if io.scores.len() != inst.num_vars() {
                return Err(HeurError::DimensionMismatch {
                    expected: inst.num_vars(),
                    got: io.scores.len(),
                });
            }
            let mut order = ints.to_vec();
            order.sort_by(|&a, &b| io.scores[b].abs().total_cmp(&io.scores[a].abs()).then(a.cmp(&b)));
            Ok((
                SelectionStrategy { order },
                FixingStrategy::Inferred {
                    scores: io.scores.clone(),
                    seed: aux.seed.unwrap_or(0),
                },
            ))
        }
        StrategyKind::NearestLp => {
            let values = aux
                .lp
                .and_then(|r| r.values())
                .ok_or(HeurError::MissingAux(kind, "an optimal LP result"))?
                .to_vec();
            if values.len() != inst.num_vars() {
                return Err(HeurError::DimensionMismatch {
                    expected: inst.num_vars(),
                    got: values.len(),
                });
            }
            // least fractional first
            let frac = |j: usize| (values[j] - values[j].round()).abs();
            let mut order = ints.to_vec();
            order.sort_by(|&a, &b| frac(a).total_cmp(&frac(b)).then(a.cmp(&b)));
            Ok((SelectionStrategy { order }, FixingStrategy::NearestLp { values }))
        }
        StrategyKind::Random => {
            let seed = aux.seed.ok_or(HeurError::MissingAux(kind, "a seed"))?;
            let mut order = ints.to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            Ok((SelectionStrategy { order }, FixingStrategy::Random { seed }))
        }
    }
}

/// Orders `vars` by non-increasing reliability, ties by index.
pub fn order_by_reliability(vars: &[usize], reliability: &[f64]) -> Vec<usize> {
    let mut order = vars.to_vec();
    order.sort_by(|&a, &b| reliability[b].total_cmp(&reliability[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heur::inferred_objective;
    use crate::lp::solve_lp;
    use crate::model::{InstanceBuilder, RowSense};

    fn inst() -> MipInstance {
        let mut b = InstanceBuilder::new();
        let v: Vec<usize> = (0..6)
            .map(|k| b.add_var(format!("x{k}"), [2.0, -1.0, 0.0, 0.5, 0.0, -3.0][k], 0.0, 1.0, true))
            .collect();
        b.add_row("r", v.iter().map(|&j| (j, 1.0)).collect(), RowSense::Le, 3.5);
        b.build().unwrap()
    }

    #[test]
    fn random_is_reproducible() {
        let inst = inst();
        let aux = StrategyAux { seed: Some(7), ..Default::default() };
        let (s1, f1) = make_strategies(StrategyKind::Random, &inst, aux).unwrap();
        let (s2, f2) = make_strategies(StrategyKind::Random, &inst, aux).unwrap();
        assert_eq!(s1, s2);
        let root = inst.root_box();
        for j in 0..6 {
            assert_eq!(f1.direction(&root, j), f2.direction(&root, j));
        }
    }

    #[test]
    fn inferred_directions() {
        let inst = inst();
        let io = inferred_objective(&inst, 10);
        let aux = StrategyAux { inferred: Some(&io), seed: Some(3), ..Default::default() };
        let (sel, fix) = make_strategies(StrategyKind::InferredObjective, &inst, aux).unwrap();
        let root = inst.root_box();
        assert_eq!(fix.direction(&root, 0), Direction::Lower);
        assert_eq!(fix.direction(&root, 1), Direction::Upper);
        // descending |score|, ties by index
        let mags: Vec<f64> = sel.order.iter().map(|&j| io.scores[j].abs()).collect();
        assert!(mags.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_score_uses_seeded_coin() {
        let mut b = InstanceBuilder::new();
        for k in 0..32 {
            b.add_var(format!("x{k}"), 0.0, 0.0, 1.0, true);
        }
        let inst = b.build().unwrap();
        let io = inferred_objective(&inst, 10);
        let aux = StrategyAux { inferred: Some(&io), seed: Some(11), ..Default::default() };
        let (_, fix) = make_strategies(StrategyKind::InferredObjective, &inst, aux).unwrap();
        let root = inst.root_box();
        let dirs: Vec<Direction> = (0..32).map(|j| fix.direction(&root, j)).collect();
        assert!(dirs.contains(&Direction::Lower) && dirs.contains(&Direction::Upper));
    }

    #[test]
    fn nearest_lp_rounds_up_at_point_eight() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", -1.0, 0.0, 1.0, true);
        b.add_row("r", vec![(x, 1.0)], RowSense::Le, 0.8);
        let inst = b.build().unwrap();
        let lp = solve_lp(&inst, &inst.root_box(), 100).unwrap();
        assert!((lp.values().unwrap()[0] - 0.8).abs() < 1e-12);
        let aux = StrategyAux { lp: Some(&lp), ..Default::default() };
        let (_, fix) = make_strategies(StrategyKind::NearestLp, &inst, aux).unwrap();
        assert_eq!(fix.direction(&inst.root_box(), 0), Direction::Upper);
    }

    #[test]
    fn missing_aux_is_an_error() {
        let inst = inst();
        for kind in [StrategyKind::InferredObjective, StrategyKind::NearestLp, StrategyKind::Random] {
            assert!(matches!(
                make_strategies(kind, &inst, StrategyAux::default()),
                Err(HeurError::MissingAux(..))
            ));
        }
    }

    #[test]
    fn reliability_order_is_non_increasing() {
        let order = order_by_reliability(&[0, 2, 4, 6], &[0.2, 0.0, 0.9, 0.0, 0.2, 0.0, 0.5]);
        assert_eq!(order, vec![2, 6, 0, 4]);
    }
}
