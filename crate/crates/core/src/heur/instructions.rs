use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::MipInstance;

use super::HeurError;

/// Rounding directive per integer variable, in `integer_set` order:
/// `+1` round up, `-1` round down, `0` leave alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionVector {
    directives: Vec<i8>,
}

impl InstructionVector {
    pub fn new(directives: Vec<i8>) -> Result<Self, HeurError> {
        if let Some(d) = directives.iter().find(|d| !(-1..=1).contains(*d)) {
            return Err(HeurError::Instructions(format!("directive {d} not in {{-1, 0, 1}}")));
        }
        Ok(Self { directives })
    }

    pub fn zeros(len: usize) -> Self {
        Self { directives: vec![0; len] }
    }

    pub fn directives(&self) -> &[i8] {
        &self.directives
    }

    pub fn len(&self) -> usize {
        self.directives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directives.is_empty()
    }

    /// Directives that turn `z_ref` into `target` where rounding can reach it;
    /// `0` elsewhere.
    pub fn toward(z_ref: &[f64], target: &[f64], int_tol: f64) -> Self {
        let directives = z_ref
            .iter()
            .zip(target)
            .map(|(&z, &t)| {
                let t = t.round();
                if t == (z - int_tol).ceil() {
                    1
                } else if t == (z + int_tol).floor() {
                    -1
                } else {
                    0
                }
            })
            .collect();
        Self { directives }
    }

    /// Rounds every value to its nearest integer: `+1` from fractional part
    /// one half upwards, `-1` below.
    pub fn nearest(z: &[f64]) -> Self {
        let directives = z.iter().map(|v| if v - v.floor() >= 0.5 { 1 } else { -1 }).collect();
        Self { directives }
    }

    /// Parses `{"name": dir, ...}` keyed by variable name, or a plain array in
    /// `integer_set` order. Integers missing from the map get `0`.
    pub fn from_json(inst: &MipInstance, text: &str) -> Result<Self, HeurError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HeurError::Instructions(e.to_string()))?;
        let as_dir = |v: &serde_json::Value| -> Result<i8, HeurError> {
            v.as_i64()
                .filter(|d| (-1..=1).contains(d))
                .map(|d| d as i8)
                .ok_or_else(|| HeurError::Instructions(format!("directive {v} not in {{-1, 0, 1}}")))
        };
        match value {
            serde_json::Value::Array(items) => {
                if items.len() != inst.num_integers() {
                    return Err(HeurError::DimensionMismatch {
                        expected: inst.num_integers(),
                        got: items.len(),
                    });
                }
                Self::new(items.iter().map(as_dir).collect::<Result<_, _>>()?)
            }
            serde_json::Value::Object(map) => {
                let pos: BTreeMap<String, usize> = inst
                    .integer_set()
                    .iter()
                    .enumerate()
                    .map(|(p, &j)| (inst.var_name(j), p))
                    .collect();
                let mut directives = vec![0i8; inst.num_integers()];
                for (name, v) in &map {
                    let p = *pos
                        .get(name)
                        .ok_or_else(|| HeurError::Instructions(format!("{name:?} is not an integer variable")))?;
                    directives[p] = as_dir(v)?;
                }
                Ok(Self { directives })
            }
            _ => Err(HeurError::Instructions("expected an object or an array".into())),
        }
    }

    pub fn to_json(&self, inst: &MipInstance) -> String {
        let map: BTreeMap<String, i8> = inst
            .integer_set()
            .iter()
            .zip(&self.directives)
            .map(|(&j, &d)| (inst.var_name(j), d))
            .collect();
        serde_json::to_string(&map).expect("map of integers serializes")
    }
}
