//! Native JSON instance format.
//!
//! ```text
//! {"n":2,"m":1,"obj":[1,0],"rows":[{"idx":[0,1],"val":[1,1],"rhs":1}],
//!  "lb":[0,0],"ub":[1,"inf"],"int":[0],"names":{"vars":["x","y"],"rows":["c1"]}}
//! ```
//!
//! Infinite values are written as the strings `"inf"` / `"-inf"`. Rows are
//! already in `<=` form, so reading a file never renormalizes coefficients.

use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{MipInstance, ModelError};

/// `f64` that serializes infinities as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonF64(pub f64);

impl Serialize for JsonF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for JsonF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(JsonF64(v)),
            Raw::Str(s) => match s.as_str() {
                "inf" | "+inf" | "Infinity" => Ok(JsonF64(f64::INFINITY)),
                "-inf" | "-Infinity" => Ok(JsonF64(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("invalid number {other:?}"))),
            },
        }
    }
}

pub(crate) fn wrap(v: &[f64]) -> Vec<JsonF64> {
    v.iter().copied().map(JsonF64).collect()
}

pub(crate) fn unwrap(v: Vec<JsonF64>) -> Vec<f64> {
    v.into_iter().map(|x| x.0).collect()
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    idx: Vec<usize>,
    val: Vec<JsonF64>,
    rhs: JsonF64,
}

#[derive(Serialize, Deserialize, Default)]
struct JsonNames {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vars: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct JsonInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n: usize,
    m: usize,
    obj: Vec<JsonF64>,
    rows: Vec<JsonRow>,
    lb: Vec<JsonF64>,
    ub: Vec<JsonF64>,
    int: Vec<usize>,
    #[serde(default)]
    names: JsonNames,
}

pub fn write_json<W: Write>(inst: &MipInstance, out: W) -> Result<(), ModelError> {
    let rows = (0..inst.num_rows())
        .map(|i| {
            let (idx, val) = inst.row(i);
            JsonRow {
                idx: idx.to_vec(),
                val: wrap(val),
                rhs: JsonF64(inst.rhs()[i]),
            }
        })
        .collect();
    let doc = JsonInstance {
        name: inst.name().map(str::to_owned),
        n: inst.num_vars(),
        m: inst.num_rows(),
        obj: wrap(inst.objective()),
        rows,
        lb: wrap(inst.lower()),
        ub: wrap(inst.upper()),
        int: inst.integer_set().to_vec(),
        names: JsonNames {
            vars: inst.var_names().map(<[String]>::to_vec),
            rows: inst.row_names().map(<[String]>::to_vec),
        },
    };
    serde_json::to_writer(out, &doc)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<MipInstance, ModelError> {
    let doc: JsonInstance = serde_json::from_reader(input)?;
    if doc.obj.len() != doc.n {
        return Err(ModelError::DimensionMismatch { expected: doc.n, got: doc.obj.len() });
    }
    if doc.rows.len() != doc.m {
        return Err(ModelError::DimensionMismatch { expected: doc.m, got: doc.rows.len() });
    }
    let rows = doc
        .rows
        .into_iter()
        .map(|r| (r.idx, unwrap(r.val), r.rhs.0))
        .collect();
    MipInstance::from_le_rows(
        doc.name,
        unwrap(doc.obj),
        rows,
        unwrap(doc.lb),
        unwrap(doc.ub),
        doc.int,
        doc.names.vars,
        doc.names.rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InstanceBuilder, RowSense, INF};

    #[test]
    fn infinities_are_strings() {
        let mut b = InstanceBuilder::new();
        let x = b.add_var("x", 0.1, -INF, INF, false);
        b.add_row("r", vec![(x, 1.0 / 3.0)], RowSense::Le, 1.0);
        let inst = b.build().unwrap();
        let mut buf = Vec::new();
        write_json(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"-inf\"") && text.contains("\"inf\""));
        assert_eq!(read_json(&buf[..]).unwrap(), inst);
    }

    #[test]
    fn row_count_checked() {
        let text = r#"{"n":1,"m":2,"obj":[0],"rows":[],"lb":[0],"ub":[1],"int":[]}"#;
        assert!(read_json(text.as_bytes()).is_err());
    }
}
