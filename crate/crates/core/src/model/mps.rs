//! MPS reader and writer.
//!
//! Lines are split on whitespace, which covers free-format files and fixed-format
//! files whose names contain no blanks. Integrality comes from `MARKER`
//! `INTORG`/`INTEND` blocks or `BV`/`LI`/`UI` bounds.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use super::{InstanceBuilder, MipInstance, ModelError, RowSense, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

fn err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse { line, msg: msg.into() }
}

fn number(tok: &str, line: usize) -> Result<f64, ModelError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| err(line, format!("non-numeric value {tok:?}")))
}

struct RowDef {
    sense: Option<RowSense>, // None for the objective row
    entries: Vec<(usize, f64)>,
    rhs: f64,
    range: Option<f64>,
}

/// Parses an MPS document into a normalized instance. `OBJSENSE MAX` objectives
/// are negated so the result is always a minimization.
pub fn parse_mps(input: &[u8]) -> Result<MipInstance, ModelError> {
    let text = String::from_utf8_lossy(input);
    let mut section = Section::Start;
    let mut name: Option<String> = None;
    let mut maximize = false;
    let mut obj_row: Option<String> = None;
    let mut row_ids: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<(String, RowDef)> = Vec::new();
    let mut col_ids: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<String> = Vec::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut lower: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();
    let mut integer: Vec<bool> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut obj_seen: HashSet<usize> = HashSet::new();
    let mut in_int_block = false;
    let mut upper_set: Vec<bool> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let next = match toks[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    name = toks.get(1).map(|s| s.to_string());
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        maximize = s.eq_ignore_ascii_case("MAX") || s.eq_ignore_ascii_case("MAXIMIZE");
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(line, format!("unknown section {other:?}"))),
            };
            if next <= section && !(next == Section::ObjSense && section == Section::ObjSense) {
                return Err(err(line, format!("section {} out of order", toks[0])));
            }
            if next > Section::Rows && section < Section::Rows {
                return Err(err(line, "ROWS section missing"));
            }
            section = next;
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::ObjSense => {
                maximize = toks[0].eq_ignore_ascii_case("MAX") || toks[0].eq_ignore_ascii_case("MAXIMIZE");
            }
            Section::Rows => {
                if toks.len() < 2 {
                    return Err(err(line, "expected row type and name"));
                }
                let sense = match toks[0].to_ascii_uppercase().as_str() {
                    "N" => None,
                    "L" => Some(RowSense::Le),
                    "G" => Some(RowSense::Ge),
                    "E" => Some(RowSense::Eq),
                    t => return Err(err(line, format!("unknown row type {t:?}"))),
                };
                let rname = toks[1].to_string();
                if row_ids.contains_key(&rname) {
                    return Err(err(line, format!("duplicate row {rname:?}")));
                }
                if sense.is_none() {
                    if obj_row.is_none() {
                        obj_row = Some(rname.clone());
                    } else {
                        // secondary free rows are dropped
                        continue;
                    }
                }
                row_ids.insert(rname.clone(), rows.len());
                rows.push((
                    rname,
                    RowDef {
                        sense,
                        entries: Vec::new(),
                        rhs: 0.0,
                        range: None,
                    },
                ));
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    match toks[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                        "INTORG" => in_int_block = true,
                        "INTEND" => in_int_block = false,
                        m => return Err(err(line, format!("unknown marker {m:?}"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err(line, "expected column, row, value [, row, value]"));
                }
                let cname = toks[0];
                let j = match col_ids.get(cname) {
                    Some(&j) => j,
                    None => {
                        let j = cols.len();
                        col_ids.insert(cname.to_string(), j);
                        cols.push(cname.to_string());
                        objective.push(0.0);
                        lower.push(0.0);
                        upper.push(INF);
                        upper_set.push(false);
                        integer.push(in_int_block);
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let r = *row_ids
                        .get(pair[0])
                        .ok_or_else(|| err(line, format!("unknown row {:?}", pair[0])))?;
                    let v = number(pair[1], line)?;
                    if rows[r].1.sense.is_none() {
                        if !obj_seen.insert(j) {
                            return Err(err(line, format!("duplicate entry for column {cname:?} in objective")));
                        }
                        objective[j] = v;
                    } else {
                        if !seen.insert((r, j)) {
                            return Err(err(
                                line,
                                format!("duplicate entry for column {cname:?} in row {:?}", pair[0]),
                            ));
                        }
                        rows[r].1.entries.push((j, v));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let body = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                if body.is_empty() {
                    return Err(err(line, "expected row, value pairs"));
                }
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err(line, "expected row, value pairs"));
                    }
                    let r = *row_ids
                        .get(pair[0])
                        .ok_or_else(|| err(line, format!("unknown row {:?}", pair[0])))?;
                    let v = number(pair[1], line)?;
                    let def = &mut rows[r].1;
                    if section == Section::Rhs {
                        // an rhs on the objective row is a constant offset; not modelled
                        if def.sense.is_some() {
                            def.rhs = v;
                        }
                    } else if def.sense.is_some() {
                        def.range = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0].to_ascii_uppercase();
                let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
                let (col, val) = match (toks.len(), needs_value) {
                    (4, _) => (toks[2], Some(toks[3])),
                    (3, true) => (toks[1], Some(toks[2])),
                    (3, false) => (toks[2], None),
                    (2, false) => (toks[1], None),
                    _ => return Err(err(line, "malformed bound line")),
                };
                let j = *col_ids
                    .get(col)
                    .ok_or_else(|| err(line, format!("unknown column {col:?}")))?;
                let v = val.map(|t| number(t, line)).transpose()?;
                let need = |v: Option<f64>| v.ok_or_else(|| err(line, format!("bound {kind} needs a value")));
                match kind.as_str() {
                    "UP" => {
                        let v = need(v)?;
                        if v < 0.0 && lower[j] == 0.0 {
                            lower[j] = -INF;
                        }
                        upper[j] = v;
                        upper_set[j] = true;
                    }
                    "LO" => lower[j] = need(v)?,
                    "FX" => {
                        let v = need(v)?;
                        lower[j] = v;
                        upper[j] = v;
                        upper_set[j] = true;
                    }
                    "FR" => {
                        lower[j] = -INF;
                        upper[j] = INF;
                    }
                    "MI" => lower[j] = -INF,
                    "PL" => upper[j] = INF,
                    "BV" => {
                        integer[j] = true;
                        lower[j] = 0.0;
                        upper[j] = 1.0;
                        upper_set[j] = true;
                    }
                    "LI" => {
                        integer[j] = true;
                        lower[j] = need(v)?;
                    }
                    "UI" => {
                        integer[j] = true;
                        upper[j] = need(v)?;
                        upper_set[j] = true;
                    }
                    other => return Err(err(line, format!("unknown bound type {other:?}"))),
                }
            }
            Section::Name => {}
            Section::Start | Section::End => return Err(err(line, "data outside of any section")),
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing ENDATA"));
    }

    let mut b = InstanceBuilder::new();
    if let Some(n) = name {
        b = b.with_name(n);
    }
    for j in 0..cols.len() {
        let c = if maximize { -objective[j] } else { objective[j] };
        b.add_var(cols[j].clone(), c, lower[j], upper[j], integer[j]);
    }
    for (rname, def) in rows {
        let Some(sense) = def.sense else { continue };
        match def.range {
            Some(r) => b.add_ranged_row(rname, def.entries, sense, def.rhs, r),
            None => b.add_row(rname, def.entries, sense, def.rhs),
        }
    }
    b.build()
}

/// Writes `inst` as free-format MPS with all rows of type `L`.
pub fn write_mps<W: Write>(inst: &MipInstance, mut out: W) -> Result<(), ModelError> {
    writeln!(out, "NAME {}", inst.name().unwrap_or("fixprop"))?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N obj")?;
    for i in 0..inst.num_rows() {
        writeln!(out, " L {}", inst.row_name(i))?;
    }
    writeln!(out, "COLUMNS")?;
    let mut in_int = false;
    for j in 0..inst.num_vars() {
        if inst.is_integer(j) != in_int {
            in_int = inst.is_integer(j);
            let tag = if in_int { "INTORG" } else { "INTEND" };
            writeln!(out, " M{j} 'MARKER' '{tag}'")?;
        }
        let name = inst.var_name(j);
        let c = inst.objective()[j];
        let (rows, vals) = inst.column(j);
        if c != 0.0 || rows.is_empty() {
            writeln!(out, " {name} obj {c:?}")?;
        }
        for (&i, a) in rows.iter().zip(vals) {
            writeln!(out, " {name} {} {a:?}", inst.row_name(i))?;
        }
    }
    if in_int {
        writeln!(out, " Mend 'MARKER' 'INTEND'")?;
    }
    writeln!(out, "RHS")?;
    for i in 0..inst.num_rows() {
        let b = inst.rhs()[i];
        if b != 0.0 {
            writeln!(out, " RHS {} {b:?}", inst.row_name(i))?;
        }
    }
    writeln!(out, "BOUNDS")?;
    for j in 0..inst.num_vars() {
        let name = inst.var_name(j);
        let (l, u) = (inst.lower()[j], inst.upper()[j]);
        if l == u {
            writeln!(out, " FX BND {name} {l:?}")?;
            continue;
        }
        if l == -INF && u == INF {
            writeln!(out, " FR BND {name}")?;
            continue;
        }
        if l == -INF {
            writeln!(out, " MI BND {name}")?;
        } else if l != 0.0 {
            writeln!(out, " LO BND {name} {l:?}")?;
        }
        if u != INF {
            writeln!(out, " UP BND {name} {u:?}")?;
        } else if inst.is_integer(j) {
            writeln!(out, " PL BND {name}")?;
        }
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "NAME small
ROWS
 N obj
 L c1
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x         obj       1.0        c1        1.0
    MARKER                 'MARKER'                 'INTEND'
    y         c1        1.0
RHS
    RHS       c1        1.0
BOUNDS
 UP BND       x         1
ENDATA
";

    #[test]
    fn minimal_binary_instance() {
        let inst = parse_mps(SMALL.as_bytes()).unwrap();
        assert_eq!(inst.num_vars(), 2);
        assert_eq!(inst.num_rows(), 1);
        assert_eq!(inst.integer_set(), &[0]);
        assert_eq!(inst.objective(), &[1.0, 0.0]);
        assert_eq!((inst.lower()[0], inst.upper()[0]), (0.0, 1.0));
        assert_eq!(inst.upper()[1], INF);
    }

    #[test]
    fn equality_row_is_split() {
        let text = "NAME eq\nROWS\n N obj\n E a\nCOLUMNS\n x a 1\nRHS\n RHS a 2\nENDATA\n";
        let inst = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.num_rows(), 2);
        assert_eq!((inst.row(0).1[0], inst.rhs()[0]), (1.0, 2.0));
        assert_eq!((inst.row(1).1[0], inst.rhs()[1]), (-1.0, -2.0));
    }

    #[test]
    fn ge_row_is_negated_and_ranges_split() {
        let text = "NAME g\nROWS\n N obj\n G g\n L r\nCOLUMNS\n x g 2 r 1\nRHS\n RHS g 1 r 4\nRANGES\n RNG r 3\nENDATA\n";
        let inst = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.num_rows(), 3);
        assert_eq!((inst.row(0).1[0], inst.rhs()[0]), (-2.0, -1.0));
        assert_eq!((inst.row(1).1[0], inst.rhs()[1]), (1.0, 4.0));
        assert_eq!((inst.row(2).1[0], inst.rhs()[2]), (-1.0, -1.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_order = "NAME x\nCOLUMNS\n x c 1\nROWS\n N obj\nENDATA\n";
        assert!(matches!(parse_mps(bad_order.as_bytes()), Err(ModelError::Parse { line: 2, .. })));

        let unknown_row = "NAME x\nROWS\n N obj\nCOLUMNS\n x c 1\nENDATA\n";
        assert!(matches!(parse_mps(unknown_row.as_bytes()), Err(ModelError::Parse { line: 5, .. })));

        let dup = "NAME x\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\n x c 2\nENDATA\n";
        assert!(matches!(parse_mps(dup.as_bytes()), Err(ModelError::Parse { line: 7, .. })));

        let nan = "NAME x\nROWS\n N obj\n L c\nCOLUMNS\n x c abc\nENDATA\n";
        assert!(matches!(parse_mps(nan.as_bytes()), Err(ModelError::Parse { line: 6, .. })));
    }

    #[test]
    fn bound_types() {
        let text = "NAME b\nROWS\n N obj\nCOLUMNS\n a obj 1\n b obj 1\n c obj 1\n d obj 1\nRHS\nBOUNDS\n BV BND a\n FR BND b\n MI BND c\n UI BND d 7\nENDATA\n";
        let inst = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.integer_set(), &[0, 3]);
        assert_eq!((inst.lower()[0], inst.upper()[0]), (0.0, 1.0));
        assert_eq!((inst.lower()[1], inst.upper()[1]), (-INF, INF));
        assert_eq!((inst.lower()[2], inst.upper()[2]), (-INF, INF));
        assert_eq!((inst.lower()[3], inst.upper()[3]), (0.0, 7.0));
    }

    #[test]
    fn maximize_is_negated() {
        let text = "NAME m\nOBJSENSE\n    MAX\nROWS\n N obj\nCOLUMNS\n x obj 3\nENDATA\n";
        let inst = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.objective(), &[-3.0]);
    }

    #[test]
    fn write_then_parse() {
        let inst = parse_mps(SMALL.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_mps(&inst, &mut buf).unwrap();
        let back = parse_mps(&buf).unwrap();
        assert_eq!(back.objective(), inst.objective());
        assert_eq!(back.lower(), inst.lower());
        assert_eq!(back.upper(), inst.upper());
        assert_eq!(back.integer_set(), inst.integer_set());
        assert_eq!(back.row(0), inst.row(0));
    }
}
