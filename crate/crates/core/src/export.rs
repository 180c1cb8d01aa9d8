//! LP-format text for external MILP solvers, and import of their solutions.
//!
//! ```text
//! Maximize
//!  obj: x0_c4 + x1_c4 + x2_c4 + x3_c4
//! Subject To
//!  c0: x0_c0 + x1_c0 + x2_c0 + x3_c0 <= 1
//!  ...
//! Binary
//!  x0_c0 x1_c0 ...
//! End
//! ```
//!
//! Constraints are named `c{ordinal}` in emission order. Long rows are
//! wrapped before a `+`/`-` sign onto indented continuation lines.

use std::collections::BTreeMap;

use itertools::Itertools;
use thiserror::Error;

use crate::milp::{evaluate, Constraint, MilpError, MilpInstance, Relation, Sense, Solution, Stats, Status, VarId, VarKind, Violation};

const WRAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("LP line {line}: {message}")]
    Lp { line: usize, message: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable {name} has non-binary value {value}")]
    NonBinaryValue { name: String, value: String },
    #[error("assignment has no value for {0}")]
    IncompleteAssignment(String),
    #[error("imported assignment violates {} constraint(s): {}", .0.len(), .0.iter().take(5).map(ToString::to_string).join("; "))]
    InfeasibleImport(Vec<Violation>),
    #[error("malformed solution: {0}")]
    Malformed(String),
}

impl From<MilpError> for ExportError {
    fn from(e: MilpError) -> Self {
        match e {
            MilpError::UnknownVariable(n) => ExportError::UnknownVariable(n),
            MilpError::IncompleteAssignment(n) => ExportError::IncompleteAssignment(n),
            MilpError::NonBinaryValue { name, value } => ExportError::NonBinaryValue { name, value },
            MilpError::MalformedInstance(m) => ExportError::Malformed(m),
        }
    }
}

fn push_wrapped(out: &mut String, head: &str, body: &str) {
    let mut line = String::from(head);
    // split before every " + " / " - " so continuation lines start with a sign
    let mut pieces = Vec::new();
    let mut last = 0;
    let bytes = body.as_bytes();
    for i in 0..bytes.len() {
        if i + 2 < bytes.len() && bytes[i] == b' ' && (bytes[i + 1] == b'+' || bytes[i + 1] == b'-') && bytes[i + 2] == b' ' {
            pieces.push(&body[last..i]);
            last = i + 1;
        }
    }
    pieces.push(&body[last..]);
    for (i, p) in pieces.iter().enumerate() {
        if i > 0 && line.len() + 1 + p.len() > WRAP {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
            line.push_str(p);
        } else {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(p);
        }
    }
    out.push_str(&line);
    out.push('\n');
}

pub fn write_lp(instance: &MilpInstance) -> String {
    let mut out = String::new();
    let obj = instance.objective();
    out.push_str(match obj.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    if obj.terms.is_empty() {
        out.push_str(" obj:\n");
    } else {
        push_wrapped(&mut out, " obj: ", &instance.format_terms(&obj.terms));
    }
    out.push_str("Subject To\n");
    for (i, c) in instance.constraints().iter().enumerate() {
        push_wrapped(&mut out, &format!(" c{i}: "), &instance.format_constraint(c));
    }
    let (binary, continuous): (Vec<VarId>, Vec<VarId>) = (0..instance.num_vars())
        .map(VarId)
        .partition(|&v| instance.var_kind(v) == VarKind::Binary);
    if !continuous.is_empty() {
        out.push_str("Bounds\n");
        for v in continuous {
            out.push_str(&format!(" {} free\n", instance.var_name(v)));
        }
    }
    if !binary.is_empty() {
        out.push_str("Binary\n");
        let names: Vec<&str> = binary.iter().map(|&v| instance.var_name(v)).collect();
        let mut line = String::new();
        for n in names {
            if !line.is_empty() && line.len() + 1 + n.len() > WRAP {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(n);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Num(String),
    Plus,
    Minus,
    Colon,
    Rel(Relation),
}

fn lp_err(line: usize, message: impl Into<String>) -> ExportError {
    ExportError::Lp { line, message: message.into() }
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, ExportError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\\' => break,
            c if c.is_whitespace() => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                let (rel, len) = match two.as_str() {
                    "<=" | "=<" => (Relation::Le, 2),
                    ">=" | "=>" => (Relation::Ge, 2),
                    _ => match c {
                        '<' => (Relation::Le, 1),
                        '>' => (Relation::Ge, 1),
                        _ => (Relation::Eq, 1),
                    },
                };
                toks.push(Tok::Rel(rel));
                i += len;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                    i += 1;
                }
                toks.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || "_!\"#$%&()/,;?@'`{}|~".contains(c) => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !":+-<>=\\".contains(chars[i]) {
                    i += 1;
                }
                toks.push(Tok::Name(chars[start..i].iter().collect()));
            }
            _ => return Err(lp_err(lineno, format!("unexpected character `{c}`"))),
        }
    }
    Ok(toks)
}

fn parse_int(s: &str, line: usize) -> Result<i64, ExportError> {
    if let Ok(v) = s.parse::<i64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(f) if f.fract() == 0.0 && f.abs() < 9e15 => Ok(f as i64),
        Ok(_) => Err(lp_err(line, format!("non-integer coefficient {s}"))),
        Err(_) => Err(lp_err(line, format!("bad number `{s}`"))),
    }
}

type RawTerms = Vec<(String, i64)>;

/// Parses `[sign] [coef] name ...` up to a relation or the end.
fn parse_terms(toks: &[(Tok, usize)], pos: &mut usize) -> Result<RawTerms, ExportError> {
    let mut terms = Vec::new();
    while *pos < toks.len() {
        let mut sign = 1;
        let mut line = toks[*pos].1;
        loop {
            match toks.get(*pos) {
                Some((Tok::Plus, _)) => *pos += 1,
                Some((Tok::Minus, l)) => {
                    sign = -sign;
                    line = *l;
                    *pos += 1;
                }
                _ => break,
            }
        }
        let coef = match toks.get(*pos) {
            Some((Tok::Num(s), l)) => {
                *pos += 1;
                line = *l;
                Some(parse_int(s, *l)?)
            }
            _ => None,
        };
        match toks.get(*pos) {
            Some((Tok::Name(n), _)) => {
                *pos += 1;
                terms.push((n.clone(), sign * coef.unwrap_or(1)));
            }
            // a bare `0` stands for an empty sum
            Some((Tok::Rel(_), _)) | None if sign == 1 && matches!(coef, None | Some(0)) => break,
            other => {
                let l = other.map_or(line, |t| t.1);
                return Err(lp_err(l, "expected a variable name"));
            }
        }
        if matches!(toks.get(*pos), Some((Tok::Rel(_), _))) {
            break;
        }
    }
    Ok(terms)
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binary,
    Done,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum" | "min" => {
            Some(Section::Objective)
        }
        "subject to" | "such that" | "st" | "s.t." | "st." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::Done),
        _ => None,
    }
}

/// Reads LP text in the subset written by [`write_lp`]: integer
/// coefficients, binaries, and `free` bounds for continuous variables.
pub fn read_lp(text: &str) -> Result<MilpInstance, ExportError> {
    let mut section = Section::None;
    let mut sense = Sense::Maximize;
    let mut obj_toks: Vec<(Tok, usize)> = Vec::new();
    let mut con_toks: Vec<(Tok, usize)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut continuous: Vec<String> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('\\') {
            continue;
        }
        if let Some(s) = section_header(line) {
            if s == Section::Objective {
                sense = if line.trim().to_ascii_lowercase().starts_with("max") { Sense::Maximize } else { Sense::Minimize };
            }
            section = s;
            continue;
        }
        match section {
            Section::None => return Err(lp_err(lineno, "content before the objective section")),
            Section::Done => return Err(lp_err(lineno, "content after End")),
            Section::Objective => obj_toks.extend(tokenize(line, lineno)?.into_iter().map(|t| (t, lineno))),
            Section::Constraints => con_toks.extend(tokenize(line, lineno)?.into_iter().map(|t| (t, lineno))),
            Section::Binary => binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::Bounds => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                match parts.as_slice() {
                    [name, free] if free.eq_ignore_ascii_case("free") => continuous.push(name.to_string()),
                    _ => return Err(lp_err(lineno, "only `name free` bounds are supported")),
                }
            }
        }
    }
    if section != Section::Done {
        return Err(lp_err(text.lines().count(), "missing End"));
    }

    let mut m = MilpInstance::new();
    for b in &binaries {
        m.add_var(b.clone(), VarKind::Binary);
    }
    for c in &continuous {
        m.add_var(c.clone(), VarKind::Continuous);
    }
    let lookup = |m: &MilpInstance, name: &str, line: usize| {
        m.find_var(name).ok_or_else(|| lp_err(line, format!("undeclared variable `{name}`")))
    };

    // objective: optional `name:` then terms
    let mut pos = 0;
    if obj_toks.len() >= 2 && matches!(obj_toks[1].0, Tok::Colon) {
        pos = 2;
    }
    let raw = parse_terms(&obj_toks, &mut pos)?;
    if pos < obj_toks.len() {
        return Err(lp_err(obj_toks[pos].1, "unexpected token in objective"));
    }
    let line = obj_toks.first().map_or(1, |t| t.1);
    let terms = raw
        .iter()
        .map(|(n, c)| Ok((lookup(&m, n, line)?, *c)))
        .collect::<Result<Vec<_>, ExportError>>()?;
    m.set_objective(sense, terms);

    let mut pos = 0;
    while pos < con_toks.len() {
        let line = con_toks[pos].1;
        if pos + 1 < con_toks.len() && matches!(con_toks[pos + 1].0, Tok::Colon) {
            pos += 2;
        }
        let raw = parse_terms(&con_toks, &mut pos)?;
        let rel = match con_toks.get(pos) {
            Some((Tok::Rel(r), _)) => *r,
            _ => return Err(lp_err(line, "constraint without relation")),
        };
        pos += 1;
        let mut sign = 1;
        if let Some((Tok::Minus, _)) = con_toks.get(pos) {
            sign = -1;
            pos += 1;
        } else if let Some((Tok::Plus, _)) = con_toks.get(pos) {
            pos += 1;
        }
        let rhs = match con_toks.get(pos) {
            Some((Tok::Num(s), l)) => sign * parse_int(s, *l)?,
            _ => return Err(lp_err(line, "constraint without right-hand side")),
        };
        pos += 1;
        let terms = raw
            .iter()
            .map(|(n, c)| Ok((lookup(&m, n, line)?, *c)))
            .collect::<Result<Vec<_>, ExportError>>()?;
        m.add_constraint(Constraint::new(terms, rel, rhs));
    }
    Ok(m)
}

fn to_binary(name: &str, v: f64) -> Result<i64, ExportError> {
    if (v - 0.0).abs() <= 1e-6 {
        Ok(0)
    } else if (v - 1.0).abs() <= 1e-6 {
        Ok(1)
    } else {
        Err(ExportError::NonBinaryValue { name: name.to_string(), value: v.to_string() })
    }
}

fn json_assignment(text: &str) -> Result<BTreeMap<String, i64>, ExportError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ExportError::Malformed(e.to_string()))?;
    let map = match value.get("assignment") {
        Some(inner) => inner,
        None => &value,
    };
    let obj = map
        .as_object()
        .ok_or_else(|| ExportError::Malformed("expected a JSON object of name -> value".into()))?;
    obj.iter()
        .map(|(k, v)| {
            let f = match v {
                serde_json::Value::Number(n) => n.as_f64().unwrap_or(f64::NAN),
                serde_json::Value::Bool(b) => f64::from(u8::from(*b)),
                other => return Err(ExportError::NonBinaryValue { name: k.clone(), value: other.to_string() }),
            };
            Ok((k.clone(), to_binary(k, f)?))
        })
        .collect()
}

fn listing_assignment(text: &str) -> Result<BTreeMap<String, i64>, ExportError> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = parts.as_slice() else {
            return Err(ExportError::Malformed(format!("expected `name value`, got `{line}`")));
        };
        let f: f64 = value
            .parse()
            .map_err(|_| ExportError::NonBinaryValue { name: name.to_string(), value: value.to_string() })?;
        out.insert(name.to_string(), to_binary(name, f)?);
    }
    Ok(out)
}

/// Imports an external assignment, either JSON (`{"name": 0|1}` or a
/// solution object with an `assignment` field) or `name value` lines.
/// Values within 1e-6 of 0 or 1 are accepted. The objective is recomputed
/// and the assignment must satisfy every constraint.
pub fn read_solution(text: &str, instance: &MilpInstance) -> Result<Solution, ExportError> {
    let assignment = if text.trim_start().starts_with('{') {
        json_assignment(text)?
    } else {
        listing_assignment(text)?
    };
    let values = instance.values_from_names(&assignment)?;
    let eval = evaluate(instance, &values)?;
    if !eval.is_feasible() {
        return Err(ExportError::InfeasibleImport(eval.violations));
    }
    Ok(Solution::from_values(instance, Status::Feasible, &values, Stats::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ciphers;
    use crate::encoder::{encode, state_var, EncodeConfig};

    #[test]
    fn single_state_row() {
        let mut m = MilpInstance::new();
        let x = m.add_binary("x0_c1");
        let mut terms = vec![(x, 3)];
        for j in 1..=3 {
            terms.push((m.add_binary(format!("l0_p{j}_c0")), -1));
        }
        m.add_constraint(Constraint::new(terms, Relation::Ge, 0));
        let lp = write_lp(&m);
        assert!(lp.contains("\n c0: 3 x0_c1 - l0_p1_c0 - l0_p2_c0 - l0_p3_c0 >= 0\n"), "{lp}");
        assert_eq!(read_lp(&lp).unwrap(), m);
    }

    #[test]
    fn empty_instance() {
        let lp = write_lp(&MilpInstance::new());
        assert_eq!(lp, "Maximize\n obj:\nSubject To\nEnd\n");
        assert_eq!(read_lp(&lp).unwrap(), MilpInstance::new());
    }

    #[test]
    fn toy_round_trip_and_wrapping() {
        let m = encode(&ciphers::toy(), &EncodeConfig::new(4, 1)).unwrap();
        let lp = write_lp(&m);
        assert_eq!(lp, write_lp(&m));
        assert!(lp.starts_with("Maximize\n obj: x0_c4 + x1_c4 + x2_c4 + x3_c4\n"));
        assert_eq!(read_lp(&lp).unwrap(), m);

        let s = encode(&ciphers::build_snow2(13), &EncodeConfig::new(2, 9)).unwrap();
        let lp = write_lp(&s);
        assert!(lp.lines().all(|l| l.len() <= WRAP + 40));
        assert_eq!(read_lp(&lp).unwrap(), s);
    }

    #[test]
    fn lp_reader_errors() {
        assert!(matches!(read_lp("Maximize\n obj: y\nSubject To\nEnd\n"), Err(ExportError::Lp { .. })));
        assert!(read_lp("Maximize\n obj: 1.5 x\nBinary\n x\nEnd\n").is_err());
        assert!(read_lp("Maximize\n obj: x\nBinary\n x\n").is_err());
    }

    fn toy_solution_text(m: &MilpInstance, guess_p2: bool) -> String {
        // p2 known from the start; p1 after one copy, p4 after two, p3 after three
        let sol = crate::milp::solve(m, &crate::milp::Limits::unlimited()).unwrap();
        let mut lines = String::from("# hand-checked toy assignment\n");
        for n in m.var_names() {
            let mut v = sol.value(n).unwrap();
            if !guess_p2 && n == &state_var(1, 0) {
                v = 0;
            }
            lines.push_str(&format!("{n} {v}\n"));
        }
        lines
    }

    #[test]
    fn toy_listing_import() {
        let m = encode(&ciphers::toy(), &EncodeConfig::new(4, 1)).unwrap();
        let sol = read_solution(&toy_solution_text(&m, true), &m).unwrap();
        assert_eq!(sol.objective, Some(4));
        assert_eq!(sol.value("x1_c0"), Some(1));
        assert!(matches!(read_solution(&toy_solution_text(&m, false), &m), Err(ExportError::InfeasibleImport(_))));
    }

    #[test]
    fn json_import_forms() {
        let mut m = MilpInstance::new();
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.add_constraint(Constraint::new(vec![(a, 1), (b, 1)], Relation::Le, 1));
        m.set_objective(Sense::Maximize, vec![(a, 1), (b, 2)]);
        let s = read_solution(r#"{"a": 0, "b": 1.0000001}"#, &m).unwrap();
        assert_eq!(s.objective, Some(2));
        let s2 = read_solution(r#"{"status": "optimal", "objective": 99, "assignment": {"a": 0, "b": 1}}"#, &m).unwrap();
        assert_eq!(s2.objective, Some(2));
        assert!(matches!(read_solution(r#"{"a": 2, "b": 0}"#, &m), Err(ExportError::NonBinaryValue { .. })));
        assert!(matches!(read_solution(r#"{"a": 0, "b": 0, "z": 1}"#, &m), Err(ExportError::UnknownVariable(_))));
        assert!(matches!(read_solution(r#"{"a": 0}"#, &m), Err(ExportError::IncompleteAssignment(_))));
        assert!(matches!(read_solution("a 1\nb 1\n", &m), Err(ExportError::InfeasibleImport(v)) if v[0].index == 0));
    }

    mod props {
        use super::*;
        use crate::encoder::{encode, EncodeConfig, EncodeMode};
        use crate::random::random_system;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        proptest! {
            #[test]
            fn lp_round_trip(seed: u64, n in 2usize..8, m in 0usize..12, nu in 1usize..4, plain: bool, min: bool) {
                let s = random_system(&mut ChaCha8Rng::seed_from_u64(seed), n, m);
                let mode = if plain { EncodeMode::Plain } else { EncodeMode::Compact };
                let cfg = if min { EncodeConfig::min_guesses(nu) } else { EncodeConfig::new(nu, n / 2) };
                let inst = encode(&s, &cfg.with_mode(mode)).unwrap();
                let text = write_lp(&inst);
                let back = read_lp(&text).unwrap();
                prop_assert_eq!(write_lp(&back), text);
                prop_assert_eq!(back.var_names(), inst.var_names());
                prop_assert_eq!(back.constraints(), inst.constraints());
                prop_assert_eq!(back.objective(), inst.objective());
            }
        }
    }
}
