//! The `.rules` text format.
//!
//! ```text
//! # comment
//! system: toy
//! props: p1 p2 p3 p4
//! p2 => p1
//! r2: p3 p4 => p1
//! 13-1: [s_16, s_11, s_2, s_0]
//! ```
//!
//! `props:` lines declare names in index order (several lines append). A
//! rule line may carry a `label:` prefix. Commas are optional separators.
//! Rendering writes the optional `system:` line, one `props:` line, the
//! symmetric rules and then the directed rules, each in stored order, so
//! `parse_system(&render_system(s)) == s`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::system::{is_valid_name, DeductionSystem, Diagnostic, DirectedRule, PropId, SymmetricRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid system: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> DslError {
    DslError::Parse { line, column, message: message.into() }
}

/// Splits on whitespace and commas, keeping 1-based columns.
fn words(s: &str, base_col: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() || c == ',' {
            if let Some(st) = start.take() {
                out.push((base_col + st, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((base_col + st, &s[st..]));
    }
    out
}

fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}

pub fn parse_system(text: &str) -> Result<DeductionSystem, DslError> {
    let mut system_name = None;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, PropId> = HashMap::new();
    let mut symmetric = Vec::new();
    let mut directed = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let body = content.trim_start();

        if let Some(rest) = body.strip_prefix("props:") {
            for (col, w) in words(rest, indent + "props:".len() + 1) {
                if !is_valid_name(w) {
                    return Err(parse_err(line_no, col, format!("invalid proposition name `{w}`")));
                }
                if index.contains_key(w) {
                    return Err(parse_err(line_no, col, format!("duplicate proposition `{w}`")));
                }
                index.insert(w.to_string(), PropId(names.len()));
                names.push(w.to_string());
            }
            continue;
        }
        if let Some(rest) = body.strip_prefix("system:") {
            let n = rest.trim();
            if n.is_empty() {
                return Err(parse_err(line_no, indent + 1, "empty system name"));
            }
            system_name = Some(n.to_string());
            continue;
        }

        // optional `label:` prefix
        let (label, rule_text, rule_col) = match body.find(':') {
            Some(i) if is_label(body[..i].trim_end()) => {
                (Some(body[..i].trim_end().to_string()), &body[i + 1..], indent + i + 2)
            }
            Some(i) => {
                return Err(parse_err(line_no, indent + i + 1, "malformed rule label"));
            }
            None => (None, body, indent + 1),
        };

        let lookup = |col: usize, w: &str| -> Result<PropId, DslError> {
            index
                .get(w)
                .copied()
                .ok_or_else(|| parse_err(line_no, col, format!("undeclared proposition `{w}`")))
        };

        let trimmed = rule_text.trim();
        let lead = rule_text.len() - rule_text.trim_start().len();
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(parse_err(line_no, rule_col + lead + trimmed.len(), "expected `]`"));
            };
            let mut members = Vec::new();
            for (col, w) in words(inner, rule_col + lead + 1) {
                members.push(lookup(col, w)?);
            }
            if members.is_empty() {
                return Err(parse_err(line_no, rule_col + lead, "empty symmetric rule"));
            }
            symmetric.push(SymmetricRule::new(members).with_label(label));
        } else if let Some(arrow) = rule_text.find("=>") {
            let mut premises = Vec::new();
            for (col, w) in words(&rule_text[..arrow], rule_col) {
                premises.push(lookup(col, w)?);
            }
            let concl = words(&rule_text[arrow + 2..], rule_col + arrow + 2);
            let conclusion = match concl.as_slice() {
                [(col, w)] => lookup(*col, w)?,
                [] => return Err(parse_err(line_no, rule_col + arrow + 2, "missing conclusion")),
                [_, (col, _), ..] => {
                    return Err(parse_err(line_no, *col, "exactly one conclusion expected"))
                }
            };
            directed.push(DirectedRule::new(premises, conclusion).with_label(label));
        } else {
            return Err(parse_err(line_no, rule_col + lead, "expected `[..]` or `=>` rule"));
        }
    }

    let system = DeductionSystem::from_parts(system_name, names, symmetric, directed);
    let diagnostics = system.validate();
    if diagnostics.is_empty() {
        Ok(system)
    } else {
        Err(DslError::Validation(diagnostics))
    }
}

pub fn render_system(system: &DeductionSystem) -> String {
    let mut out = String::new();
    if let Some(name) = system.name() {
        let _ = writeln!(out, "system: {name}");
    }
    out.push_str("props:");
    for name in system.names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for rule in system.symmetric_rules() {
        if let Some(label) = rule.label() {
            let _ = write!(out, "{label}: ");
        }
        let members: Vec<&str> = rule.members().iter().map(|&m| system.prop_name(m)).collect();
        let _ = writeln!(out, "[{}]", members.join(", "));
    }
    for rule in system.directed_rules() {
        if let Some(label) = rule.label() {
            let _ = write!(out, "{label}: ");
        }
        out.push_str(&system.display_rule(rule));
        out.push('\n');
    }
    out
}
