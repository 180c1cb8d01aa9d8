//! Ground truth that does not go through the integer program: rule closure,
//! exhaustive minimum search and deduction traces.

use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::encoder::{state_var, EncodeConfig};
use crate::milp::Solution;
use crate::preprocess::expand_rules;
use crate::system::{DeductionSystem, PropId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("solution marks {name} known at copy {copy} but closure only reaches it {reached}")]
    TraceMismatch { name: String, copy: usize, reached: String },
    #[error("solution carries no assignment")]
    MissingAssignment,
    #[error("trace step {step}: {message}")]
    InvalidStep { step: usize, message: String },
}

/// One rule application: `rule` indexes the expanded directed rules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub round: usize,
    pub rule: usize,
    pub label: Option<String>,
    pub premises: Vec<PropId>,
    pub deduced: PropId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureResult {
    pub known: Vec<PropId>,
    pub trace: Vec<TraceStep>,
    /// Productive sweeps; re-encoding with this many copies suffices.
    pub rounds: usize,
    /// Sweep in which each proposition became known (0 for guesses).
    #[serde(skip)]
    pub round_of: Vec<Option<usize>>,
}

impl ClosureResult {
    pub fn knows(&self, p: PropId) -> bool {
        self.round_of[p.0].is_some()
    }

    pub fn is_complete(&self) -> bool {
        self.round_of.iter().all(Option::is_some)
    }

    pub fn known_after(&self, round: usize) -> Vec<PropId> {
        (0..self.round_of.len())
            .filter(|&i| self.round_of[i].is_some_and(|r| r <= round))
            .map(PropId)
            .collect()
    }
}

/// Looks up guess names, accepting them with or without underscores.
pub fn resolve_guess<S: AsRef<str>>(system: &DeductionSystem, names: &[S]) -> Result<Vec<PropId>, OracleError> {
    names
        .iter()
        .map(|n| {
            let n = n.as_ref().trim();
            system.resolve(n).ok_or_else(|| OracleError::UnknownProposition(n.to_string()))
        })
        .collect()
}

/// Least fixpoint from `guess`, in sweeps: a sweep fires every rule whose
/// premises were known when the sweep began, lowest rule first per
/// conclusion.
pub fn closure(system: &DeductionSystem, guess: &[PropId]) -> Result<ClosureResult, OracleError> {
    let expanded = expand_rules(system);
    closure_expanded(&expanded, guess)
}

fn closure_expanded(expanded: &DeductionSystem, guess: &[PropId]) -> Result<ClosureResult, OracleError> {
    let n = expanded.len();
    let mut round_of: Vec<Option<usize>> = vec![None; n];
    for &g in guess {
        if g.0 >= n {
            return Err(OracleError::UnknownProposition(format!("#{}", g.0)));
        }
        round_of[g.0] = Some(0);
    }
    let rules = expanded.directed_rules();
    let mut trace = Vec::new();
    let mut round = 0;
    loop {
        let known_before = round_of.clone();
        let mut steps = Vec::new();
        for (id, r) in rules.iter().enumerate() {
            let c = r.conclusion().0;
            if round_of[c].is_some() {
                continue;
            }
            if r.premises().iter().all(|p| known_before[p.0].is_some()) {
                round_of[c] = Some(round + 1);
                steps.push((id, r));
            }
        }
        if steps.is_empty() {
            break;
        }
        round += 1;
        trace.extend(steps.into_iter().map(|(id, r)| TraceStep {
            round,
            rule: id,
            label: r.label().map(str::to_string),
            premises: r.premises().to_vec(),
            deduced: r.conclusion(),
        }));
    }
    let known = (0..n).filter(|&i| round_of[i].is_some()).map(PropId).collect();
    Ok(ClosureResult { known, trace, rounds: round, round_of })
}

/// Replays `trace` from `guess`, checking that every step is a rule of the
/// system applied to known premises. Returns the resulting known set.
pub fn replay(system: &DeductionSystem, guess: &[PropId], trace: &[TraceStep]) -> Result<Vec<PropId>, OracleError> {
    let expanded = expand_rules(system);
    let mut known = vec![false; expanded.len()];
    for &g in guess {
        known[g.0] = true;
    }
    for (i, s) in trace.iter().enumerate() {
        let bad = |m: String| OracleError::InvalidStep { step: i + 1, message: m };
        let rule = expanded.directed_rules().get(s.rule).ok_or_else(|| bad("no such rule".into()))?;
        if rule.premises() != s.premises.as_slice() || rule.conclusion() != s.deduced {
            return Err(bad("step does not match its rule".into()));
        }
        if let Some(p) = s.premises.iter().find(|p| !known[p.0]) {
            return Err(bad(format!("premise {} not yet known", expanded.prop_name(*p))));
        }
        if known[s.deduced.0] {
            return Err(bad(format!("{} already known", expanded.prop_name(s.deduced))));
        }
        known[s.deduced.0] = true;
    }
    Ok((0..known.len()).filter(|&i| known[i]).map(PropId).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BruteForce {
    Found { k_min: usize, witness: Vec<PropId> },
    NoSolutionWithin(usize),
}

type CompleteCheck<'a> = Box<dyn Fn(&[usize]) -> bool + 'a>;

/// Tries every guess set by increasing size, lexicographically within a
/// size, and returns the first whose closure is everything.
pub fn brute_force_min(system: &DeductionSystem, max_k: usize) -> BruteForce {
    let expanded = expand_rules(system);
    let n = expanded.len();
    let max_k = max_k.min(n);
    let complete: CompleteCheck = if n <= 64 {
        let rules: Vec<(u64, u64)> = expanded
            .directed_rules()
            .iter()
            .map(|r| (r.premises().iter().fold(0u64, |m, p| m | 1 << p.0), 1u64 << r.conclusion().0))
            .collect();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Box::new(move |set: &[usize]| {
            let mut known = set.iter().fold(0u64, |m, &i| m | 1 << i);
            loop {
                let before = known;
                for &(pre, c) in &rules {
                    if known & pre == pre {
                        known |= c;
                    }
                }
                if known == before {
                    return known == all;
                }
            }
        })
    } else {
        Box::new(|set: &[usize]| {
            let guess: Vec<PropId> = set.iter().map(|&i| PropId(i)).collect();
            closure_expanded(&expanded, &guess).map(|c| c.is_complete()).unwrap_or(false)
        })
    };
    for k in 0..=max_k {
        if let Some(w) = (0..n).combinations(k).find(|set| complete(set)) {
            return BruteForce::Found { k_min: k, witness: w.into_iter().map(PropId).collect() };
        }
    }
    BruteForce::NoSolutionWithin(max_k)
}

/// Guess set encoded in the copy-0 states of a solution.
pub fn guess_from_solution(system: &DeductionSystem, solution: &Solution) -> Result<Vec<PropId>, OracleError> {
    if solution.assignment.is_empty() && !system.is_empty() {
        return Err(OracleError::MissingAssignment);
    }
    Ok(system
        .ids()
        .filter(|p| solution.value(&state_var(p.0, 0)) == Some(1))
        .collect())
}

/// Recomputes the deduction course behind a solution and checks that every
/// state the solution marks known at copy `i` is reached within `i` sweeps.
pub fn extract_trace(
    system: &DeductionSystem,
    solution: &Solution,
    cfg: &EncodeConfig,
) -> Result<ClosureResult, OracleError> {
    let guess = guess_from_solution(system, solution)?;
    let result = closure(system, &guess)?;
    for copy in 0..=cfg.nu {
        for p in system.ids() {
            if solution.value(&state_var(p.0, copy)) != Some(1) {
                continue;
            }
            match result.round_of[p.0] {
                Some(r) if r <= copy => {}
                reached => {
                    return Err(OracleError::TraceMismatch {
                        name: system.prop_name(p).to_string(),
                        copy,
                        reached: reached.map_or("never".into(), |r| format!("at sweep {r}")),
                    })
                }
            }
        }
    }
    Ok(result)
}

fn rule_label(step: &TraceStep) -> String {
    step.label.clone().unwrap_or_else(|| format!("r{}", step.rule + 1))
}

/// Markdown table: step, known premises, rule, deduced.
pub fn render_trace_table(system: &DeductionSystem, result: &ClosureResult) -> String {
    let mut out = String::from("| Step | Known premises | Rule | Deduced |\n|---:|---|---|---|\n");
    for (i, s) in result.trace.iter().enumerate() {
        let premises = s.premises.iter().map(|&p| system.prop_name(p)).join(", ");
        let _ = writeln!(out, "| {} | {} | {} | {} |", i + 1, premises, rule_label(s), system.prop_name(s.deduced));
    }
    out
}

/// Plain lines `step | premises | rule | deduced`, the fixture format.
pub fn render_trace_lines(system: &DeductionSystem, result: &ClosureResult) -> String {
    let mut out = String::new();
    for (i, s) in result.trace.iter().enumerate() {
        let premises = s.premises.iter().map(|&p| system.prop_name(p)).join(", ");
        let _ = writeln!(out, "{} | {} | {} | {}", i + 1, premises, rule_label(s), system.prop_name(s.deduced));
    }
    out
}
