//! Unrolls a deduction system over `nu` state copies into a 0-1 program.
//!
//! Variable names: state `x{index}_c{copy}` for copies `0..=nu`, and path
//! `l{index}_p{path}_c{copy}` for the step from `copy` to `copy + 1`, with
//! paths numbered from 1 (path 1 is the copy path). Declaration order is the
//! copy-0 states, then per step all path variables followed by the next
//! states.
//!
//! Per step and state variable `x'` with paths `l_1..l_τ`:
//!
//! * plain: every path `l` over premises `x_1..x_κ` gets `l = x_1` if `κ = 1`,
//!   else `l − Σx_i ≥ −(κ−1)` and `−κl + Σx_i ≥ 0`; then `x' = l_1` if
//!   `τ = 1`, else `−2x' + Σl ≥ −1` and `τx' − Σl ≥ 0`.
//! * compact (`τ ≥ 2`): the copy path and one rule path `d` (the last one with
//!   two or more premises, or the last path) lose their variables; the other
//!   rule paths keep the plain path rows, and with the middle paths `l_m`
//!   and `d`'s premises `x_1..x_κ`:
//!   `((τ−1)κ+1)x' − κ(x + Σl_m) − Σx_i ≥ −(κ−1)` and
//!   `−κx' + κ(x + Σl_m) + Σx_i ≥ 0`.
//!
//! The first rows are the boundary conditions: `Σ x_c0 ≤ k` when maximizing
//! coverage, or `x_c{nu} ≥ 1` for every state when minimizing guesses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{Constraint, MilpInstance, Relation, Sense, VarId};
use crate::preprocess::expand_rules;
use crate::system::{DeductionSystem, PropId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodeMode {
    Plain,
    #[default]
    Compact,
}

impl FromStr for EncodeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(EncodeMode::Plain),
            "compact" => Ok(EncodeMode::Compact),
            _ => Err(format!("unknown mode `{s}` (expected plain or compact)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Goal {
    /// Maximize known final-copy states under the budget.
    #[default]
    MaxCoverage,
    /// Minimize the guesses needed to know every final-copy state.
    MinGuesses,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeConfig {
    pub nu: usize,
    pub budget_k: usize,
    pub mode: EncodeMode,
    pub sense: Goal,
}

impl EncodeConfig {
    pub fn new(nu: usize, budget_k: usize) -> Self {
        EncodeConfig { nu, budget_k, mode: EncodeMode::Compact, sense: Goal::MaxCoverage }
    }

    pub fn min_guesses(nu: usize) -> Self {
        EncodeConfig { nu, budget_k: 0, mode: EncodeMode::Compact, sense: Goal::MinGuesses }
    }

    pub fn with_mode(mut self, mode: EncodeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if self.nu == 0 {
            return Err(ConfigError::NoCopies);
        }
        if self.sense == Goal::MaxCoverage && self.budget_k > n {
            return Err(ConfigError::BudgetTooLarge { k: self.budget_k, n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("nu must be at least 1")]
    NoCopies,
    #[error("budget k = {k} exceeds the {n} propositions")]
    BudgetTooLarge { k: usize, n: usize },
}

pub fn state_var(index: usize, copy: usize) -> String {
    format!("x{index}_c{copy}")
}

pub fn path_var(index: usize, path: usize, copy: usize) -> String {
    format!("l{index}_p{path}_c{copy}")
}

/// Parses `x{index}_c{copy}`.
pub fn parse_state_var(name: &str) -> Option<(usize, usize)> {
    let (i, c) = name.strip_prefix('x')?.split_once("_c")?;
    Some((i.parse().ok()?, c.parse().ok()?))
}

/// Deduction paths of each proposition for one copy step. Row `x` starts
/// with the copy path `[x]`, followed by the premises of each rule
/// concluding `x` in rule order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTable {
    names: Vec<String>,
    rows: Vec<Vec<Vec<PropId>>>,
}

impl PathTable {
    pub fn rows(&self) -> &[Vec<Vec<PropId>>] {
        &self.rows
    }

    pub fn paths(&self, x: PropId) -> &[Vec<PropId>] {
        &self.rows[x.0]
    }

    pub fn total_paths(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Named rows, in proposition order.
    pub fn named_rows(&self) -> Vec<PathRow> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, paths)| PathRow {
                name: self.names[i].clone(),
                paths: paths
                    .iter()
                    .map(|p| p.iter().map(|x| self.names[x.0].clone()).collect())
                    .collect(),
            })
            .collect()
    }

    /// The `.paths` text: `name: a, b; c, d` per proposition.
    pub fn render(&self) -> String {
        self.named_rows().iter().map(|r| format!("{r}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathRow {
    pub name: String,
    pub paths: Vec<Vec<String>>,
}

impl fmt::Display for PathRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self.paths.iter().map(|p| p.join(", ")).collect();
        write!(f, "{}: {}", self.name, sets.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct PathsError {
    pub line: usize,
    pub message: String,
}

/// Reads `.paths` text; `#` comments and blank lines are skipped.
pub fn parse_paths(text: &str) -> Result<Vec<PathRow>, PathsError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| PathsError { line: i + 1, message: m.to_string() };
        let (name, rest) = line.split_once(':').ok_or_else(|| err("expected `name: paths`"))?;
        let paths: Vec<Vec<String>> = rest
            .split(';')
            .map(|set| {
                set.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect();
        if paths.iter().any(Vec::is_empty) {
            return Err(err("empty premise set"));
        }
        rows.push(PathRow { name: name.trim().to_string(), paths });
    }
    Ok(rows)
}

/// Path table of the expanded form of `system`.
pub fn enumerate_paths(system: &DeductionSystem) -> PathTable {
    let expanded = expand_rules(system);
    let mut rows: Vec<Vec<Vec<PropId>>> = expanded.ids().map(|x| vec![vec![x]]).collect();
    for r in expanded.directed_rules() {
        rows[r.conclusion().0].push(r.premises().to_vec());
    }
    PathTable { names: expanded.names().to_vec(), rows }
}

/// Path index (0-based) folded into the state rows in compact mode.
fn folded_path(paths: &[Vec<PropId>]) -> Option<usize> {
    if paths.len() < 2 {
        return None;
    }
    (1..paths.len()).rev().find(|&j| paths[j].len() >= 2).or(Some(paths.len() - 1))
}

pub fn encode(system: &DeductionSystem, cfg: &EncodeConfig) -> Result<MilpInstance, ConfigError> {
    cfg.validate(system.len())?;
    let table = enumerate_paths(system);
    let n = system.len();
    let compact = cfg.mode == EncodeMode::Compact;
    let mut m = MilpInstance::new();

    let states0: Vec<VarId> = (0..n).map(|x| m.add_binary(state_var(x, 0))).collect();
    let mut states = vec![states0];
    // path variable ids per step, row and path (None when folded away)
    let mut path_ids: Vec<Vec<Vec<Option<VarId>>>> = Vec::with_capacity(cfg.nu);
    for i in 0..cfg.nu {
        let mut step = Vec::with_capacity(n);
        for (x, paths) in table.rows().iter().enumerate() {
            let fold = if compact { folded_path(paths) } else { None };
            let ids = (0..paths.len())
                .map(|j| {
                    let dropped = fold.is_some_and(|d| j == 0 || j == d);
                    (!dropped).then(|| m.add_binary(path_var(x, j + 1, i)))
                })
                .collect();
            step.push(ids);
        }
        path_ids.push(step);
        let next: Vec<VarId> = (0..n).map(|x| m.add_binary(state_var(x, i + 1))).collect();
        states.push(next);
    }

    match cfg.sense {
        Goal::MaxCoverage => {
            let budget = states[0].iter().map(|&v| (v, 1)).collect();
            m.add_constraint(Constraint::new(budget, Relation::Le, cfg.budget_k as i64));
            m.set_objective(Sense::Maximize, states[cfg.nu].iter().map(|&v| (v, 1)).collect());
        }
        Goal::MinGuesses => {
            for &v in &states[cfg.nu] {
                m.add_constraint(Constraint::new(vec![(v, 1)], Relation::Ge, 1));
            }
            m.set_objective(Sense::Minimize, states[0].iter().map(|&v| (v, 1)).collect());
        }
    }

    for i in 0..cfg.nu {
        let prev = &states[i];
        for (x, paths) in table.rows().iter().enumerate() {
            let xn = states[i + 1][x];
            let ids = &path_ids[i][x];
            for (j, premises) in paths.iter().enumerate() {
                if let Some(l) = ids[j] {
                    let xs: Vec<VarId> = premises.iter().map(|p| prev[p.0]).collect();
                    add_all(&mut m, path_group(l, &xs));
                }
            }
            let fold = if compact { folded_path(paths) } else { None };
            match fold {
                None => {
                    let ls: Vec<VarId> = ids.iter().map(|l| l.unwrap()).collect();
                    add_all(&mut m, state_group(xn, &ls));
                }
                Some(d) => {
                    let mid: Vec<VarId> = std::iter::once(prev[x])
                        .chain(ids.iter().flatten().copied())
                        .collect();
                    let xs: Vec<VarId> = paths[d].iter().map(|p| prev[p.0]).collect();
                    add_all(&mut m, folded_group(xn, &mid, &xs, paths.len() as i64));
                }
            }
        }
    }
    Ok(m)
}

/// Rows tying a path variable to its premises: `l = x1` for one premise,
/// otherwise `l − Σx ≥ −(κ−1)` and `−κl + Σx ≥ 0`.
pub fn path_group(l: VarId, xs: &[VarId]) -> Vec<Constraint> {
    let k = xs.len() as i64;
    if k == 1 {
        return vec![Constraint::new(vec![(l, 1), (xs[0], -1)], Relation::Eq, 0)];
    }
    let mut a = vec![(l, 1)];
    a.extend(xs.iter().map(|&x| (x, -1)));
    let mut b = vec![(l, -k)];
    b.extend(xs.iter().map(|&x| (x, 1)));
    vec![Constraint::new(a, Relation::Ge, -(k - 1)), Constraint::new(b, Relation::Ge, 0)]
}

/// Rows tying a state to its path variables: `x = l1` for one path,
/// otherwise `−2x + Σl ≥ −1` and `τx − Σl ≥ 0`.
pub fn state_group(x: VarId, ls: &[VarId]) -> Vec<Constraint> {
    let tau = ls.len() as i64;
    if tau == 1 {
        return vec![Constraint::new(vec![(x, 1), (ls[0], -1)], Relation::Eq, 0)];
    }
    let mut a = vec![(x, -2)];
    a.extend(ls.iter().map(|&l| (l, 1)));
    let mut b = vec![(x, tau)];
    b.extend(ls.iter().map(|&l| (l, -1)));
    vec![Constraint::new(a, Relation::Ge, -1), Constraint::new(b, Relation::Ge, 0)]
}

/// The two compact rows for a state with `tau` paths; `mid` is the previous
/// copy of the state followed by the surviving path variables and `xs` the
/// premises of the folded path.
pub fn folded_group(xn: VarId, mid: &[VarId], xs: &[VarId], tau: i64) -> Vec<Constraint> {
    let k = xs.len() as i64;
    let mut u = vec![(xn, (tau - 1) * k + 1)];
    u.extend(mid.iter().map(|&v| (v, -k)));
    u.extend(xs.iter().map(|&v| (v, -1)));
    let mut v = vec![(xn, -k)];
    v.extend(mid.iter().map(|&w| (w, k)));
    v.extend(xs.iter().map(|&w| (w, 1)));
    vec![Constraint::new(u, Relation::Ge, -(k - 1)), Constraint::new(v, Relation::Ge, 0)]
}

fn add_all(m: &mut MilpInstance, rows: Vec<Constraint>) {
    for r in rows {
        m.add_constraint(r);
    }
}

/// Size difference between the plain and compact encodings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub plain_variables: usize,
    pub compact_variables: usize,
    pub plain_constraints: usize,
    pub compact_constraints: usize,
    pub path_variables_saved: usize,
    pub constraints_saved: usize,
    /// Per step: states whose folded rule path has several premises (2
    /// variables and 3 rows saved each).
    pub folded_multi: usize,
    /// Per step: states whose folded rule path has a single premise (2
    /// variables and 2 rows saved each).
    pub folded_single: usize,
    /// Per step: states with only the copy path, left unchanged.
    pub unfolded: usize,
}

pub fn count_reduction(system: &DeductionSystem, cfg: &EncodeConfig) -> Result<ReductionReport, ConfigError> {
    let plain = encode(system, &cfg.clone().with_mode(EncodeMode::Plain))?;
    let compact = encode(system, &cfg.clone().with_mode(EncodeMode::Compact))?;
    let table = enumerate_paths(system);
    let (mut multi, mut single, mut unfolded) = (0, 0, 0);
    for paths in table.rows() {
        match folded_path(paths) {
            None => unfolded += 1,
            Some(d) if paths[d].len() >= 2 => multi += 1,
            Some(_) => single += 1,
        }
    }
    Ok(ReductionReport {
        plain_variables: plain.num_vars(),
        compact_variables: compact.num_vars(),
        plain_constraints: plain.constraints().len(),
        compact_constraints: compact.constraints().len(),
        path_variables_saved: plain.num_vars() - compact.num_vars(),
        constraints_saved: plain.constraints().len() - compact.constraints().len(),
        folded_multi: multi,
        folded_single: single,
        unfolded,
    })
}
