use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use super::MilpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    /// Modeled for the canonical form only; the solver rejects these.
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `Σ coef·var  relation  rhs`, integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(VarId, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

impl Constraint {
    pub fn new(terms: Vec<(VarId, i64)>, relation: Relation, rhs: i64) -> Self {
        Constraint { terms, relation, rhs }
    }

    pub fn lhs(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<(VarId, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilpInstance {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    index: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    objective: Objective,
}

impl Default for MilpInstance {
    fn default() -> Self {
        MilpInstance {
            names: Vec::new(),
            kinds: Vec::new(),
            index: HashMap::new(),
            constraints: Vec::new(),
            objective: Objective { sense: Sense::Maximize, terms: Vec::new() },
        }
    }
}

impl MilpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable. Re-declaring an existing name returns its id.
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> VarId {
        let name = name.into();
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = VarId(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.kinds.push(kind);
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary)
    }

    pub fn add_constraint(&mut self, constraint: Constraint) -> usize {
        self.constraints.push(constraint);
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, i64)>) {
        self.objective = Objective { sense, terms };
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn var_names(&self) -> &[String] {
        &self.names
    }

    pub fn var_kind(&self, v: VarId) -> VarKind {
        self.kinds[v.0]
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Checks references and variable kinds before solving.
    pub fn check(&self) -> Result<(), MilpError> {
        let n = self.num_vars();
        let bad = |terms: &[(VarId, i64)], what: String| -> Result<(), MilpError> {
            match terms.iter().find(|(v, _)| v.0 >= n) {
                Some((v, _)) => Err(MilpError::MalformedInstance(format!(
                    "{what} references undeclared variable #{}",
                    v.0
                ))),
                None => Ok(()),
            }
        };
        for (i, c) in self.constraints.iter().enumerate() {
            bad(&c.terms, format!("constraint c{i}"))?;
        }
        bad(&self.objective.terms, "objective".into())?;
        if let Some(i) = self.kinds.iter().position(|&k| k != VarKind::Binary) {
            return Err(MilpError::MalformedInstance(format!(
                "variable {} is not binary",
                self.names[i]
            )));
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[i64]) -> i64 {
        self.objective.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// `Σ c·x` over the objective written as LP text, e.g. `x0_c1 + 2 x1_c1`.
    pub fn format_terms(&self, terms: &[(VarId, i64)]) -> String {
        let mut out = String::new();
        for (i, &(v, c)) in terms.iter().enumerate() {
            let name = self.var_name(v);
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    out.push_str("- ");
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            if mag != 1 {
                out.push_str(&mag.to_string());
                out.push(' ');
            }
            out.push_str(name);
        }
        if terms.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn format_constraint(&self, c: &Constraint) -> String {
        format!("{} {} {}", self.format_terms(&c.terms), c.relation.symbol(), c.rhs)
    }

    /// Maps a by-name assignment onto a dense value vector.
    pub fn values_from_names(&self, assignment: &BTreeMap<String, i64>) -> Result<Vec<i64>, MilpError> {
        let mut values = vec![None; self.num_vars()];
        for (name, &value) in assignment {
            let v = self
                .find_var(name)
                .ok_or_else(|| MilpError::UnknownVariable(name.clone()))?;
            values[v.0] = Some(value);
        }
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| MilpError::IncompleteAssignment(self.names[i].clone())))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub lhs: i64,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}: {} (lhs = {})", self.index, self.constraint, self.lhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub objective: i64,
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact evaluation of a full 0/1 assignment (one value per variable).
pub fn evaluate(instance: &MilpInstance, values: &[i64]) -> Result<Evaluation, MilpError> {
    if values.len() != instance.num_vars() {
        let missing = instance
            .var_names()
            .get(values.len())
            .cloned()
            .unwrap_or_else(|| format!("{} values for {} variables", values.len(), instance.num_vars()));
        return Err(MilpError::IncompleteAssignment(missing));
    }
    if let Some(i) = values.iter().position(|&v| v != 0 && v != 1) {
        return Err(MilpError::NonBinaryValue {
            name: instance.var_name(VarId(i)).to_string(),
            value: values[i].to_string(),
        });
    }
    let violations = instance
        .constraints()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let lhs = c.lhs(values);
            (!c.relation.holds(lhs, c.rhs)).then(|| Violation {
                index: i,
                lhs,
                constraint: instance.format_constraint(c),
            })
        })
        .collect();
    Ok(Evaluation { objective: instance.objective_value(values), violations })
}
