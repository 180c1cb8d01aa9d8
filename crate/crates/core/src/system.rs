//! Deduction systems: propositions plus the rules relating them.
//!
//! A [`DeductionSystem`] owns a dense list of proposition names and two rule
//! lists. Symmetric rules `[x1, .., xk]` state that every member follows from
//! the other `k - 1` members; directed rules `p1, .., pk => c` state that `c`
//! follows from the premises. Construction is unchecked; call
//! [`DeductionSystem::validate`] to collect every well-formedness problem.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense index of a proposition inside its system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PropId(pub usize);

impl PropId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// `[x1, .., xk]`: each member can be deduced from all the others.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricRule {
    members: Vec<PropId>,
    label: Option<String>,
}

impl SymmetricRule {
    pub fn new(members: Vec<PropId>) -> Self {
        SymmetricRule { members, label: None }
    }

    pub fn labeled(members: Vec<PropId>, label: impl Into<String>) -> Self {
        SymmetricRule { members, label: Some(label.into()) }
    }

    pub fn members(&self) -> &[PropId] {
        &self.members
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Members as a set, used to detect duplicate rules.
    pub fn member_set(&self) -> BTreeSet<PropId> {
        self.members.iter().copied().collect()
    }

    pub(crate) fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }
}

/// `p1, .., pk => c`. Premises are kept sorted and free of repeats.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectedRule {
    premises: Vec<PropId>,
    conclusion: PropId,
    label: Option<String>,
}

impl DirectedRule {
    pub fn new(premises: impl IntoIterator<Item = PropId>, conclusion: PropId) -> Self {
        let premises: BTreeSet<PropId> = premises.into_iter().collect();
        DirectedRule { premises: premises.into_iter().collect(), conclusion, label: None }
    }

    pub fn labeled(
        premises: impl IntoIterator<Item = PropId>,
        conclusion: PropId,
        label: impl Into<String>,
    ) -> Self {
        let mut rule = DirectedRule::new(premises, conclusion);
        rule.label = Some(label.into());
        rule
    }

    pub fn premises(&self) -> &[PropId] {
        &self.premises
    }

    pub fn conclusion(&self) -> PropId {
        self.conclusion
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub(crate) fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    /// Identity used for duplicate detection; labels are ignored.
    pub(crate) fn key(&self) -> (&[PropId], PropId) {
        (&self.premises, self.conclusion)
    }
}

/// Which rule list a diagnostic points into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RuleRef {
    Symmetric(usize),
    Directed(usize),
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRef::Symmetric(i) => write!(f, "symmetric rule {i}"),
            RuleRef::Directed(i) => write!(f, "directed rule {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Diagnostic {
    EmptyPremises { rule: RuleRef },
    OutOfRange { rule: RuleRef, index: usize },
    ConclusionInPremises { rule: RuleRef },
    DuplicateMember { rule: RuleRef, proposition: usize },
    TooFewMembers { rule: RuleRef, count: usize },
    DuplicateName { name: String },
    InvalidName { index: usize, name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyPremises { rule } => write!(f, "{rule}: empty premises"),
            Diagnostic::OutOfRange { rule, index } => {
                write!(f, "{rule}: proposition index {index} out of range")
            }
            Diagnostic::ConclusionInPremises { rule } => {
                write!(f, "{rule}: conclusion is also a premise")
            }
            Diagnostic::DuplicateMember { rule, proposition } => {
                write!(f, "{rule}: duplicate member #{proposition}")
            }
            Diagnostic::TooFewMembers { rule, count } => {
                write!(f, "{rule}: symmetric rule needs at least 2 members, has {count}")
            }
            Diagnostic::DuplicateName { name } => write!(f, "duplicate proposition name `{name}`"),
            Diagnostic::InvalidName { index, name } => {
                write!(f, "proposition #{index} has invalid name `{name}`")
            }
        }
    }
}

/// Names are non-empty runs of ASCII letters, digits and underscores.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeductionSystem {
    name: Option<String>,
    names: Vec<String>,
    symmetric: Vec<SymmetricRule>,
    directed: Vec<DirectedRule>,
}

impl DeductionSystem {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        DeductionSystem {
            name: None,
            names: names.into_iter().map(Into::into).collect(),
            symmetric: Vec::new(),
            directed: Vec::new(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn set_name(&mut self, name: Option<String>) {
        self.name = name;
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn prop_name(&self, id: PropId) -> &str {
        &self.names[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = PropId> + '_ {
        (0..self.names.len()).map(PropId)
    }

    pub fn symmetric_rules(&self) -> &[SymmetricRule] {
        &self.symmetric
    }

    pub fn directed_rules(&self) -> &[DirectedRule] {
        &self.directed
    }

    /// Combined rule count `m`.
    pub fn rule_count(&self) -> usize {
        self.symmetric.len() + self.directed.len()
    }

    pub fn push_symmetric(&mut self, rule: SymmetricRule) -> &mut Self {
        self.symmetric.push(rule);
        self
    }

    pub fn push_directed(&mut self, rule: DirectedRule) -> &mut Self {
        self.directed.push(rule);
        self
    }

    /// Looks a proposition up by exact name.
    pub fn find(&self, name: &str) -> Option<PropId> {
        self.names.iter().position(|n| n == name).map(PropId)
    }

    pub fn name_index(&self) -> HashMap<&str, PropId> {
        self.names.iter().enumerate().map(|(i, n)| (n.as_str(), PropId(i))).collect()
    }

    /// Resolves user-supplied names: exact match first, then a match that
    /// ignores underscores (`a3` finds `a_3`).
    pub fn resolve(&self, name: &str) -> Option<PropId> {
        if let Some(id) = self.find(name) {
            return Some(id);
        }
        let squash = |s: &str| s.replace('_', "");
        let wanted = squash(name);
        let mut hits = self.names.iter().enumerate().filter(|(_, n)| squash(n) == wanted);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(PropId(i)),
            _ => None,
        }
    }

    /// Number of rules (symmetric counted once) mentioning each proposition.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0usize; self.len()];
        for r in &self.symmetric {
            for m in r.member_set() {
                if m.0 < occ.len() {
                    occ[m.0] += 1;
                }
            }
        }
        for r in &self.directed {
            for &p in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                if p.0 < occ.len() {
                    occ[p.0] += 1;
                }
            }
        }
        occ
    }

    pub(crate) fn from_parts(
        name: Option<String>,
        names: Vec<String>,
        symmetric: Vec<SymmetricRule>,
        directed: Vec<DirectedRule>,
    ) -> Self {
        DeductionSystem { name, names, symmetric, directed }
    }

    /// Collects every violated invariant. Empty means the system is usable
    /// by every downstream stage.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let n = self.len();
        let mut out = Vec::new();

        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, name) in self.names.iter().enumerate() {
            if !is_valid_name(name) {
                out.push(Diagnostic::InvalidName { index: i, name: name.clone() });
            }
            if seen.insert(name.as_str(), i).is_some() {
                out.push(Diagnostic::DuplicateName { name: name.clone() });
            }
        }

        for (i, rule) in self.symmetric.iter().enumerate() {
            let rule_ref = RuleRef::Symmetric(i);
            if rule.members.len() < 2 {
                out.push(Diagnostic::TooFewMembers { rule: rule_ref, count: rule.members.len() });
            }
            let mut members = BTreeSet::new();
            for &m in &rule.members {
                if m.0 >= n {
                    out.push(Diagnostic::OutOfRange { rule: rule_ref, index: m.0 });
                } else if !members.insert(m) {
                    out.push(Diagnostic::DuplicateMember { rule: rule_ref, proposition: m.0 });
                }
            }
        }

        for (i, rule) in self.directed.iter().enumerate() {
            let rule_ref = RuleRef::Directed(i);
            if rule.premises.is_empty() {
                out.push(Diagnostic::EmptyPremises { rule: rule_ref });
            }
            for &p in rule.premises.iter().chain(std::iter::once(&rule.conclusion)) {
                if p.0 >= n {
                    out.push(Diagnostic::OutOfRange { rule: rule_ref, index: p.0 });
                }
            }
            if rule.premises.contains(&rule.conclusion) {
                out.push(Diagnostic::ConclusionInPremises { rule: rule_ref });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn display_rule(&self, rule: &DirectedRule) -> String {
        let prem: Vec<&str> = rule.premises.iter().map(|&p| self.prop_name(p)).collect();
        format!("{} => {}", prem.join(" "), self.prop_name(rule.conclusion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ciphers::toy;

    #[test]
    fn toy_system_is_valid() {
        let s = toy();
        assert_eq!(s.len(), 4);
        assert_eq!(s.rule_count(), 5);
        assert!(s.validate().is_empty());
    }

    #[test]
    fn empty_premises_reported() {
        let mut s = toy();
        s.push_directed(DirectedRule::new([], PropId(0)));
        let d = s.validate();
        assert_eq!(d, vec![Diagnostic::EmptyPremises { rule: RuleRef::Directed(5) }]);
        assert!(d[0].to_string().contains("empty premises"));
    }

    #[test]
    fn out_of_range_reported() {
        let mut s = toy();
        s.push_directed(DirectedRule::new([PropId(4)], PropId(0)));
        let d = s.validate();
        assert_eq!(d, vec![Diagnostic::OutOfRange { rule: RuleRef::Directed(5), index: 4 }]);
        assert!(d[0].to_string().contains("out of range"));
    }

    #[test]
    fn symmetric_rule_problems() {
        let mut s = DeductionSystem::new(["x", "y"]);
        s.push_symmetric(SymmetricRule::new(vec![PropId(0), PropId(0)]));
        s.push_symmetric(SymmetricRule::new(vec![PropId(1)]));
        let d = s.validate();
        assert!(d.contains(&Diagnostic::DuplicateMember { rule: RuleRef::Symmetric(0), proposition: 0 }));
        assert!(d.contains(&Diagnostic::TooFewMembers { rule: RuleRef::Symmetric(1), count: 1 }));
    }

    #[test]
    fn conclusion_in_premises_and_names() {
        let mut s = DeductionSystem::new(["a", "a", "b-c"]);
        s.push_directed(DirectedRule::new([PropId(0), PropId(1)], PropId(1)));
        let d = s.validate();
        assert!(d.contains(&Diagnostic::DuplicateName { name: "a".into() }));
        assert!(d.contains(&Diagnostic::InvalidName { index: 2, name: "b-c".into() }));
        assert!(d.contains(&Diagnostic::ConclusionInPremises { rule: RuleRef::Directed(0) }));
    }

    #[test]
    fn validate_is_deterministic() {
        let mut s = toy();
        s.push_directed(DirectedRule::new([], PropId(9)));
        assert_eq!(s.validate(), s.validate());
    }

    #[test]
    fn resolve_ignores_underscores() {
        let s = DeductionSystem::new(["a_3", "a_13", "b_1"]);
        assert_eq!(s.resolve("a3"), Some(PropId(0)));
        assert_eq!(s.resolve("a_13"), Some(PropId(1)));
        assert_eq!(s.resolve("c1"), None);
    }
}
