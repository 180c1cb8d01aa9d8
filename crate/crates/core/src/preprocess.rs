//! System simplifications that preserve the minimum guess count.
//!
//! * [`expand_rules`] turns every symmetric rule into directed rules.
//! * [`merge_equalities`] collapses mutually derivable pairs onto one
//!   representative (the lowest index of each class).
//! * [`eliminate_independent`] drops variables that occur in a single rule.
//! * [`simplify`] alternates the last two until neither changes anything.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::system::{DeductionSystem, DirectedRule, PropId, SymmetricRule};

/// Each symmetric rule of size `k` becomes `k` directed rules (member `i`
/// from the other members), emitted before the original directed rules.
/// Exact duplicates are dropped, keeping the first occurrence.
pub fn expand_rules(system: &DeductionSystem) -> DeductionSystem {
    let mut directed = Vec::new();
    for rule in system.symmetric_rules() {
        directed.extend(expand_one(rule));
    }
    directed.extend(system.directed_rules().iter().cloned());
    DeductionSystem::from_parts(
        system.name().map(str::to_string),
        system.names().to_vec(),
        Vec::new(),
        dedup_directed(directed),
    )
}

fn expand_one(rule: &SymmetricRule) -> impl Iterator<Item = DirectedRule> + '_ {
    let members = rule.members();
    members.iter().enumerate().map(move |(i, &c)| {
        let premises = members.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p);
        DirectedRule::new(premises, c).with_label(rule.label().map(str::to_string))
    })
}

fn dedup_directed(rules: Vec<DirectedRule>) -> Vec<DirectedRule> {
    let mut seen = HashSet::new();
    rules
        .into_iter()
        .filter(|r| {
            let (p, c) = r.key();
            seen.insert((p.to_vec(), c))
        })
        .collect()
}

fn dedup_symmetric(rules: Vec<SymmetricRule>) -> Vec<SymmetricRule> {
    let mut seen = HashSet::new();
    rules.into_iter().filter(|r| seen.insert(r.member_set())).collect()
}

/// Where each proposition of the input system ended up after merging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeMap {
    /// Index in the merged system, per original proposition.
    #[serde(skip)]
    pub target: Vec<PropId>,
    /// Removed name -> surviving representative name.
    pub merged: BTreeMap<String, String>,
    pub removed_variables: usize,
    pub removed_rules: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    /// Joins two classes, keeping the smaller index as root.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

/// Pairs `{x1, x2}` that derive each other: two-member symmetric rules and
/// single-premise directed rules present in both directions.
fn equality_pairs(system: &DeductionSystem) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for r in system.symmetric_rules() {
        let set = r.member_set();
        if set.len() == 2 {
            let mut it = set.into_iter();
            pairs.push((it.next().unwrap().0, it.next().unwrap().0));
        }
    }
    let singles: HashSet<(usize, usize)> = system
        .directed_rules()
        .iter()
        .filter(|r| r.premises().len() == 1)
        .map(|r| (r.premises()[0].0, r.conclusion().0))
        .collect();
    for &(a, b) in &singles {
        if a < b && singles.contains(&(b, a)) {
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Rewrites `system` through `map` (old index -> new index, `None` if the
/// variable is gone), dropping rules that became trivial.
fn rewrite(system: &DeductionSystem, names: Vec<String>, map: &[Option<PropId>]) -> DeductionSystem {
    let m = |p: PropId| map[p.0].expect("rewritten rule mentions a removed variable");
    let mut symmetric = Vec::new();
    let mut directed = Vec::new();
    for r in system.symmetric_rules() {
        let mapped: Vec<PropId> = r.members().iter().map(|&p| m(p)).collect();
        let distinct: HashSet<PropId> = mapped.iter().copied().collect();
        if distinct.len() == mapped.len() {
            symmetric.push(SymmetricRule::new(mapped).with_label(r.label().map(str::to_string)));
        } else {
            // collapsed members: keep only the directed consequences that still say something
            for d in expand_one(r) {
                let rewritten = DirectedRule::new(d.premises().iter().map(|&p| m(p)), m(d.conclusion()))
                    .with_label(d.label().map(str::to_string));
                if !rewritten.premises().contains(&rewritten.conclusion()) {
                    directed.push(rewritten);
                }
            }
        }
    }
    for r in system.directed_rules() {
        let rewritten = DirectedRule::new(r.premises().iter().map(|&p| m(p)), m(r.conclusion()))
            .with_label(r.label().map(str::to_string));
        if !rewritten.premises().contains(&rewritten.conclusion()) {
            directed.push(rewritten);
        }
    }
    DeductionSystem::from_parts(
        system.name().map(str::to_string),
        names,
        dedup_symmetric(symmetric),
        dedup_directed(directed),
    )
}

/// Collapses every class of mutually derivable propositions onto its lowest
/// index, repeating until no equality pair is left.
pub fn merge_equalities(system: &DeductionSystem) -> (DeductionSystem, MergeMap) {
    let original = system;
    let mut current = system.clone();
    let mut target: Vec<PropId> = system.ids().collect();
    let mut merged = BTreeMap::new();

    loop {
        let pairs = equality_pairs(&current);
        let mut uf = UnionFind::new(current.len());
        let mut changed = false;
        for (a, b) in pairs {
            changed |= uf.union(a, b);
        }
        if !changed {
            break;
        }
        let mut map = vec![None; current.len()];
        let mut names = Vec::new();
        for (i, slot) in map.iter_mut().enumerate() {
            if uf.find(i) == i {
                *slot = Some(PropId(names.len()));
                names.push(current.names()[i].clone());
            }
        }
        for i in 0..current.len() {
            let root = uf.find(i);
            map[i] = map[root];
            if root != i {
                merged.insert(current.names()[i].clone(), current.names()[root].clone());
            }
        }
        for t in target.iter_mut() {
            *t = map[t.0].unwrap();
        }
        current = rewrite(&current, names, &map);
    }

    // chase chains so every removed name points at a surviving one
    let resolved: BTreeMap<String, String> = merged
        .keys()
        .map(|k| {
            let mut rep = &merged[k];
            while let Some(next) = merged.get(rep) {
                rep = next;
            }
            (k.clone(), rep.clone())
        })
        .collect();

    let map = MergeMap {
        target,
        merged: resolved,
        removed_variables: original.len() - current.len(),
        removed_rules: original.rule_count().saturating_sub(current.rule_count()),
    };
    (current, map)
}

/// How to recover an eliminated variable from a solution of the reduced system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reinstatement {
    /// Deduced at the end by this (removed) rule once its other variables are known.
    DeducedBy { rule: String },
    /// Only ever used as a premise, so every full solution must guess it.
    MustGuess,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EliminatedVar {
    pub name: String,
    #[serde(flatten)]
    pub reinstate: Reinstatement,
}

#[derive(Clone)]
enum WorkRule {
    Sym(SymmetricRule),
    Dir(DirectedRule),
}

impl WorkRule {
    fn vars(&self) -> Vec<PropId> {
        match self {
            WorkRule::Sym(r) => r.member_set().into_iter().collect(),
            WorkRule::Dir(r) => {
                let mut v = r.premises().to_vec();
                v.push(r.conclusion());
                v
            }
        }
    }

    fn render(&self, sys: &DeductionSystem) -> String {
        let label = |l: Option<&str>| l.map(|l| format!("{l}: ")).unwrap_or_default();
        match self {
            WorkRule::Sym(r) => {
                let m: Vec<&str> = r.members().iter().map(|&p| sys.prop_name(p)).collect();
                format!("{}[{}]", label(r.label()), m.join(", "))
            }
            WorkRule::Dir(r) => format!("{}{}", label(r.label()), sys.display_rule(r)),
        }
    }
}

/// Removes variables occurring in exactly one rule, when that rule holds no
/// other such variable:
///
/// * member of a symmetric rule: drop the variable and the rule;
/// * conclusion of a directed rule: drop the variable and the rule;
/// * premise of a directed rule with at least one other premise: the
///   variable must be guessed, so it is dropped from the premises.
///
/// Variables are visited in ascending index order and the pass repeats to a
/// fixpoint.
pub fn eliminate_independent(system: &DeductionSystem) -> (DeductionSystem, Vec<EliminatedVar>) {
    let n = system.len();
    let mut rules: Vec<Option<WorkRule>> = system
        .symmetric_rules()
        .iter()
        .cloned()
        .map(WorkRule::Sym)
        .chain(system.directed_rules().iter().cloned().map(WorkRule::Dir))
        .map(Some)
        .collect();
    let mut alive = vec![true; n];
    let mut eliminated = Vec::new();

    'outer: loop {
        let mut occ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ri, r) in rules.iter().enumerate() {
            if let Some(r) = r {
                for v in r.vars() {
                    occ[v.0].push(ri);
                }
            }
        }
        for x in 0..n {
            if !alive[x] || occ[x].len() != 1 {
                continue;
            }
            let ri = occ[x][0];
            let rule = rules[ri].clone().unwrap();
            let independents = rule.vars().iter().filter(|v| occ[v.0].len() == 1).count();
            if independents != 1 {
                continue;
            }
            let xid = PropId(x);
            let reinstate = match &rule {
                WorkRule::Sym(_) => {
                    rules[ri] = None;
                    Reinstatement::DeducedBy { rule: rule.render(system) }
                }
                WorkRule::Dir(d) if d.conclusion() == xid => {
                    rules[ri] = None;
                    Reinstatement::DeducedBy { rule: rule.render(system) }
                }
                WorkRule::Dir(d) => {
                    if d.premises().len() < 2 {
                        continue;
                    }
                    let rest = d.premises().iter().copied().filter(|&p| p != xid);
                    rules[ri] = Some(WorkRule::Dir(
                        DirectedRule::new(rest, d.conclusion()).with_label(d.label().map(str::to_string)),
                    ));
                    Reinstatement::MustGuess
                }
            };
            alive[x] = false;
            eliminated.push(EliminatedVar { name: system.names()[x].clone(), reinstate });
            continue 'outer;
        }
        break;
    }

    if eliminated.is_empty() {
        return (system.clone(), eliminated);
    }

    let mut map = vec![None; n];
    let mut names = Vec::new();
    for i in 0..n {
        if alive[i] {
            map[i] = Some(PropId(names.len()));
            names.push(system.names()[i].clone());
        }
    }
    let kept = rules.into_iter().flatten();
    let mut sym = Vec::new();
    let mut dir = Vec::new();
    for r in kept {
        match r {
            WorkRule::Sym(s) => sym.push(s),
            WorkRule::Dir(d) => dir.push(d),
        }
    }
    let staged = DeductionSystem::from_parts(system.name().map(str::to_string), system.names().to_vec(), sym, dir);
    (rewrite(&staged, names, &map), eliminated)
}

/// Outcome of [`simplify`].
#[derive(Clone, Debug, Serialize)]
pub struct Simplified {
    #[serde(skip)]
    pub system: DeductionSystem,
    /// Removed name -> representative, over all merge rounds.
    pub merged: BTreeMap<String, String>,
    pub eliminated: Vec<EliminatedVar>,
    pub removed_variables: usize,
    pub removed_rules: usize,
}

impl Simplified {
    /// Names that every full solution of the original system must guess on
    /// top of a solution of the reduced one.
    pub fn must_guess(&self) -> Vec<&str> {
        self.eliminated
            .iter()
            .filter(|e| e.reinstate == Reinstatement::MustGuess)
            .map(|e| e.name.as_str())
            .collect()
    }

    /// Lifts a guess set of the reduced system to one of the original.
    pub fn lift_guess<'a>(&'a self, reduced: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let mut out: Vec<String> = reduced.into_iter().map(str::to_string).collect();
        out.extend(self.must_guess().into_iter().map(str::to_string));
        out
    }
}

/// Equalities first, then independent variables, repeated until stable.
pub fn simplify(system: &DeductionSystem) -> Simplified {
    let mut current = system.clone();
    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    let mut eliminated = Vec::new();
    loop {
        let (after_merge, map) = merge_equalities(&current);
        let (after_elim, elim) = eliminate_independent(&after_merge);
        let stable = map.merged.is_empty() && elim.is_empty();
        for (k, v) in map.merged {
            // earlier entries pointing at a now-merged name follow it
            for rep in merged.values_mut() {
                if *rep == k {
                    *rep = v.clone();
                }
            }
            merged.insert(k, v);
        }
        eliminated.extend(elim);
        current = after_elim;
        if stable {
            break;
        }
    }
    Simplified {
        removed_variables: system.len() - current.len(),
        removed_rules: system.rule_count().saturating_sub(current.rule_count()),
        system: current,
        merged,
        eliminated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ciphers;
    use crate::dsl::parse_system;

    fn sys(text: &str) -> DeductionSystem {
        parse_system(text).unwrap()
    }

    #[test]
    fn expands_triple() {
        let s = expand_rules(&sys("props: x y z\n[x, y, z]"));
        let rules: Vec<String> = s.directed_rules().iter().map(|r| s.display_rule(r)).collect();
        assert_eq!(rules, vec!["y z => x", "x z => y", "x y => z"]);
        assert!(s.symmetric_rules().is_empty());
    }

    #[test]
    fn expand_is_identity_on_directed() {
        let toy = ciphers::toy();
        assert_eq!(expand_rules(&toy), toy);
    }

    #[test]
    fn expand_drops_duplicates() {
        let s = expand_rules(&sys("props: x y z\n[x, y, z]\n[z, y, x]\ny z => x\n"));
        assert_eq!(s.directed_rules().len(), 3);
        assert_eq!(expand_rules(&s), s);
    }

    #[test]
    fn toy_has_no_equalities() {
        let (s, map) = merge_equalities(&ciphers::toy());
        assert_eq!(s, ciphers::toy());
        assert!(map.merged.is_empty());
        assert_eq!((map.removed_variables, map.removed_rules), (0, 0));
    }

    #[test]
    fn chained_equalities_share_representative() {
        let (s, map) = merge_equalities(&sys("props: a b c d\n[a, b]\n[b, c]\n[c, d, a]\n"));
        assert_eq!(s.names(), &["a".to_string(), "d".to_string()]);
        assert_eq!(map.merged.get("b").map(String::as_str), Some("a"));
        assert_eq!(map.merged.get("c").map(String::as_str), Some("a"));
        assert_eq!(map.target, vec![PropId(0), PropId(0), PropId(0), PropId(1)]);
        // [c, d, a] with c = a leaves only a => d
        assert_eq!(s.symmetric_rules().len(), 0);
        let rules: Vec<String> = s.directed_rules().iter().map(|r| s.display_rule(r)).collect();
        assert_eq!(rules, vec!["a => d"]);
    }

    #[test]
    fn mutual_directed_pair_merges() {
        let (s, map) = merge_equalities(&sys("props: a b c\na => b\nb => a\nb c => a\n"));
        assert_eq!(s.len(), 2);
        assert_eq!(map.removed_rules, 3);
        let (s2, map2) = merge_equalities(&s);
        assert_eq!(s2, s);
        assert!(map2.merged.is_empty());
    }

    #[test]
    fn raw_snow_merges_into_snow_model() {
        let raw = ciphers::build_snow2_raw(13);
        let (merged, map) = merge_equalities(&raw);
        let snow = ciphers::build_snow2(13);
        assert_eq!(merged.len(), snow.len());
        assert_eq!(merged.rule_count(), snow.rule_count());
        // R2_t -> R_t, R1_12 -> R_13
        let rename = |n: &str| -> String {
            if let Some(i) = n.strip_prefix("R2_") {
                format!("R_{i}")
            } else if let Some(i) = n.strip_prefix("R1_") {
                format!("R_{}", i.parse::<usize>().unwrap() + 1)
            } else {
                n.to_string()
            }
        };
        let renamed: HashSet<(Vec<String>, String)> = expand_rules(&merged)
            .directed_rules()
            .iter()
            .map(|r| {
                let mut p: Vec<String> = r.premises().iter().map(|&x| rename(merged.prop_name(x))).collect();
                p.sort();
                (p, rename(merged.prop_name(r.conclusion())))
            })
            .collect();
        let expected: HashSet<(Vec<String>, String)> = expand_rules(&snow)
            .directed_rules()
            .iter()
            .map(|r| {
                let mut p: Vec<String> = r.premises().iter().map(|&x| snow.prop_name(x).to_string()).collect();
                p.sort();
                (p, snow.prop_name(r.conclusion()).to_string())
            })
            .collect();
        assert_eq!(renamed, expected);
        assert_eq!(map.removed_variables, map.removed_rules);
    }

    #[test]
    fn independent_symmetric_member() {
        let s = sys("props: x y z w\n[x, y, z]\n[y, z, w]\nw => y\nz => w\n");
        let (r, elim) = eliminate_independent(&s);
        assert_eq!(elim.len(), 1);
        assert_eq!(elim[0].name, "x");
        assert!(matches!(elim[0].reinstate, Reinstatement::DeducedBy { .. }));
        assert_eq!(r.len(), 3);
        assert_eq!(r.rule_count(), 3);
    }

    #[test]
    fn independent_conclusion() {
        let s = sys("props: a b c d\na b => c\na => b\nb => a\nd a => b\nb d => a\n");
        let (r, elim) = eliminate_independent(&s);
        assert_eq!(elim.iter().map(|e| e.name.as_str()).collect::<Vec<_>>(), vec!["c"]);
        assert_eq!(r.len(), 3);
        assert_eq!(r.rule_count(), 4);
    }

    #[test]
    fn independent_premise_must_be_guessed() {
        let s = sys("props: a b c x\na x => c\na => b\nb => a\nc => a\nb c => a\n");
        let (r, elim) = eliminate_independent(&s);
        assert_eq!(elim, vec![EliminatedVar { name: "x".into(), reinstate: Reinstatement::MustGuess }]);
        assert!(r.directed_rules().iter().any(|d| r.display_rule(d) == "a => c"));
    }

    #[test]
    fn two_independents_skip_rule() {
        let s = sys("props: a b c\n[a, b, c]\n");
        let (r, elim) = eliminate_independent(&s);
        assert!(elim.is_empty());
        assert_eq!(r, s);
    }

    #[test]
    fn toy_unchanged_by_elimination() {
        let occ = ciphers::toy().occurrences();
        assert!(occ.iter().all(|&c| c >= 2), "{occ:?}");
        let (r, elim) = eliminate_independent(&ciphers::toy());
        assert!(elim.is_empty());
        assert_eq!(r, ciphers::toy());
    }

    #[test]
    fn simplify_is_idempotent() {
        let s = sys("props: a b c d e\n[a, b]\n[b, c, d]\n[c, d, e]\nd e => a\n");
        let once = simplify(&s);
        let twice = simplify(&once.system);
        assert_eq!(twice.system, once.system);
        assert!(twice.merged.is_empty() && twice.eliminated.is_empty());
    }
}
