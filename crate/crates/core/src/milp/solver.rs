//! Branch and bound over 0-1 variables with integer bounds propagation.
//!
//! Every constraint is normalized to `Σ w·lit ≥ b` with `w > 0`. Each keeps a
//! slack `Σ_{lit not false} w − b`, updated as literals are fixed: a negative
//! slack is a conflict and an unfixed literal with `w > slack` is forced.
//! Rows that are plain clauses use two watched literals instead.
//!
//! Conflicts are explained by the false literals of the rows involved and
//! turned into learned clauses (first UIP), so the search backjumps instead
//! of revisiting the same dead end. Branching starts from copy-0 state
//! variables by occurrence count with value 1, then follows conflict
//! activity with saved phases and Luby restarts. Each incumbent adds the cutoff
//! `objective ≥ best + 1` (or `≤ best − 1`), which is where the bound on
//! unfixed objective variables comes from.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::instance::{Constraint, MilpInstance, Relation, Sense, VarId};
use super::MilpError;

#[derive(Clone, Debug)]
pub struct Limits {
    pub time_budget: Option<Duration>,
    /// Maximum number of branching decisions.
    pub node_budget: Option<u64>,
    /// 0 keeps the plain tie order; other values shuffle branching ties.
    pub seed: u64,
    /// Values above 1 race that many differently seeded searches.
    pub threads: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { time_budget: Some(Duration::from_secs(600)), node_budget: None, seed: 0, threads: 1 }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits { time_budget: None, ..Limits::default() }
    }

    pub fn with_time(mut self, t: Duration) -> Self {
        self.time_budget = Some(t);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub nodes: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub incumbents: u64,
    #[serde(skip)]
    pub wall: Duration,
}

/// Wall time is left out of comparisons.
impl PartialEq for Stats {
    fn eq(&self, o: &Self) -> bool {
        (self.nodes, self.propagations, self.conflicts, self.learned, self.incumbents)
            == (o.nodes, o.propagations, o.conflicts, o.learned, o.incumbents)
    }
}

impl Eq for Stats {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub status: Status,
    pub objective: Option<i64>,
    pub assignment: BTreeMap<String, u8>,
    pub stats: Stats,
}

impl Solution {
    pub fn has_assignment(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::Feasible)
    }

    pub fn value(&self, name: &str) -> Option<u8> {
        self.assignment.get(name).copied()
    }

    /// Dense values in the instance's variable order.
    pub fn values(&self, instance: &MilpInstance) -> Option<Vec<i64>> {
        instance
            .var_names()
            .iter()
            .map(|n| self.assignment.get(n).map(|&v| v as i64))
            .collect()
    }

    pub(crate) fn from_values(instance: &MilpInstance, status: Status, values: &[i64], stats: Stats) -> Self {
        let assignment = instance
            .var_names()
            .iter()
            .zip(values)
            .map(|(n, &v)| (n.clone(), v as u8))
            .collect();
        Solution { status, objective: Some(instance.objective_value(values)), assignment, stats }
    }
}

type Lit = u32;

fn mk_lit(v: usize, positive: bool) -> Lit {
    (v as u32) << 1 | u32::from(!positive)
}

fn lit_var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn lit_positive(l: Lit) -> bool {
    l & 1 == 0
}

fn lit_val(value: &[i8], l: Lit) -> Option<bool> {
    match value[lit_var(l)] {
        -1 => None,
        v => Some((v == 1) == lit_positive(l)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ref {
    Clause(u32),
    Pb(u32),
}

struct Clause {
    lits: Vec<Lit>,
    learned: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
    origin: Option<usize>,
}

struct PbCon {
    /// Sorted by weight, heaviest first.
    lits: Vec<(Lit, i64)>,
    max_w: i64,
    origin: Option<usize>,
}

/// `Σ coef·x  rel  rhs` as one or two `Σ w·lit ≥ b` rows; rows that hold
/// trivially are dropped and weights are capped at the bound.
fn normalize(terms: &[(VarId, i64)], relation: Relation, rhs: i64) -> Vec<(Vec<(Lit, i64)>, i64)> {
    let mut merged: BTreeMap<usize, i64> = BTreeMap::new();
    for &(v, c) in terms {
        *merged.entry(v.0).or_default() += c;
    }
    let ge = |sign: i64| {
        // Σ sign·c·x ≥ sign·rhs
        let mut bound = sign * rhs;
        let mut lits = Vec::new();
        for (&v, &c) in &merged {
            let a = sign * c;
            if a > 0 {
                lits.push((mk_lit(v, true), a));
            } else if a < 0 {
                // a·x = a − a·(1 − x)
                bound -= a;
                lits.push((mk_lit(v, false), -a));
            }
        }
        (lits, bound)
    };
    let rows = match relation {
        Relation::Ge => vec![ge(1)],
        Relation::Le => vec![ge(-1)],
        Relation::Eq => vec![ge(1), ge(-1)],
    };
    rows.into_iter()
        .filter(|(_, b)| *b > 0)
        .map(|(mut lits, b)| {
            for l in lits.iter_mut() {
                l.1 = l.1.min(b);
            }
            lits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            (lits, b)
        })
        .collect()
}

/// Branching order before any conflict: copy-0 state variables (`x{i}_c0`)
/// by decreasing occurrence count, then everything else by index.
fn branch_order(instance: &MilpInstance, seed: u64) -> (Vec<usize>, usize) {
    let n = instance.num_vars();
    let mut occ = vec![0usize; n];
    for c in instance.constraints() {
        for &(v, _) in &c.terms {
            occ[v.0] += 1;
        }
    }
    let is_initial_state = |name: &str| {
        name.strip_prefix('x')
            .and_then(|r| r.strip_suffix("_c0"))
            .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first: Vec<(usize, u64, usize)> = (0..n)
        .filter(|&v| is_initial_state(instance.var_name(VarId(v))))
        .map(|v| (occ[v], if seed == 0 { 0 } else { rng.gen() }, v))
        .collect();
    first.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let n_first = first.len();
    let mut order: Vec<usize> = first.iter().map(|t| t.2).collect();
    let mut taken = vec![false; n];
    for &v in &order {
        taken[v] = true;
    }
    order.extend((0..n).filter(|&v| !taken[v]));
    (order, n_first)
}

/// Max-heap of variables by activity, ties to the lower static rank.
struct VarHeap {
    heap: Vec<usize>,
    index: Vec<Option<usize>>,
}

impl VarHeap {
    fn better(act: &[f64], rank: &[usize], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && rank[a] < rank[b])
    }

    fn up(&mut self, mut i: usize, act: &[f64], rank: &[usize]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, rank, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.index[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64], rank: &[usize]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && Self::better(act, rank, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::better(act, rank, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.index[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.index[v] = Some(i);
    }

    fn insert(&mut self, v: usize, act: &[f64], rank: &[usize]) {
        if self.index[v].is_some() {
            return;
        }
        self.heap.push(v);
        self.up(self.heap.len() - 1, act, rank);
    }

    fn pop(&mut self, act: &[f64], rank: &[usize]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.down(0, act, rank);
        }
        Some(top)
    }

    fn bumped(&mut self, v: usize, act: &[f64], rank: &[usize]) {
        if let Some(i) = self.index[v] {
            self.up(i, act, rank);
        }
    }
}

/// i-th element (from 0) of the Luby sequence 1 1 2 1 1 2 4 ...
fn luby(mut i: u64) -> u64 {
    let mut size = 1;
    let mut seq = 0;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

struct Engine {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    pbs: Vec<PbCon>,
    slack: Vec<i64>,
    pb_occ: Vec<Vec<(u32, i64)>>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<Ref>>,
    pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    conflict: Option<Ref>,
    /// Set once the rows added so far contradict each other at level 0.
    unsat: Option<Option<usize>>,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    rank: Vec<usize>,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    live_learned: usize,
    stats: Stats,
}

impl Engine {
    fn new(instance: &MilpInstance, seed: u64) -> Self {
        let n = instance.num_vars();
        let (order, n_first) = branch_order(instance, seed);
        let mut rank = vec![0; n];
        let mut activity = vec![0.0; n];
        let mut phase = vec![false; n];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
            if i < n_first {
                // the static order decides first until conflicts take over
                activity[v] = (n_first - i) as f64 * 1e-6;
                phase[v] = true;
            }
        }
        let mut e = Engine {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            pbs: Vec::new(),
            slack: Vec::new(),
            pb_occ: vec![Vec::new(); 2 * n],
            value: vec![-1; n],
            level: vec![0; n],
            reason: vec![None; n],
            pos: vec![0; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            conflict: None,
            unsat: None,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            rank,
            heap: VarHeap { heap: Vec::with_capacity(n), index: vec![None; n] },
            phase,
            seen: vec![false; n],
            live_learned: 0,
            stats: Stats::default(),
        };
        for v in 0..n {
            e.heap.insert(v, &e.activity, &e.rank);
        }
        for (i, c) in instance.constraints().iter().enumerate() {
            e.add_constraint(c, Some(i));
        }
        e
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        lit_val(&self.value, l)
    }

    fn is_false(&self, l: Lit) -> bool {
        self.lit_value(l) == Some(false)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a problem row at level 0.
    fn add_constraint(&mut self, c: &Constraint, origin: Option<usize>) {
        debug_assert_eq!(self.decision_level(), 0);
        for (lits, bound) in normalize(&c.terms, c.relation, c.rhs) {
            if self.unsat.is_some() {
                return;
            }
            if bound == 1 {
                self.add_root_clause(lits.into_iter().map(|(l, _)| l).collect(), origin);
            } else {
                self.add_pb(lits, bound, origin);
            }
        }
    }

    fn add_root_clause(&mut self, lits: Vec<Lit>, origin: Option<usize>) {
        if lits.iter().any(|&l| self.lit_value(l) == Some(true)) {
            return;
        }
        let lits: Vec<Lit> = lits.into_iter().filter(|&l| !self.is_false(l)).collect();
        match lits.len() {
            0 => self.unsat = Some(origin),
            1 => self.assign(lits[0], None),
            _ => {
                self.attach(Clause { lits, learned: false, deleted: false, lbd: 0, activity: 0.0, origin });
            }
        }
    }

    fn attach(&mut self, clause: Clause) -> u32 {
        let cid = self.clauses.len() as u32;
        self.watches[clause.lits[0] as usize].push(cid);
        self.watches[clause.lits[1] as usize].push(cid);
        self.clauses.push(clause);
        cid
    }

    fn add_pb(&mut self, lits: Vec<(Lit, i64)>, bound: i64, origin: Option<usize>) {
        let pid = self.pbs.len() as u32;
        let mut slack = -bound;
        for &(l, w) in &lits {
            self.pb_occ[l as usize].push((pid, w));
            if !self.is_false(l) {
                slack += w;
            }
        }
        let max_w = lits.first().map_or(0, |x| x.1);
        self.pbs.push(PbCon { lits, max_w, origin });
        self.slack.push(slack);
        if slack < 0 {
            self.unsat = Some(origin);
        } else {
            self.scan_pb(pid);
        }
    }

    fn assign(&mut self, l: Lit, reason: Option<Ref>) {
        let v = lit_var(l);
        debug_assert_eq!(self.value[v], -1);
        self.value[v] = i8::from(lit_positive(l));
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        let falsified = (l ^ 1) as usize;
        for k in 0..self.pb_occ[falsified].len() {
            let (c, w) = self.pb_occ[falsified][k];
            self.slack[c as usize] -= w;
            if self.slack[c as usize] < 0 && self.conflict.is_none() {
                self.conflict = Some(Ref::Pb(c));
            }
        }
    }

    /// Forces every unfixed literal heavier than the slack.
    fn scan_pb(&mut self, c: u32) {
        let ci = c as usize;
        if self.slack[ci] >= self.pbs[ci].max_w {
            return;
        }
        for k in 0..self.pbs[ci].lits.len() {
            if self.conflict.is_some() {
                return;
            }
            let (l, w) = self.pbs[ci].lits[k];
            if w <= self.slack[ci] {
                break;
            }
            if self.value[lit_var(l)] == -1 {
                self.assign(l, Some(Ref::Pb(c)));
                self.stats.propagations += 1;
            }
        }
    }

    fn propagate_clauses(&mut self, false_lit: Lit) {
        let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
        let mut i = 0;
        let mut j = 0;
        while i < ws.len() {
            let cid = ws[i];
            i += 1;
            let c = &mut self.clauses[cid as usize];
            if c.deleted {
                continue;
            }
            if c.lits[0] == false_lit {
                c.lits.swap(0, 1);
            }
            let first = c.lits[0];
            if lit_val(&self.value, first) == Some(true) {
                ws[j] = cid;
                j += 1;
                continue;
            }
            let mut moved = false;
            for k in 2..c.lits.len() {
                if lit_val(&self.value, c.lits[k]) != Some(false) {
                    c.lits.swap(1, k);
                    self.watches[c.lits[1] as usize].push(cid);
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            ws[j] = cid;
            j += 1;
            if lit_val(&self.value, first) == Some(false) {
                self.conflict = Some(Ref::Clause(cid));
                while i < ws.len() {
                    ws[j] = ws[i];
                    j += 1;
                    i += 1;
                }
            } else {
                self.assign(first, Some(Ref::Clause(cid)));
                self.stats.propagations += 1;
            }
            if self.conflict.is_some() {
                while i < ws.len() {
                    ws[j] = ws[i];
                    j += 1;
                    i += 1;
                }
            }
        }
        ws.truncate(j);
        self.watches[false_lit as usize] = ws;
    }

    fn propagate(&mut self) -> Option<Ref> {
        while self.conflict.is_none() && self.qhead < self.trail.len() {
            let false_lit = self.trail[self.qhead] ^ 1;
            self.qhead += 1;
            self.propagate_clauses(false_lit);
            if self.conflict.is_some() {
                break;
            }
            for k in 0..self.pb_occ[false_lit as usize].len() {
                let c = self.pb_occ[false_lit as usize][k].0;
                self.scan_pb(c);
                if self.conflict.is_some() {
                    break;
                }
            }
        }
        self.conflict
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = lit_var(l);
            let falsified = (l ^ 1) as usize;
            for k in 0..self.pb_occ[falsified].len() {
                let (c, w) = self.pb_occ[falsified][k];
                self.slack[c as usize] += w;
            }
            self.phase[v] = lit_positive(l);
            self.value[v] = -1;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity, &self.rank);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
        self.conflict = None;
    }

    /// False literals behind `r`: for an implied literal `p`, those fixed
    /// before it; for a conflict (`p = None`), all of them.
    fn explain(&self, r: Ref, p: Option<Lit>, out: &mut Vec<Lit>) {
        out.clear();
        match r {
            Ref::Clause(c) => out.extend(self.clauses[c as usize].lits.iter().copied().filter(|&l| Some(l) != p)),
            Ref::Pb(c) => {
                let before = p.map(|p| self.pos[lit_var(p)] as usize);
                for &(l, _) in &self.pbs[c as usize].lits {
                    if self.is_false(l) && before.is_none_or(|b| (self.pos[lit_var(l)] as usize) < b) {
                        out.push(l);
                    }
                }
            }
        }
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity, &self.rank);
    }

    fn bump_clause(&mut self, r: Ref) {
        if let Ref::Clause(c) = r {
            let cl = &mut self.clauses[c as usize];
            if cl.learned {
                cl.activity += self.cla_inc;
                if cl.activity > 1e20 {
                    for c in self.clauses.iter_mut().filter(|c| c.learned) {
                        c.activity *= 1e-20;
                    }
                    self.cla_inc *= 1e-20;
                }
            }
        }
    }

    /// First-UIP learning. Returns the clause (asserting literal first),
    /// the backjump level and the clause's level count.
    fn analyze(&mut self, conflict: Ref) -> (Vec<Lit>, usize, u32) {
        let current = self.decision_level() as u32;
        let mut learnt: Vec<Lit> = vec![0];
        let mut reason_lits = Vec::new();
        self.explain(conflict, None, &mut reason_lits);
        self.bump_clause(conflict);
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        let uip;
        loop {
            for &q in &reason_lits {
                let v = lit_var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] == current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[lit_var(self.trail[idx])] {
                    break;
                }
            }
            let p = self.trail[idx];
            let v = lit_var(p);
            self.seen[v] = false;
            pending -= 1;
            if pending == 0 {
                uip = p;
                break;
            }
            let r = self.reason[v].expect("implied literal without a reason");
            self.bump_clause(r);
            self.explain(r, Some(p), &mut reason_lits);
        }
        learnt[0] = uip ^ 1;

        // drop literals implied by the rest of the clause
        let mut kept = vec![learnt[0]];
        let mut buf = Vec::new();
        for &q in &learnt[1..] {
            let v = lit_var(q);
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => {
                    self.explain(r, Some(q ^ 1), &mut buf);
                    buf.iter().all(|&x| self.seen[lit_var(x)] || self.level[lit_var(x)] == 0)
                }
            };
            if !redundant {
                kept.push(q);
            }
        }
        for &l in &learnt[1..] {
            self.seen[lit_var(l)] = false;
        }
        let mut learnt = kept;

        let mut bt = 0;
        if learnt.len() > 1 {
            let best = (1..learnt.len()).max_by_key(|&i| (self.level[lit_var(learnt[i])], std::cmp::Reverse(i))).unwrap();
            learnt.swap(1, best);
            bt = self.level[lit_var(learnt[1])] as usize;
        }
        let mut levels: Vec<u32> = learnt.iter().map(|&l| self.level[lit_var(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        (learnt, bt, levels.len() as u32)
    }

    fn add_learnt(&mut self, learnt: Vec<Lit>, lbd: u32) {
        self.stats.learned += 1;
        let asserting = learnt[0];
        if learnt.len() == 1 {
            self.assign(asserting, None);
            return;
        }
        let cid = self.attach(Clause { lits: learnt, learned: true, deleted: false, lbd, activity: self.cla_inc, origin: None });
        self.live_learned += 1;
        self.assign(asserting, Some(Ref::Clause(cid)));
    }

    fn decay(&mut self) {
        self.var_inc /= 0.95;
        self.cla_inc /= 0.999;
    }

    /// Deletes the less useful half of the learned clauses, keeping those
    /// with two or fewer levels and any that currently justify a literal.
    fn reduce_db(&mut self) {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| {
                let cl = &self.clauses[c];
                cl.learned && !cl.deleted && cl.lbd > 2 && !self.locked(c)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a], &self.clauses[b]);
            cb.lbd.cmp(&ca.lbd).then(ca.activity.total_cmp(&cb.activity)).then(a.cmp(&b))
        });
        for &c in &candidates[..candidates.len() / 2] {
            let cl = &mut self.clauses[c];
            cl.deleted = true;
            cl.lits = Vec::new();
            self.live_learned -= 1;
        }
    }

    fn locked(&self, c: usize) -> bool {
        let l = self.clauses[c].lits[0];
        self.lit_value(l) == Some(true) && self.reason[lit_var(l)] == Some(Ref::Clause(c as u32))
    }

    fn decide(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity, &self.rank) {
            if self.value[v] == -1 {
                return Some(mk_lit(v, self.phase[v]));
            }
        }
        None
    }

    fn values(&self) -> Vec<i64> {
        self.value.iter().map(|&v| i64::from(v.max(0))).collect()
    }

    fn origin(&self, r: Ref) -> Option<usize> {
        match r {
            Ref::Clause(c) => self.clauses[c as usize].origin,
            Ref::Pb(c) => self.pbs[c as usize].origin,
        }
    }
}

struct Outcome {
    best: Option<Vec<i64>>,
    proven: bool,
    stats: Stats,
}

const RESTART_UNIT: u64 = 100;

fn search(instance: &MilpInstance, limits: &Limits, seed: u64, stop: &AtomicBool) -> Outcome {
    let start = Instant::now();
    let mut e = Engine::new(instance, seed);
    let obj = instance.objective();
    let best_possible: i64 = obj
        .terms
        .iter()
        .map(|&(_, c)| match obj.sense {
            Sense::Maximize => c.max(0),
            Sense::Minimize => c.min(0),
        })
        .sum();
    let mut best: Option<Vec<i64>> = None;
    let mut proven = e.unsat.is_some();
    let mut tick = 0u32;
    let mut restarts = 0u64;
    let mut restart_at = RESTART_UNIT * luby(0);
    let mut since_restart = 0u64;
    let mut max_learned = 2000 + instance.constraints().len() / 4;

    while !proven {
        if let Some(c) = e.propagate() {
            e.stats.conflicts += 1;
            since_restart += 1;
            if e.decision_level() == 0 {
                proven = true;
                break;
            }
            let (learnt, bt, lbd) = e.analyze(c);
            e.cancel_until(bt);
            e.add_learnt(learnt, lbd);
            e.decay();
            continue;
        }
        tick = tick.wrapping_add(1);
        if tick.is_multiple_of(256) {
            let timed_out = limits.time_budget.is_some_and(|t| start.elapsed() >= t);
            if timed_out || stop.load(Ordering::Relaxed) {
                break;
            }
        }
        if limits.node_budget.is_some_and(|n| e.stats.nodes >= n) {
            break;
        }
        if since_restart >= restart_at {
            restarts += 1;
            since_restart = 0;
            restart_at = RESTART_UNIT * luby(restarts);
            e.cancel_until(0);
            continue;
        }
        if e.live_learned >= max_learned {
            e.reduce_db();
            max_learned += max_learned / 10;
        }
        match e.decide() {
            Some(l) => {
                e.stats.nodes += 1;
                e.trail_lim.push(e.trail.len());
                e.assign(l, None);
            }
            None => {
                let values = e.values();
                let z = instance.objective_value(&values);
                e.stats.incumbents += 1;
                best = Some(values);
                if z == best_possible {
                    proven = true;
                    break;
                }
                e.cancel_until(0);
                let cutoff = match obj.sense {
                    Sense::Maximize => Constraint::new(obj.terms.clone(), Relation::Ge, z + 1),
                    Sense::Minimize => Constraint::new(obj.terms.clone(), Relation::Le, z - 1),
                };
                e.add_constraint(&cutoff, None);
                if e.unsat.is_some() {
                    proven = true;
                }
            }
        }
    }
    e.stats.wall = start.elapsed();
    Outcome { best, proven, stats: e.stats }
}

fn finish(instance: &MilpInstance, out: Outcome) -> Solution {
    let status = match (&out.best, out.proven) {
        (Some(_), true) => Status::Optimal,
        (Some(_), false) => Status::Feasible,
        (None, true) => Status::Infeasible,
        (None, false) => Status::TimeLimit,
    };
    match out.best {
        Some(values) => Solution::from_values(instance, status, &values, out.stats),
        None => Solution { status, objective: None, assignment: BTreeMap::new(), stats: out.stats },
    }
}

/// Solves a pure 0-1 program. Single-threaded runs are deterministic.
pub fn solve(instance: &MilpInstance, limits: &Limits) -> Result<Solution, MilpError> {
    instance.check()?;
    let stop = AtomicBool::new(false);
    if limits.threads <= 1 {
        return Ok(finish(instance, search(instance, limits, limits.seed, &stop)));
    }
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..limits.threads as u64)
            .map(|i| {
                let stop = &stop;
                s.spawn(move || {
                    let seed = if i == 0 { limits.seed } else { limits.seed.wrapping_add(i).max(1) };
                    let out = search(instance, limits, seed, stop);
                    if out.proven {
                        stop.store(true, Ordering::Relaxed);
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let sense = instance.objective().sense;
    let score = |o: &Outcome| {
        let z = o.best.as_ref().map(|v| instance.objective_value(v));
        let z = match (sense, z) {
            (_, None) => i64::MIN,
            (Sense::Maximize, Some(z)) => z,
            (Sense::Minimize, Some(z)) => -z,
        };
        (o.proven, z)
    };
    // a proof from any thread settles the optimum; otherwise keep the best incumbent
    let best = outcomes
        .into_iter()
        .enumerate()
        .max_by_key(|(i, o)| (score(o), std::cmp::Reverse(*i)))
        .map(|(_, o)| o)
        .unwrap();
    Ok(finish(instance, best))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Nothing beyond the given partial assignment follows.
    Fixpoint,
    /// Newly forced values, ascending by variable.
    Fixed(Vec<(VarId, bool)>),
    /// The named constraint cannot be satisfied; `None` when no single row
    /// is to blame (the partial assignment contradicts itself or a value
    /// forced at the root).
    Conflict { constraint: Option<usize> },
}

/// Bounds propagation from a partial assignment to its fixpoint.
pub fn propagate(instance: &MilpInstance, partial: &[(VarId, bool)]) -> Result<Propagation, MilpError> {
    instance.check()?;
    let mut e = Engine::new(instance, 0);
    if let Some(origin) = e.unsat {
        return Ok(Propagation::Conflict { constraint: origin });
    }
    if let Some(c) = e.propagate() {
        return Ok(Propagation::Conflict { constraint: e.origin(c) });
    }
    let mut given = vec![false; instance.num_vars()];
    for &(v, val) in partial {
        if v.0 >= instance.num_vars() {
            return Err(MilpError::MalformedInstance(format!("partial fixes undeclared variable #{}", v.0)));
        }
        given[v.0] = true;
        match e.lit_value(mk_lit(v.0, val)) {
            Some(true) => {}
            Some(false) => {
                let constraint = e.reason[v.0].and_then(|r| e.origin(r));
                return Ok(Propagation::Conflict { constraint });
            }
            None => e.assign(mk_lit(v.0, val), None),
        }
        if let Some(c) = e.propagate() {
            return Ok(Propagation::Conflict { constraint: e.origin(c) });
        }
    }
    let mut fixed: Vec<(VarId, bool)> = e
        .trail
        .iter()
        .filter(|&&l| !given[lit_var(l)])
        .map(|&l| (VarId(lit_var(l)), lit_positive(l)))
        .collect();
    fixed.sort();
    Ok(if fixed.is_empty() { Propagation::Fixpoint } else { Propagation::Fixed(fixed) })
}
