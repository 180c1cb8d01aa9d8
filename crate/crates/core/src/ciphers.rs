//! Deduction-system models of two word-oriented stream ciphers, plus the
//! four-proposition toy system.
//!
//! Each keystream relation becomes a symmetric rule over the words it
//! mentions; keystream words and the (public) S-box layers are known and
//! therefore dropped. A relation is instantiated for every `t >= 0` whose
//! indices all fall inside the model's state.

use serde::{Deserialize, Serialize};

use crate::system::{DeductionSystem, DirectedRule, PropId, SymmetricRule};

/// `p2 => p1`, `p3 p4 => p1`, `p1 p3 => p2`, `p1 p4 => p3`, `p1 p2 => p4`.
pub fn toy() -> DeductionSystem {
    let mut s = DeductionSystem::new(["p1", "p2", "p3", "p4"]);
    let p = PropId;
    s.push_directed(DirectedRule::new([p(1)], p(0)))
        .push_directed(DirectedRule::new([p(2), p(3)], p(0)))
        .push_directed(DirectedRule::new([p(0), p(2)], p(1)))
        .push_directed(DirectedRule::new([p(0), p(3)], p(2)))
        .push_directed(DirectedRule::new([p(0), p(1)], p(3)));
    s
}

/// Name table for a model made of indexed word families.
struct Families {
    names: Vec<String>,
    ranges: Vec<(&'static str, usize, usize)>, // (prefix, first id, length)
}

impl Families {
    fn new(spec: &[(&'static str, usize)]) -> Self {
        let mut names = Vec::new();
        let mut ranges = Vec::new();
        for &(prefix, len) in spec {
            ranges.push((prefix, names.len(), len));
            names.extend((0..len).map(|i| format!("{prefix}_{i}")));
        }
        Families { names, ranges }
    }

    /// `prefix_index`, if in range.
    fn get(&self, prefix: &str, index: usize) -> Option<PropId> {
        let &(_, first, len) = self.ranges.iter().find(|r| r.0 == prefix)?;
        (index < len).then(|| PropId(first + index))
    }

    fn rule(&self, terms: &[(&str, usize)]) -> Option<Vec<PropId>> {
        terms.iter().map(|&(p, i)| self.get(p, i)).collect()
    }

    fn empty_system(&self, name: String) -> DeductionSystem {
        DeductionSystem::new(self.names.iter().cloned()).with_name(name)
    }
}

/// Adds one symmetric rule per `t` in `0..=max_t` whose `(family, index)`
/// terms are all in range.
fn instantiate<F>(fam: &Families, sys: &mut DeductionSystem, label: &str, max_t: usize, terms: F)
where
    F: Fn(usize) -> Vec<(&'static str, usize)>,
{
    for t in 0..=max_t {
        if let Some(members) = fam.rule(&terms(t)) {
            sys.push_symmetric(SymmetricRule::labeled(members, label));
        }
    }
}

/// SNOW 2.0 after the `R1_t = R2_{t+1}` merge, with `R` standing for `R2`.
/// State: `s_0 .. s_{14+T}`, `R_0 .. R_T` (`2T + 16` words).
///
/// * `13-1`: `[s_{t+16}, s_{t+11}, s_{t+2}, s_t]` (LFSR feedback)
/// * `13-2`: `[s_{t+15}, R_{t+1}, R_t, s_t]` (keystream word `z_t`)
/// * `13-3`: `[R_{t+2}, s_{t+5}, R_t]` (FSM update)
pub fn build_snow2(keystream_len: usize) -> DeductionSystem {
    let t_len = keystream_len;
    let fam = Families::new(&[("s", t_len + 15), ("R", t_len + 1)]);
    let mut sys = fam.empty_system(format!("snow2_t{t_len}"));
    let max_t = t_len + 15;
    instantiate(&fam, &mut sys, "13-1", max_t, |t| {
        vec![("s", t + 16), ("s", t + 11), ("s", t + 2), ("s", t)]
    });
    instantiate(&fam, &mut sys, "13-2", max_t, |t| {
        vec![("s", t + 15), ("R", t + 1), ("R", t), ("s", t)]
    });
    instantiate(&fam, &mut sys, "13-3", max_t, |t| vec![("R", t + 2), ("s", t + 5), ("R", t)]);
    sys
}

/// SNOW 2.0 before merging the two FSM registers. `R1_t`, `R2_t` range over
/// the `T` clocks whose keystream word is known, so the merge removes one
/// variable and one rule per pair `[R2_{t+1}, R1_t]` and leaves exactly the
/// model of [`build_snow2`] (up to names).
pub fn build_snow2_raw(keystream_len: usize) -> DeductionSystem {
    let t_len = keystream_len;
    let fam = Families::new(&[("s", t_len + 15), ("R2", t_len), ("R1", t_len)]);
    let mut sys = fam.empty_system(format!("snow2_raw_t{t_len}"));
    let max_t = t_len + 15;
    instantiate(&fam, &mut sys, "raw-1", max_t, |t| {
        vec![("s", t + 16), ("s", t + 11), ("s", t + 2), ("s", t)]
    });
    instantiate(&fam, &mut sys, "raw-2", max_t, |t| {
        vec![("s", t + 15), ("R1", t), ("R2", t), ("s", t)]
    });
    instantiate(&fam, &mut sys, "raw-3", max_t, |t| vec![("R1", t + 1), ("s", t + 5), ("R2", t)]);
    instantiate(&fam, &mut sys, "raw-4", max_t, |t| vec![("R2", t + 1), ("R1", t)]);
    sys
}

/// Index ranges for the Enocoro-128v2 model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeMode {
    /// `a_0..a_{T-1}`, `b..d, f, g` up to `T-2`, `e_0..e_T` (`7T - 4` words).
    #[default]
    Declared,
    /// Every family one index wider (`a_T`, `b_{T-1}`, .., `e_{T+1}`), which
    /// admits the rule instances touching `e_{T+1}`, `a_T` and friends.
    Extended,
}

impl std::str::FromStr for RangeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "declared" => Ok(RangeMode::Declared),
            "extended" => Ok(RangeMode::Extended),
            other => Err(format!("unknown range mode `{other}` (expected declared|extended)")),
        }
    }
}

/// Enocoro-128v2 with `f_t = a_t + s8(b_t)` and `g_t = a_{t+1} + s8(d_t)`
/// introduced so the linear layer turns into four 3-word relations.
///
/// Rules `20-1` .. `20-10`:
/// `[b_{t+3}, a_t, e_t]`, `[c_{t+5}, b_t, c_{t+1}]`, `[d_{t+9}, c_t, d_{t+1}]`,
/// `[e_{t+15}, d_t, e_{t+3}]`, `[f_t, a_t, b_t]`, `[g_t, a_{t+1}, d_t]`,
/// `[g_t, f_t, e_{t+2}]`, `[g_t, f_t, c_t]`, `[g_t, e_{t+2}, c_t]`,
/// `[f_t, e_{t+2}, c_t]`.
pub fn build_enocoro(keystream_len: usize, range: RangeMode) -> DeductionSystem {
    let t_len = match range {
        RangeMode::Declared => keystream_len,
        RangeMode::Extended => keystream_len + 1,
    };
    let short = t_len.saturating_sub(1);
    let fam = Families::new(&[
        ("a", t_len),
        ("b", short),
        ("c", short),
        ("d", short),
        ("e", t_len + 1),
        ("f", short),
        ("g", short),
    ]);
    let name = match range {
        RangeMode::Declared => format!("enocoro_t{keystream_len}"),
        RangeMode::Extended => format!("enocoro_t{keystream_len}_extended"),
    };
    let mut sys = fam.empty_system(name);
    let max_t = t_len + 1;
    instantiate(&fam, &mut sys, "20-1", max_t, |t| vec![("b", t + 3), ("a", t), ("e", t)]);
    instantiate(&fam, &mut sys, "20-2", max_t, |t| vec![("c", t + 5), ("b", t), ("c", t + 1)]);
    instantiate(&fam, &mut sys, "20-3", max_t, |t| vec![("d", t + 9), ("c", t), ("d", t + 1)]);
    instantiate(&fam, &mut sys, "20-4", max_t, |t| vec![("e", t + 15), ("d", t), ("e", t + 3)]);
    instantiate(&fam, &mut sys, "20-5", max_t, |t| vec![("f", t), ("a", t), ("b", t)]);
    instantiate(&fam, &mut sys, "20-6", max_t, |t| vec![("g", t), ("a", t + 1), ("d", t)]);
    instantiate(&fam, &mut sys, "20-7", max_t, |t| vec![("g", t), ("f", t), ("e", t + 2)]);
    instantiate(&fam, &mut sys, "20-8", max_t, |t| vec![("g", t), ("f", t), ("c", t)]);
    instantiate(&fam, &mut sys, "20-9", max_t, |t| vec![("g", t), ("e", t + 2), ("c", t)]);
    instantiate(&fam, &mut sys, "20-10", max_t, |t| vec![("f", t), ("e", t + 2), ("c", t)]);
    sys
}
