#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mindeduce::encoder::{parse_paths, PathRow};
use mindeduce::oracle::{self, TraceStep};
use mindeduce::preprocess::expand_rules;
use mindeduce::{DeductionSystem, PropId};

pub const SNOW_GUESS: [&str; 9] = ["R_4", "R_5", "R_6", "R_7", "R_8", "R_9", "R_10", "R_11", "R_12"];

pub const ENOCORO_GUESS: [&str; 18] = [
    "a_3", "a_5", "b_2", "b_5", "b_6", "c_2", "c_3", "c_8", "c_9", "c_10", "e_6", "e_11", "e_15", "f_3", "f_6", "g_1",
    "g_2", "g_5",
];

pub fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Row name, copy path, and the rule paths as an unordered set.
pub type Canon = (String, Vec<String>, BTreeSet<BTreeSet<String>>);

pub fn canon(rows: &[PathRow]) -> Vec<Canon> {
    rows.iter()
        .map(|r| {
            let rest = r.paths[1..].iter().map(|p| p.iter().cloned().collect()).collect();
            (r.name.clone(), r.paths[0].clone(), rest)
        })
        .collect()
}

/// Differences between a generated path table and a fixture, one per row.
pub fn path_table_diff(system: &DeductionSystem, fixture_name: &str) -> Vec<String> {
    let got = canon(&mindeduce::enumerate_paths(system).named_rows());
    let want = canon(&parse_paths(&fixture(fixture_name)).expect("fixture parses"));
    let mut diff = Vec::new();
    if got.len() != want.len() {
        diff.push(format!("{} rows generated, fixture has {}", got.len(), want.len()));
    }
    for (g, w) in got.iter().zip(&want) {
        if g != w {
            diff.push(format!("row {}: generated {:?} vs fixture {:?}", w.0, g, w));
        }
    }
    diff
}

pub struct FixtureStep {
    pub premises: Vec<String>,
    pub family: String,
    pub deduced: String,
}

pub fn parse_trace(text: &str) -> Vec<FixtureStep> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('|').map(str::trim).collect();
            assert_eq!(cols.len(), 4, "bad trace line `{l}`");
            FixtureStep {
                premises: cols[1].split(',').map(|s| s.trim().to_string()).collect(),
                family: cols[2].to_string(),
                deduced: cols[3].to_string(),
            }
        })
        .collect()
}

/// Maps fixture steps onto rules of the expanded system so that the oracle
/// can replay them in order.
pub fn fixture_steps(system: &DeductionSystem, steps: &[FixtureStep]) -> Result<Vec<TraceStep>, String> {
    let expanded = expand_rules(system);
    let id = |n: &str| system.find(n).ok_or_else(|| format!("unknown proposition {n}"));
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let premises: BTreeSet<PropId> = s.premises.iter().map(|n| id(n)).collect::<Result<_, _>>()?;
            let deduced = id(&s.deduced)?;
            let rule = expanded
                .directed_rules()
                .iter()
                .position(|r| {
                    r.conclusion() == deduced
                        && r.label() == Some(s.family.as_str())
                        && r.premises().iter().copied().collect::<BTreeSet<_>>() == premises
                })
                .ok_or_else(|| format!("step {}: no rule {} gives {} from {:?}", i + 1, s.family, s.deduced, s.premises))?;
            Ok(TraceStep {
                round: i + 1,
                rule,
                label: Some(s.family.clone()),
                premises: expanded.directed_rules()[rule].premises().to_vec(),
                deduced,
            })
        })
        .collect()
}

/// Conclusions of the fixture trace that the closure of `guess` misses.
pub fn missed_conclusions(system: &DeductionSystem, guess: &[&str], trace_name: &str) -> Vec<String> {
    let g = oracle::resolve_guess(system, guess).unwrap();
    let c = mindeduce::closure(system, &g).unwrap();
    parse_trace(&fixture(trace_name))
        .into_iter()
        .filter(|s| system.find(&s.deduced).is_none_or(|p| !c.knows(p)))
        .map(|s| s.deduced)
        .collect()
}
