mod common;

use common::*;
use mindeduce::ciphers::{build_enocoro, build_snow2};
use mindeduce::oracle::{replay, resolve_guess};
use mindeduce::{closure, enumerate_paths, RangeMode};

#[test]
fn snow_path_table_matches_fixture() {
    let s = build_snow2(13);
    assert_eq!(path_table_diff(&s, "snow2_t13.paths"), Vec::<String>::new());
    assert_eq!(enumerate_paths(&s).total_paths(), 178);
}

#[test]
fn enocoro_path_table_matches_fixture() {
    let s = build_enocoro(16, RangeMode::Declared);
    assert_eq!(path_table_diff(&s, "enocoro_t16.paths"), Vec::<String>::new());
    let b3 = s.find("b_3").unwrap();
    assert_eq!(enumerate_paths(&s).paths(b3).len(), 4);
}

#[test]
fn snow_guess_reaches_everything() {
    let s = build_snow2(13);
    let g = resolve_guess(&s, &SNOW_GUESS).unwrap();
    let c = closure(&s, &g).unwrap();
    assert!(c.is_complete());
    assert_eq!(c.known.len(), 42);
    assert_eq!(missed_conclusions(&s, &SNOW_GUESS, "snow2_t13.trace"), Vec::<String>::new());
}

#[test]
fn snow_trace_replays_step_by_step() {
    let s = build_snow2(13);
    let steps = parse_trace(&fixture("snow2_t13.trace"));
    assert_eq!(steps.len(), 33);
    let trace = fixture_steps(&s, &steps).unwrap();
    let g = resolve_guess(&s, &SNOW_GUESS).unwrap();
    let known = replay(&s, &g, &trace).unwrap();
    assert_eq!(known.len(), 42);
}

#[test]
fn enocoro_guess_covers_trace_conclusions() {
    let s = build_enocoro(16, RangeMode::Extended);
    assert_eq!(missed_conclusions(&s, &ENOCORO_GUESS, "enocoro_t16.trace"), Vec::<String>::new());
}

#[test]
fn enocoro_trace_replays_step_by_step() {
    let s = build_enocoro(16, RangeMode::Extended);
    let steps = parse_trace(&fixture("enocoro_t16.trace"));
    assert_eq!(steps.len(), 97);
    let trace = fixture_steps(&s, &steps).unwrap();
    let g = resolve_guess(&s, &ENOCORO_GUESS).unwrap();
    let known = replay(&s, &g, &trace).unwrap();
    assert_eq!(known.len(), 18 + 97);
}

#[test]
fn enocoro_declared_model_misses_extended_indices() {
    // the guess list mentions no out-of-range word, but the trace does
    let s = build_enocoro(16, RangeMode::Declared);
    assert!(resolve_guess(&s, &ENOCORO_GUESS).is_ok());
    assert!(!missed_conclusions(&s, &ENOCORO_GUESS, "enocoro_t16.trace").is_empty());
}

#[test]
fn enocoro_closure_sizes_per_range() {
    let declared = build_enocoro(16, RangeMode::Declared);
    let g = resolve_guess(&declared, &ENOCORO_GUESS).unwrap();
    let c = closure(&declared, &g).unwrap();
    assert_eq!((declared.len(), c.known.len()), (108, 92));

    let extended = build_enocoro(16, RangeMode::Extended);
    let g = resolve_guess(&extended, &ENOCORO_GUESS).unwrap();
    let c = closure(&extended, &g).unwrap();
    assert!(c.is_complete());
    assert_eq!(c.known.len(), 115);
}
