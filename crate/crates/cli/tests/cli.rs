use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mindeduce"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mindeduce-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn generate_is_deterministic_and_reparses() {
    let a = run(&["generate", "snow2", "--T", "13"], None);
    let b = run(&["generate", "snow2", "--T", "13"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let paths = run(&["encode", "--paths"], Some(&stdout(&a)));
    assert_eq!(stdout(&paths).lines().count(), 42);
}

#[test]
fn minimize_toy_by_brute_force() {
    let o = run(&["minimize", "toy", "--brute", "--json"], None);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["k_min"], 1);
    assert_eq!(v["witness"], serde_json::json!(["p2"]));
    assert_eq!(v["verified"], true);
}

#[test]
fn minimize_toy_by_milp() {
    let v = json(&run(&["minimize", "toy", "--json"], None));
    assert_eq!(v["k_min"], 1);
    assert_eq!(v["status"], "optimal");
}

#[test]
fn solve_from_stdin_then_trace() {
    let rules = stdout(&run(&["generate", "toy"], None));
    let o = run(&["solve", "--k", "1", "--nu", "4", "--json"], Some(&rules));
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["objective"], 4);
    assert_eq!(v["guess"], serde_json::json!(["p2"]));
    assert_eq!(v["trace"].as_array().unwrap().len(), 3);

    let rules_path = temp_file("toy.rules", &rules);
    let sol_path = temp_file("toy.json", &stdout(&o));
    let t = run(&["trace", rules_path.to_str().unwrap(), "--solution", sol_path.to_str().unwrap()], None);
    assert!(t.status.success(), "{}", String::from_utf8_lossy(&t.stderr));
    let table = stdout(&t);
    assert!(table.starts_with("| Step | Known premises | Rule | Deduced |"));
    assert_eq!(table.lines().count(), 2 + 3);
}

#[test]
fn verify_enocoro_extended_guess() {
    let o = run(
        &[
            "verify",
            "enocoro.rules",
            "--guess",
            "a3,a5,b2,b5,b6,c2,c3,c8,c9,c10,e6,e11,e15,f3,f6,g1,g2,g5",
            "--range",
            "extended",
            "--json",
        ],
        None,
    );
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["complete"], true);
    assert_eq!(v["known"], 115);
}

#[test]
fn verify_declared_enocoro_reports_missing_words() {
    let o = run(&["verify", "enocoro", "--guess", "a_3,a_5,b_2,b_5,b_6,c_2,c_3,c_8,c_9,c_10,e_6,e_11,e_15,f_3,f_6,g_1,g_2,g_5", "--json"], None);
    let v = json(&o);
    assert_eq!(v["known"], 92);
    assert_eq!(v["total"], 108);
    assert_eq!(v["complete"], false);
}

#[test]
fn encode_then_solve_lp() {
    let lp = run(&["encode", "toy", "--k", "1", "--nu", "4"], None);
    assert!(stdout(&lp).starts_with("Maximize"));
    let o = run(&["solve", "--json"], Some(&stdout(&lp)));
    assert!(o.status.success());
    assert_eq!(json(&o)["objective"], 4);
}

#[test]
fn snow_reduction_report() {
    let v = json(&run(&["encode", "snow2", "--nu", "12", "--k", "9", "--reduction", "--json"], None));
    assert_eq!(v["path_variables_saved"], (4 * 13 + 32) * 12);
    assert_eq!(v["constraints_saved"], (6 * 13 + 48) * 12);
}

#[test]
fn reduce_raw_snow() {
    let o = run(&["reduce", "snow2-raw", "--json"], None);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["removed_variables"], 12);
    let rules = v["rules"].as_str().unwrap();
    let props = rules.lines().find(|l| l.starts_with("props:")).unwrap();
    assert_eq!(props.split_whitespace().count() - 1, 42);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"], None).status.code(), Some(1));
    assert_eq!(run(&["solve", "toy"], None).status.code(), Some(1), "missing --k");
    assert_eq!(run(&["verify", "toy", "--guess", "nope"], None).status.code(), Some(1));
    let infeasible = "Minimize\n obj: x\nSubject To\n c0: x >= 1\n c1: x <= 0\nBinary\n x\nEnd\n";
    assert_eq!(run(&["solve"], Some(infeasible)).status.code(), Some(2));
    let o = run(&["solve", "snow2", "--k", "9", "--nu", "12", "--time-limit", "0", "--json"], None);
    assert_eq!(o.status.code(), Some(3));
}
