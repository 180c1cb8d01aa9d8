use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mindeduce::ciphers::{self, RangeMode as Range};
use mindeduce::encoder::{count_reduction, EncodeConfig, EncodeMode, Goal};
use mindeduce::export::{read_lp, read_solution, write_lp};
use mindeduce::oracle::{self, extract_trace, guess_from_solution, render_trace_table, resolve_guess};
use mindeduce::preprocess::simplify;
use mindeduce::{brute_force_min, closure, encode, parse_system, render_system, solve, BruteForce, DeductionSystem};
use mindeduce::{Limits, MilpInstance, Solution, Status};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIME_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "mindeduce", version, about = "Smallest guess sets for deduction systems, via 0-1 programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a built-in cipher model as .rules text
    Generate {
        /// snow2, snow2-raw, enocoro or toy
        cipher: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Encode a system as an LP file
    Encode {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        enc: EncodeArgs,
        /// Print the per-variable path table instead
        #[arg(long)]
        paths: bool,
        /// Report plain versus compact sizes instead
        #[arg(long)]
        reduction: bool,
    },
    /// Solve a .rules system (or an .lp file) and print the guess set
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        enc: EncodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Closure of a guess list
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Comma separated names; underscores may be left out
        #[arg(long, value_delimiter = ',', required = true)]
        guess: Vec<String>,
    },
    /// Deduction course behind a solution JSON file
    Trace {
        #[command(flatten)]
        input: InputArgs,
        /// Solution JSON as written by `solve --json`
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        enc: EncodeArgs,
    },
    /// Smallest number of guesses
    Minimize {
        #[command(flatten)]
        input: InputArgs,
        /// Exhaustive search instead of the integer program
        #[arg(long)]
        brute: bool,
        #[command(flatten)]
        enc: EncodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Merge equal variables and drop independent ones
    Reduce {
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Keystream length for built-in models
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, value_enum, default_value_t = RangeArg::Declared)]
    range: RangeArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// A .rules/.lp file, `-` for stdin (the default), or a built-in model name
    input: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Clone)]
struct EncodeArgs {
    /// State copies (default: number of propositions)
    #[arg(long)]
    nu: Option<usize>,
    /// Guess budget for the coverage objective
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Compact)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SenseArg::Max)]
    sense: SenseArg,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Seconds
    #[arg(long, default_value_t = 600)]
    time_limit: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    Declared,
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Compact,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Max,
    Min,
}

impl From<RangeArg> for Range {
    fn from(r: RangeArg) -> Self {
        match r {
            RangeArg::Declared => Range::Declared,
            RangeArg::Extended => Range::Extended,
        }
    }
}

impl SolverArgs {
    fn limits(&self) -> Limits {
        let mut l = Limits::default().with_time(Duration::from_secs(self.time_limit));
        l.seed = self.seed;
        l.threads = self.threads.max(1);
        l
    }
}

impl EncodeArgs {
    fn config(&self, n: usize) -> Result<EncodeConfig> {
        let nu = self.nu.unwrap_or(n.max(1));
        let mode = match self.mode {
            ModeArg::Plain => EncodeMode::Plain,
            ModeArg::Compact => EncodeMode::Compact,
        };
        let cfg = match self.sense {
            SenseArg::Min => EncodeConfig::min_guesses(nu),
            SenseArg::Max => {
                let k = self.k.context("--k is required with --sense max")?;
                EncodeConfig::new(nu, k)
            }
        };
        let cfg = cfg.with_mode(mode);
        cfg.validate(n)?;
        Ok(cfg)
    }
}

fn builtin(name: &str, model: &ModelArgs) -> Option<DeductionSystem> {
    let name = name.strip_suffix(".rules").unwrap_or(name);
    Some(match name {
        "snow2" | "snow" => ciphers::build_snow2(model.t.unwrap_or(13)),
        "snow2-raw" => ciphers::build_snow2_raw(model.t.unwrap_or(13)),
        "enocoro" => ciphers::build_enocoro(model.t.unwrap_or(16), model.range.into()),
        "toy" => ciphers::toy(),
        _ => return None,
    })
}

fn read_text(input: Option<&str>) -> Result<String> {
    match input {
        None | Some("-") => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}")),
    }
}

enum Loaded {
    Rules(DeductionSystem),
    Lp(MilpInstance),
}

fn looks_like_lp(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('\\'))
        .is_some_and(|l| {
            let l = l.to_ascii_lowercase();
            ["maximize", "minimize", "maximum", "minimum", "max", "min"].contains(&l.as_str())
        })
}

fn load(args: &InputArgs) -> Result<Loaded> {
    if let Some(name) = args.input.as_deref() {
        if !Path::new(name).exists() {
            if let Some(s) = builtin(name, &args.model) {
                return Ok(Loaded::Rules(s));
            }
        }
    }
    let text = read_text(args.input.as_deref())?;
    if looks_like_lp(&text) {
        return Ok(Loaded::Lp(read_lp(&text)?));
    }
    Ok(Loaded::Rules(parse_system(&text)?))
}

fn load_rules(args: &InputArgs) -> Result<DeductionSystem> {
    match load(args)? {
        Loaded::Rules(s) => Ok(s),
        Loaded::Lp(_) => bail!("expected a .rules system, got an LP file"),
    }
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn names(system: &DeductionSystem, ids: &[mindeduce::PropId]) -> Vec<String> {
    ids.iter().map(|&p| system.prop_name(p).to_string()).collect()
}

fn status_exit(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::Feasible | Status::TimeLimit => EXIT_TIME_LIMIT,
        Status::Infeasible => EXIT_INFEASIBLE,
    }
}

fn config_json(cfg: &EncodeConfig) -> Value {
    json!({
        "nu": cfg.nu,
        "k": cfg.budget_k,
        "mode": match cfg.mode { EncodeMode::Plain => "plain", EncodeMode::Compact => "compact" },
        "sense": match cfg.sense { Goal::MaxCoverage => "max", Goal::MinGuesses => "min" },
    })
}

fn solve_cmd(input: &InputArgs, enc: &EncodeArgs, solver: &SolverArgs) -> Result<u8> {
    let json = input.model.json;
    let (system, cfg, inst) = match load(input)? {
        Loaded::Lp(inst) => (None, None, inst),
        Loaded::Rules(s) => {
            let cfg = enc.config(s.len())?;
            let inst = encode(&s, &cfg)?;
            (Some(s), Some(cfg), inst)
        }
    };
    let sol = solve(&inst, &solver.limits())?;
    let code = status_exit(sol.status);
    let Some(system) = system else {
        if json {
            print_json(&serde_json::to_value(&sol)?)?;
        } else {
            println!("status: {:?}", sol.status);
            if let Some(z) = sol.objective {
                println!("objective: {z}");
            }
            for (name, v) in &sol.assignment {
                if *v == 1 {
                    println!("{name} = 1");
                }
            }
        }
        return Ok(code);
    };
    let cfg = cfg.expect("rules input has a config");
    let report = if sol.has_assignment() { Some(extract_trace(&system, &sol, &cfg)?) } else { None };
    let guess = if sol.has_assignment() { guess_from_solution(&system, &sol)? } else { Vec::new() };
    if json {
        let mut v = serde_json::to_value(&sol)?;
        v["encoding"] = config_json(&cfg);
        v["guess"] = json!(names(&system, &guess));
        if let Some(r) = &report {
            v["known"] = json!(r.known.len());
            v["trace"] = json!(oracle::render_trace_lines(&system, r).lines().collect::<Vec<_>>());
        }
        print_json(&v)?;
    } else {
        println!("status: {:?}", sol.status);
        match sol.objective {
            Some(z) => println!("objective: {z}"),
            None => println!("objective: none"),
        }
        if let Some(r) = &report {
            println!("guess ({}): {}", guess.len(), names(&system, &guess).join(", "));
            println!("known after closure: {}/{}", r.known.len(), system.len());
            println!();
            print!("{}", render_trace_table(&system, r));
        }
        eprintln!(
            "nodes {}, conflicts {}, {:.2?}",
            sol.stats.nodes, sol.stats.conflicts, sol.stats.wall
        );
    }
    Ok(code)
}

fn verify_cmd(input: &InputArgs, guess: &[String]) -> Result<u8> {
    let system = load_rules(input)?;
    let g = resolve_guess(&system, guess)?;
    let c = closure(&system, &g)?;
    let missing: Vec<&str> = system.ids().filter(|&p| !c.knows(p)).map(|p| system.prop_name(p)).collect();
    if input.model.json {
        print_json(&json!({
            "guess": names(&system, &g),
            "known": c.known.len(),
            "total": system.len(),
            "complete": c.is_complete(),
            "rounds": c.rounds,
            "missing": missing,
            "trace": oracle::render_trace_lines(&system, &c).lines().collect::<Vec<_>>(),
        }))?;
    } else {
        println!("guess ({}): {}", g.len(), names(&system, &g).join(", "));
        println!("known: {}/{} after {} rounds", c.known.len(), system.len(), c.rounds);
        if !missing.is_empty() {
            println!("missing: {}", missing.join(", "));
        }
        println!();
        print!("{}", render_trace_table(&system, &c));
    }
    Ok(0)
}

fn trace_cmd(input: &InputArgs, solution: &str, enc: &EncodeArgs) -> Result<u8> {
    let system = load_rules(input)?;
    let text = std::fs::read_to_string(solution).with_context(|| format!("reading {solution}"))?;
    let value: Value = serde_json::from_str(&text).context("solution is not JSON")?;
    // the encoding recorded by `solve --json` wins over the flags
    let mut enc = enc.clone();
    if let Some(e) = value.get("encoding") {
        enc.nu = e["nu"].as_u64().map(|v| v as usize).or(enc.nu);
        enc.k = e["k"].as_u64().map(|v| v as usize).or(enc.k);
        if e["mode"] == "plain" {
            enc.mode = ModeArg::Plain;
        } else if e["mode"] == "compact" {
            enc.mode = ModeArg::Compact;
        }
        if e["sense"] == "min" {
            enc.sense = SenseArg::Min;
        } else if e["sense"] == "max" {
            enc.sense = SenseArg::Max;
        }
    }
    let cfg = enc.config(system.len())?;
    let inst = encode(&system, &cfg)?;
    let sol: Solution = read_solution(&text, &inst)?;
    let r = extract_trace(&system, &sol, &cfg)?;
    if input.model.json {
        print_json(&serde_json::to_value(&r)?)?;
    } else {
        print!("{}", render_trace_table(&system, &r));
    }
    Ok(0)
}

fn minimize_cmd(input: &InputArgs, brute: bool, enc: &EncodeArgs, solver: &SolverArgs) -> Result<u8> {
    let system = load_rules(input)?;
    let (k_min, witness, status) = if brute {
        match brute_force_min(&system, system.len()) {
            BruteForce::Found { k_min, witness } => (Some(k_min), witness, Status::Optimal),
            BruteForce::NoSolutionWithin(_) => (None, Vec::new(), Status::Infeasible),
        }
    } else {
        let mut enc = enc.clone();
        enc.sense = SenseArg::Min;
        let cfg = enc.config(system.len())?;
        let sol = solve(&encode(&system, &cfg)?, &solver.limits())?;
        let witness = if sol.has_assignment() { guess_from_solution(&system, &sol)? } else { Vec::new() };
        (sol.objective.map(|z| z as usize), witness, sol.status)
    };
    let complete = closure(&system, &witness)?.is_complete();
    if input.model.json {
        print_json(&json!({
            "status": status,
            "k_min": k_min,
            "witness": names(&system, &witness),
            "verified": complete,
        }))?;
    } else {
        match k_min {
            Some(k) => {
                println!("k_min: {k}{}", if status == Status::Optimal { "" } else { " (not proven)" });
                println!("witness: {}", names(&system, &witness).join(", "));
                println!("closure check: {}", if complete { "complete" } else { "INCOMPLETE" });
            }
            None => println!("no solution ({status:?})"),
        }
    }
    Ok(status_exit(status))
}

fn reduce_cmd(input: &InputArgs) -> Result<u8> {
    let system = load_rules(input)?;
    let s = simplify(&system);
    let text = render_system(&s.system);
    if input.model.json {
        let mut v = serde_json::to_value(&s)?;
        v["rules"] = json!(text);
        print_json(&v)?;
    } else {
        print!("{text}");
        eprintln!(
            "removed {} variables and {} rules; {} merged, {} eliminated, must guess: {}",
            s.removed_variables,
            s.removed_rules,
            s.merged.len(),
            s.eliminated.len(),
            s.must_guess().join(", ")
        );
    }
    Ok(0)
}

fn encode_cmd(input: &InputArgs, enc: &EncodeArgs, paths: bool, reduction: bool) -> Result<u8> {
    let system = load_rules(input)?;
    if paths {
        print!("{}", mindeduce::enumerate_paths(&system).render());
        return Ok(0);
    }
    let cfg = enc.config(system.len())?;
    if reduction {
        let r = count_reduction(&system, &cfg)?;
        if input.model.json {
            print_json(&serde_json::to_value(&r)?)?;
        } else {
            println!("plain:   {} variables, {} constraints", r.plain_variables, r.plain_constraints);
            println!("compact: {} variables, {} constraints", r.compact_variables, r.compact_constraints);
            println!("saved:   {} path variables, {} constraints", r.path_variables_saved, r.constraints_saved);
        }
        return Ok(0);
    }
    print!("{}", write_lp(&encode(&system, &cfg)?));
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate { cipher, model } => {
            let s = builtin(cipher, model).with_context(|| format!("unknown model `{cipher}`"))?;
            if model.json {
                print_json(&json!({ "name": s.name(), "propositions": s.len(), "rules": render_system(&s) }))?;
            } else {
                print!("{}", render_system(&s));
            }
            Ok(0)
        }
        Command::Encode { input, enc, paths, reduction } => encode_cmd(input, enc, *paths, *reduction),
        Command::Solve { input, enc, solver } => solve_cmd(input, enc, solver),
        Command::Verify { input, guess } => verify_cmd(input, guess),
        Command::Trace { input, solution, enc } => trace_cmd(input, solution, enc),
        Command::Minimize { input, brute, enc, solver } => minimize_cmd(input, *brute, enc, solver),
        Command::Reduce { input } => reduce_cmd(input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
