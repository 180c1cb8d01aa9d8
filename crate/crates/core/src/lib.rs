//! Minimum guess sets for deduction systems.
//!
//! A [`DeductionSystem`] is a set of propositions with rules saying which
//! propositions follow from which others. The crate unrolls such a system
//! over a number of state copies into a 0-1 integer program
//! ([`encoder::encode`]), solves it ([`milp::solve`]), and checks answers
//! against a plain closure computation ([`oracle`]).

pub mod ciphers;
pub mod dsl;
pub mod encoder;
pub mod export;
pub mod milp;
pub mod oracle;
pub mod preprocess;
pub mod random;
pub mod system;

pub use ciphers::RangeMode;
pub use dsl::{parse_system, render_system, DslError};
pub use encoder::{encode, enumerate_paths, EncodeConfig, EncodeMode, Goal, PathTable};
pub use milp::{solve, Limits, MilpInstance, Solution, Status};
pub use oracle::{brute_force_min, closure, BruteForce, ClosureResult};
pub use system::{DeductionSystem, DirectedRule, PropId, SymmetricRule};
