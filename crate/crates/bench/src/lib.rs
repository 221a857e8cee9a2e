//! Inputs shared by the benchmarks.

use exrule_core::syntax::{parse_database, parse_program, RuleSet};
use exrule_core::Instance;

pub const EXAMPLE_ONE: &str = "@data: P/1\n@query: Q/1, R/1\nP(X) -> Q(X) | R(X).";

pub const SUCCESSOR: &str = "@data: P/1\n@query: E/2\nP(X) -> E(X,Y).";

/// A transitive closure over a path of `n` edges.
pub fn path_closure(n: usize) -> (RuleSet, Instance) {
    let rules =
        parse_program("E(X,Y) -> T(X,Y).\nT(X,Y), E(Y,Z) -> T(X,Z).").expect("program parses");
    let facts: String = (0..n).map(|i| format!("E(c{i},c{}). ", i + 1)).collect();
    (rules, parse_database(&facts).expect("database parses"))
}

/// An infinite chain `E(a,n1), E(n1,n2), …` for skolem chase rounds.
pub fn chain() -> (RuleSet, Instance) {
    let rules = parse_program("P(X) -> E(X,Y).\nE(X,Y) -> E(Y,Z).").expect("program parses");
    (rules, parse_database("P(a).").expect("database parses"))
}

pub fn program(src: &str) -> RuleSet {
    parse_program(src).expect("program parses")
}

pub fn database(src: &str) -> Instance {
    parse_database(src).expect("database parses")
}
