//! Bottom-up ranked tree automata over tree representations of BCQs, and the
//! compilations between linear TGDs with a single-fact database and oblivious
//! automata.

mod compile;
mod entail;
mod invert;
mod query;
mod repr;
mod tree;

pub use compile::{atom_universe, compile_linear_tgds};
pub use entail::{atomic_entailment, entailed_patterns, pattern_matches};
pub use invert::{combine_single_fact, nta_to_linear_tgds};
pub use query::{nta_accepts_query, QueryAcceptance};
pub use repr::{
    decode_tree, encode_representation, validate_representation, ReprReport, TreeRepresentation,
};
pub use tree::{
    accepts_by_rewriting, nta_accepts_tree, Children, Letter, Nta, RankedTree, RunStep, Symbol,
    Transition, TreeAcceptance,
};

use crate::syntax::{Dependency, HeadAtom, RuleSet, SyntaxError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("malformed automaton or tree: {0}")]
    Format(String),
    #[error("symbol {letter} of arity {arity} is not in the alphabet")]
    UnknownSymbol { letter: String, arity: usize },
    #[error("automaton is not oblivious: letter {0} leads to several states")]
    NotOblivious(String),
    #[error("rule {0} is not a linear TGD")]
    NotLinear(usize),
    #[error("database must consist of exactly one fact, found {0}")]
    NotSingleFact(usize),
    #[error("representation is not linear")]
    NotLinearRepresentation,
    #[error("node label has {width} terms, more than k = {k}")]
    Width { width: usize, k: usize },
    #[error("invalid tree representation: {0}")]
    InvalidRepresentation(String),
    #[error("databases {0} and {1} are isomorphic")]
    DuplicateDatabase(usize, usize),
    #[error("empty tree: no atoms to decode")]
    EmptyTree,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

fn is_linear(r: &Dependency) -> bool {
    r.body.len() <= 1
        && r.head.len() == 1
        && r.head[0].iter().all(|h| matches!(h, HeadAtom::Rel(_)))
}

/// Every rule has at most one body atom, one head disjunct and no equality.
pub fn require_linear(rules: &RuleSet) -> Result<(), AutomataError> {
    match rules.rules.iter().position(|r| !is_linear(r)) {
        Some(i) => Err(AutomataError::NotLinear(i)),
        None => Ok(()),
    }
}
