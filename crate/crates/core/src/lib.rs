//! Ontology-mediated query answering over existential rule languages.
//!
//! The crate is organised around the rule dialects DED ⊇ DTGD ⊇ TGD ⊇ linear TGD:
//!
//! * [`model`] holds terms, atoms, instances, Boolean (U)CQs and homomorphism search.
//! * [`syntax`] parses, prints, classifies and canonicalises rule sets.
//! * [`chase`] runs the nondeterministic chase for disjunctive TGDs, its skolem
//!   degeneration for TGDs, and decides certain answers over bounded prefixes.
//! * [`translate`] compiles DEDs into DTGDs and DTGDs into TGDs, and replays
//!   derivation scripts against the (non-terminating) generated programs.
//! * [`automata`] implements bottom-up ranked tree automata, tree representations
//!   of BCQs and the compilations between linear TGDs and oblivious automata.
//! * [`lab`] checks semantic closure properties on bounded universes.

pub mod automata;
pub mod chase;
pub mod lab;
pub mod model;
pub mod syntax;
pub mod translate;

pub use chase::{
    certain_answer, chase, nd_entails, skolem_chase, AnswerVerdict, ChaseLimits, NondetFact,
    NondetInstance,
};
pub use model::{Atom, Bcq, Instance, Mapping, Name, Null, Skolem, Term, Ucq};
pub use syntax::{Dependency, Dialect, HeadAtom, RuleSet, Schema};

/// Version tag written at the top of every artifact this crate produces.
pub const FORMAT_TAG: &str = "exrule/1";
