//! Bounded-universe checkers for semantic closure properties of rule sets,
//! query classification predicates and universal models.

mod closure;
mod enumerate;
mod prime;
mod universal;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use closure::{
    check_const_subst_closure, check_const_subst_closure_with, check_db_hom_closure,
    check_db_hom_closure_with, check_query_constructivity,
};
pub use enumerate::{canonical_bcq, constants, enumerate_lab_databases, enumerate_lab_queries};
pub use prime::{
    check_data_constructivity, check_union_claim, is_inseparable, is_most_specific, is_prime,
};
pub use universal::{lemma8_check, universal_model, Lemma8Report};

use crate::chase::{
    brute_force_certain_ded, certain_answer_limited, nd_entails_limited, AnswerVerdict, ChaseError,
    ChaseLimits, ChaseRun, NondetInstance,
};
use crate::model::{Instance, Ucq};
use crate::syntax::{parse_database, parse_query, Dialect, RuleSet, Schema, SyntaxError};
use crate::translate::{ded_to_dtgd, Decider, TranslateError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("bad bounds `{0}`")]
    Bounds(String),
    #[error("rule set is {found}, the checker needs at most {allowed}")]
    Dialect { found: Dialect, allowed: Dialect },
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
}

/// Universe bounds shared by all checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LabBounds {
    pub consts: usize,
    pub facts: usize,
    pub qatoms: usize,
    pub depth: usize,
}

impl Default for LabBounds {
    fn default() -> Self {
        LabBounds {
            consts: 2,
            facts: 3,
            qatoms: 2,
            depth: 4,
        }
    }
}

impl FromStr for LabBounds {
    type Err = LabError;

    /// Reads `consts=3,facts=4,qatoms=3,depth=4`; missing keys keep defaults.
    fn from_str(s: &str) -> Result<Self, LabError> {
        let mut b = LabBounds::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || LabError::Bounds(part.to_string());
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "consts" => b.consts = v,
                "facts" => b.facts = v,
                "qatoms" => b.qatoms = v,
                "depth" => b.depth = v,
                _ => return Err(bad()),
            }
        }
        Ok(b)
    }
}

impl fmt::Display for LabBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "consts={},facts={},qatoms={},depth={}",
            self.consts, self.facts, self.qatoms, self.depth
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    NoCounterexample,
    Counterexample,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::NoCounterexample => "NO_COUNTEREXAMPLE",
            Status::Counterexample => "COUNTEREXAMPLE",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// One certain-answer call cited by a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Call {
    pub database: String,
    pub query: String,
    pub entailed: bool,
}

impl Call {
    fn new(d: &Instance, q: &Ucq, entailed: bool) -> Self {
        Call {
            database: db_text(d),
            query: format!("{q}."),
            entailed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: String,
    pub status: Status,
    pub witness: Option<Vec<Call>>,
    pub bounds: LabBounds,
    /// Candidate cases examined.
    pub checked: usize,
    /// Cases an UNKNOWN answer kept from being decided.
    pub blocked: usize,
    /// Extra detail for witnesses that are not certain-answer calls.
    pub note: Option<String>,
}

impl Verdict {
    fn from_cases(
        property: &str,
        bounds: LabBounds,
        checked: usize,
        blocked: usize,
        witness: Option<Vec<Call>>,
    ) -> Self {
        let status = match (&witness, blocked) {
            (Some(_), _) => Status::Counterexample,
            (None, 0) => Status::NoCounterexample,
            (None, _) => Status::Inconclusive,
        };
        Verdict {
            property: property.to_string(),
            status,
            witness,
            bounds,
            checked,
            blocked,
            note: None,
        }
    }
}

/// Facts in `.db` syntax.
pub fn db_text(d: &Instance) -> String {
    d.iter()
        .map(|a| format!("{a}."))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Re-runs every call of a witness and reports whether each reproduces.
pub fn replay_witness(rules: &RuleSet, depth: usize, calls: &[Call]) -> Result<bool, LabError> {
    let oracle = Oracle::new(rules, depth)?;
    for c in calls {
        let d = parse_database(&c.database)?;
        let q = parse_query(&c.query)?;
        if oracle.decide(&d, &q).decided() != Some(c.entailed) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certain answers through the chase, after eliminating equalities when the
/// rules are DEDs.
pub(crate) struct Oracle<'a> {
    rules: RuleSet,
    depth: usize,
    custom: Option<(&'a dyn Decider, &'a RuleSet)>,
}

impl<'a> Oracle<'a> {
    pub(crate) fn new(rules: &RuleSet, depth: usize) -> Result<Self, LabError> {
        let canon = if rules.is_canonical() {
            rules.clone()
        } else {
            rules.canonicalize()
        };
        let exec = if canon.dialect() == Dialect::Ded {
            ded_to_dtgd(&canon)?.rules
        } else {
            canon
        };
        Ok(Oracle {
            rules: exec,
            depth,
            custom: None,
        })
    }

    pub(crate) fn with_decider(rules: &'a RuleSet, decider: &'a dyn Decider, depth: usize) -> Self {
        Oracle {
            rules: rules.clone(),
            depth,
            custom: Some((decider, rules)),
        }
    }

    fn limits() -> ChaseLimits {
        ChaseLimits {
            max_facts: 200_000,
            ..ChaseLimits::default()
        }
    }

    pub(crate) fn decide(&self, d: &Instance, q: &Ucq) -> AnswerVerdict {
        if let Some((dec, rules)) = self.custom {
            return dec.decide(d, rules, q);
        }
        match certain_answer_limited(d, &self.rules, q, self.depth, Self::limits()) {
            Ok(v) => v,
            Err(_) => AnswerVerdict::Unknown { depth: self.depth },
        }
    }

    /// Chases `d` once for many queries. Entailment only grows along the
    /// prefixes, so the last one gives the same verdicts as [`Oracle::decide`].
    pub(crate) fn session<'s>(&'s self, d: &'s Instance) -> Session<'s> {
        if let Some((dec, rules)) = self.custom {
            return Session::Custom { dec, rules, d };
        }
        let Ok(mut run) = ChaseRun::new(d, &self.rules, Self::limits()) else {
            return Session::Chased {
                snap: None,
                depth: self.depth,
            };
        };
        loop {
            if run.round() == self.depth {
                let _ = run.probe();
                break;
            }
            match run.step() {
                Ok(true) => {}
                _ => break,
            }
        }
        Session::Chased {
            snap: Some(run.snapshot()),
            depth: self.depth,
        }
    }
}

pub(crate) enum Session<'s> {
    Custom {
        dec: &'s dyn Decider,
        rules: &'s RuleSet,
        d: &'s Instance,
    },
    Chased {
        snap: Option<NondetInstance>,
        depth: usize,
    },
}

impl Session<'_> {
    pub(crate) fn decide(&self, q: &Ucq) -> AnswerVerdict {
        match self {
            Session::Custom { dec, rules, d } => dec.decide(d, rules, q),
            Session::Chased { snap: None, depth } => AnswerVerdict::Unknown { depth: *depth },
            Session::Chased {
                snap: Some(s),
                depth,
            } => match nd_entails_limited(s, q, ChaseLimits::default().max_models) {
                Ok(true) => AnswerVerdict::Entailed { round: s.round },
                Ok(false) if s.saturated => AnswerVerdict::NotEntailed { round: s.round },
                _ => AnswerVerdict::Unknown { depth: *depth },
            },
        }
    }
}

/// Reads equality rules natively with distinct constants never equal, so a
/// forced equality between two constants makes the database inconsistent.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniqueNamesDecider;

impl Decider for UniqueNamesDecider {
    fn decide(&self, d: &Instance, rules: &RuleSet, q: &Ucq) -> AnswerVerdict {
        match brute_force_certain_ded(d, rules, q, true) {
            Ok(true) => AnswerVerdict::Entailed { round: 0 },
            Ok(false) => AnswerVerdict::NotEntailed { round: 0 },
            Err(_) => AnswerVerdict::Unknown { depth: 0 },
        }
    }
}

/// Declared data schema, or the whole schema when none is declared.
pub(crate) fn data_schema(rules: &RuleSet) -> Schema {
    if rules.data.is_empty() {
        rules.schema().unwrap_or_default()
    } else {
        rules.data.clone()
    }
}

pub(crate) fn query_schema(rules: &RuleSet) -> Schema {
    if rules.query.is_empty() {
        rules.schema().unwrap_or_default()
    } else {
        rules.query.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_parse() {
        let b: LabBounds = "consts=3,facts=4,qatoms=3,depth=4".parse().unwrap();
        assert_eq!(b.to_string(), "consts=3,facts=4,qatoms=3,depth=4");
        assert!("consts=x".parse::<LabBounds>().is_err());
        assert!("colour=1".parse::<LabBounds>().is_err());
        assert_eq!("".parse::<LabBounds>().unwrap(), LabBounds::default());
    }

    #[test]
    fn session_matches_per_query_calls() {
        let src = "@data: P/1, S/2\n@query: Q/1, R/1, E/2\nP(X) -> Q(X) | R(X).\nS(X,Y) -> E(X,Z).\nE(X,Y) -> E(Y,Z).";
        let rules = crate::syntax::parse_program(src).unwrap();
        let oracle = Oracle::new(&rules, 3).unwrap();
        let consts = constants(2);
        let qs = enumerate_lab_queries(&query_schema(&rules), &consts, 1);
        for d in enumerate_lab_databases(&data_schema(&rules), &consts, 2) {
            let s = oracle.session(&d);
            for q in &qs {
                let q = Ucq::from(q.clone());
                assert_eq!(
                    s.decide(&q).decided(),
                    oracle.decide(&d, &q).decided(),
                    "{d} {q}"
                );
            }
        }
    }

    #[test]
    fn equality_needs_elimination_for_substitution_closure() {
        let rules = crate::syntax::parse_program(
            "@data: R/2, P/1\n@query: Q/1\nR(X,Y) -> X = Y.\nP(X) -> Q(X).",
        )
        .unwrap();
        let b = LabBounds {
            consts: 2,
            facts: 2,
            qatoms: 1,
            depth: 6,
        };
        let native = check_const_subst_closure_with(&rules, &UniqueNamesDecider, &b);
        assert_eq!(native.status, Status::Counterexample);
        let translated = check_const_subst_closure(&rules, &b).unwrap();
        assert_eq!(translated.status, Status::NoCounterexample);
        assert_eq!(
            check_db_hom_closure(&rules, &b).unwrap().status,
            Status::NoCounterexample
        );
    }
}
