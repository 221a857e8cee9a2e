//! Bounded comparison of a source program against its translation.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::chase::{
    brute_force_certain_ded, certain_answer_limited, AnswerVerdict, ChaseError, ChaseLimits,
};
use crate::model::{Atom, Bcq, Instance, Ucq};
use crate::syntax::{RuleSet, Schema};

/// Something that answers `D ∪ Σ ⊨ q`, possibly with UNKNOWN.
pub trait Decider: Sync {
    fn decide(&self, d: &Instance, rules: &RuleSet, q: &Ucq) -> AnswerVerdict;
}

/// The nondeterministic chase up to `depth` rounds. Non-canonical input is
/// canonicalized first; resource errors become UNKNOWN.
#[derive(Clone, Copy, Debug)]
pub struct ChaseDecider {
    pub depth: usize,
    pub limits: ChaseLimits,
}

impl ChaseDecider {
    pub fn new(depth: usize) -> Self {
        ChaseDecider {
            depth,
            limits: ChaseLimits::default(),
        }
    }
}

impl Decider for ChaseDecider {
    fn decide(&self, d: &Instance, rules: &RuleSet, q: &Ucq) -> AnswerVerdict {
        let canon;
        let rules = if rules.is_canonical() {
            rules
        } else {
            canon = rules.canonicalize();
            &canon
        };
        match certain_answer_limited(d, rules, q, self.depth, self.limits) {
            Ok(v) => v,
            Err(ChaseError::FactLimit { round, .. }) => AnswerVerdict::Unknown { depth: round },
            Err(_) => AnswerVerdict::Unknown { depth: 0 },
        }
    }
}

/// Herbrand-model enumeration with first-order equality, for existential-free
/// DEDs. Out-of-range inputs are UNKNOWN.
#[derive(Clone, Copy, Debug, Default)]
pub struct DedOracleDecider;

impl Decider for DedOracleDecider {
    fn decide(&self, d: &Instance, rules: &RuleSet, q: &Ucq) -> AnswerVerdict {
        match brute_force_certain_ded(d, rules, q, false) {
            Ok(true) => AnswerVerdict::Entailed { round: 0 },
            Ok(false) => AnswerVerdict::NotEntailed { round: 0 },
            Err(_) => AnswerVerdict::Unknown { depth: 0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteBounds {
    /// Constants available to databases and queries.
    pub constants: usize,
    /// Largest database size.
    pub max_facts: usize,
    /// Largest number of atoms in a query.
    pub max_query_atoms: usize,
    /// The translation only promises CQ answers; proper UCQs are not compared.
    pub cq_only: bool,
}

impl Default for SuiteBounds {
    fn default() -> Self {
        SuiteBounds {
            constants: 2,
            max_facts: 2,
            max_query_atoms: 2,
            cq_only: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub database: String,
    pub query: String,
    pub source: String,
    pub output: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub cases: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
    /// Cases where either side was UNKNOWN.
    pub unknown_masked: usize,
    /// Proper UCQs skipped under a CQ-only contract.
    pub out_of_contract: usize,
}

impl SuiteReport {
    pub fn compared(&self) -> usize {
        self.agreements + self.disagreements.len()
    }

    /// Agreement over decided comparisons; 1.0 when nothing was compared.
    pub fn agreement_rate(&self) -> f64 {
        match self.compared() {
            0 => 1.0,
            n => self.agreements as f64 / n as f64,
        }
    }

    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn constants(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("c{i}")
            }
        })
        .collect()
}

fn atoms_over(schema: &Schema, terms: &[String]) -> Vec<Atom> {
    let mut out = Vec::new();
    for (rel, k) in schema.iter() {
        let mut tuples: Vec<Vec<&str>> = vec![vec![]];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    terms.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.as_str());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.iter().map(|t| Atom::parse_args(rel, t)));
    }
    out
}

fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for item in items {
        let grown: Vec<Vec<T>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(item.clone());
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Databases over `data` with at most `bounds.max_facts` facts.
pub fn enumerate_databases(data: &Schema, bounds: &SuiteBounds) -> Vec<Instance> {
    let atoms = atoms_over(data, &constants(bounds.constants));
    subsets(&atoms, bounds.max_facts)
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect()
}

/// Queries over `query` with at most `bounds.max_query_atoms` atoms, read both
/// as a conjunction and as a union of single atoms.
pub fn enumerate_queries(query: &Schema, bounds: &SuiteBounds) -> Vec<Ucq> {
    let mut terms = constants(bounds.constants);
    terms.extend(["X".to_string(), "Y".to_string()]);
    let atoms = atoms_over(query, &terms);
    let mut out = BTreeSet::new();
    for s in subsets(&atoms, bounds.max_query_atoms) {
        if s.is_empty() {
            continue;
        }
        if let Ok(q) = Bcq::new(s.clone()) {
            out.insert(Ucq::from(q));
        }
        let disjuncts: Vec<Bcq> = s.into_iter().map(Bcq::atom).collect();
        if let Ok(u) = Ucq::new(disjuncts) {
            out.insert(u);
        }
    }
    out.into_iter().collect()
}

/// Compares `src` and `out` on every bounded database and query. The query
/// schema is that of `src`, or its whole working schema when none is declared.
pub fn translation_equivalence_suite(
    src: &RuleSet,
    out: &RuleSet,
    bounds: &SuiteBounds,
    src_decider: &dyn Decider,
    out_decider: &dyn Decider,
) -> SuiteReport {
    let qschema = if src.query.is_empty() {
        src.schema().unwrap_or_default()
    } else {
        src.query.clone()
    };
    let dbs = enumerate_databases(&src.data, bounds);
    let queries = enumerate_queries(&qschema, bounds);
    let parts: Vec<SuiteReport> = dbs
        .par_iter()
        .map(|d| {
            let mut r = SuiteReport::default();
            for q in &queries {
                r.cases += 1;
                if bounds.cq_only && !q.is_cq() {
                    r.out_of_contract += 1;
                    continue;
                }
                let a = src_decider.decide(d, src, q);
                let b = out_decider.decide(d, out, q);
                match (a.decided(), b.decided()) {
                    (Some(x), Some(y)) if x == y => r.agreements += 1,
                    (Some(_), Some(_)) => r.disagreements.push(Disagreement {
                        database: d.to_string(),
                        query: q.to_string(),
                        source: a.to_string(),
                        output: b.to_string(),
                    }),
                    _ => r.unknown_masked += 1,
                }
            }
            r
        })
        .collect();
    parts
        .into_iter()
        .fold(SuiteReport::default(), |mut acc, r| {
            acc.cases += r.cases;
            acc.agreements += r.agreements;
            acc.disagreements.extend(r.disagreements);
            acc.unknown_masked += r.unknown_masked;
            acc.out_of_contract += r.out_of_contract;
            acc
        })
}
