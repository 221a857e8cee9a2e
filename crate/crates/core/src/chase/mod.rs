//! The nondeterministic chase for disjunctive TGDs and certain answers over
//! its bounded prefixes.

mod entail;
mod lift;
mod oracle;
mod skolem;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Atom, Instance, Mapping, Term};
use crate::syntax::{Dependency, HeadAtom, RuleSet};

pub use entail::{
    certain_answer, certain_answer_limited, nd_entails, nd_entails_limited, AnswerVerdict,
};
pub use lift::first_unmatched;
pub use lift::lift_homomorphism;
pub use oracle::MAX_FREE_ATOMS;
pub use oracle::{brute_force_certain, brute_force_certain_ded};
pub use skolem::{fire_tgd, skolem_chase, skolem_chase_full, SkolemResult};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ChaseError {
    #[error("rule {0} is not in canonical form")]
    NonCanonical(usize),
    #[error("rule {0} has an equality in its head")]
    Equality(usize),
    #[error("rule {0} is disjunctive")]
    Disjunctive(usize),
    #[error("rule {0} has existential variables")]
    Existential(usize),
    #[error("fact limit {limit} exceeded in round {round}")]
    FactLimit { limit: usize, round: usize },
    #[error("model limit {0} exceeded")]
    ModelLimit(usize),
    #[error("ground Herbrand base of {0} atoms is too large to enumerate")]
    TooLarge(usize),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Resource caps shared by the chase and the model enumerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChaseLimits {
    pub max_facts: usize,
    pub max_models: usize,
}

impl Default for ChaseLimits {
    fn default() -> Self {
        ChaseLimits {
            max_facts: 1_000_000,
            max_models: 100_000,
        }
    }
}

/// A finite nonempty disjunction of ground atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "Vec<String>")]
pub struct NondetFact(BTreeSet<Atom>);

impl NondetFact {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let s: BTreeSet<Atom> = atoms.into_iter().collect();
        assert!(
            !s.is_empty(),
            "a nondeterministic fact needs at least one atom"
        );
        NondetFact(s)
    }

    pub fn single(a: Atom) -> Self {
        NondetFact(BTreeSet::from([a]))
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn apply(&self, m: &Mapping) -> NondetFact {
        NondetFact(self.0.iter().map(|a| a.apply(m)).collect())
    }
}

impl From<NondetFact> for Vec<String> {
    fn from(f: NondetFact) -> Self {
        f.0.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for NondetFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for NondetFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `chase_k(D, Σ)` together with `k` and whether round `k+1` adds nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NondetInstance {
    pub facts: BTreeSet<NondetFact>,
    pub round: usize,
    pub saturated: bool,
}

impl NondetInstance {
    /// `chase_0`: the database as singleton facts.
    pub fn from_database(d: &Instance) -> Self {
        NondetInstance {
            facts: d.iter().cloned().map(NondetFact::single).collect(),
            round: 0,
            saturated: false,
        }
    }

    /// True when every fact is a singleton; then the instance is an ordinary one.
    pub fn is_deterministic(&self) -> bool {
        self.facts.iter().all(NondetFact::is_singleton)
    }

    /// Atoms of the singleton facts.
    pub fn certain_atoms(&self) -> Instance {
        self.facts
            .iter()
            .filter(|f| f.is_singleton())
            .flat_map(|f| f.atoms().iter().cloned())
            .collect()
    }

    /// Every atom occurring in some fact.
    pub fn all_atoms(&self) -> Instance {
        self.facts
            .iter()
            .flat_map(|f| f.atoms().iter().cloned())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": crate::FORMAT_TAG,
            "round": self.round,
            "saturated": self.saturated,
            "facts": self.facts,
        })
    }
}

/// The null witnessing existential `var` of rule `rule` under frontier image `frontier`.
pub fn skolem_term(rule: usize, frontier: Vec<Term>, var: &Term) -> Term {
    Term::skolem(rule, frontier, &var.name())
}

/// Extends `h` with the skolem nulls of rule `idx`.
pub(crate) fn extend_with_nulls(idx: usize, rule: &Dependency, h: &Mapping) -> Mapping {
    let frontier: Vec<Term> = rule
        .frontier()
        .iter()
        .map(|v| h.get(v).cloned().unwrap_or_else(|| v.clone()))
        .collect();
    let mut h2 = h.clone();
    for z in rule.existentials() {
        h2.insert(z.clone(), skolem_term(idx, frontier.clone(), &z));
    }
    h2
}

/// Rejects rules the nondeterministic chase cannot run.
pub fn check_chaseable(rules: &RuleSet) -> Result<(), ChaseError> {
    for (i, r) in rules.rules.iter().enumerate() {
        if r.has_equality() {
            return Err(ChaseError::Equality(i));
        }
        if !r.is_canonical() {
            return Err(ChaseError::NonCanonical(i));
        }
    }
    Ok(())
}

/// Facts grouped by relation for body matching.
struct FactIndex<'a> {
    by_rel: BTreeMap<&'a str, Vec<(usize, &'a Atom)>>,
}

impl<'a> FactIndex<'a> {
    fn new(facts: &'a [NondetFact]) -> Self {
        let mut by_rel: BTreeMap<&str, Vec<(usize, &Atom)>> = BTreeMap::new();
        for (i, f) in facts.iter().enumerate() {
            for a in f.atoms() {
                by_rel.entry(&a.rel).or_default().push((i, a));
            }
        }
        FactIndex { by_rel }
    }
}

fn match_atom(pattern: &Atom, ground: &Atom, h: &mut Mapping, added: &mut Vec<Term>) -> bool {
    if pattern.args.len() != ground.args.len() {
        return false;
    }
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        if p.is_var() {
            match h.get(p) {
                Some(x) if x == g => {}
                Some(_) => return false,
                None => {
                    h.insert(p.clone(), g.clone());
                    added.push(p.clone());
                }
            }
        } else if p != g {
            return false;
        }
    }
    true
}

/// Applies rule `idx` to `facts`. Only tuples touching a fact with index at
/// least `delta_from` are considered; pass 0 for a full application.
fn apply_indexed(
    idx: usize,
    rule: &Dependency,
    facts: &[NondetFact],
    index: &FactIndex<'_>,
    delta_from: usize,
) -> BTreeSet<NondetFact> {
    let mut out = BTreeSet::new();
    if rule.body.is_empty() {
        if delta_from == 0 {
            out.insert(result_fact(idx, rule, facts, &[], &Mapping::new()));
        }
        return out;
    }
    let mut chosen: Vec<(usize, &Atom)> = Vec::with_capacity(rule.body.len());
    let mut h = Mapping::new();
    walk(
        idx,
        rule,
        facts,
        index,
        delta_from,
        0,
        &mut chosen,
        &mut h,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn walk<'a>(
    idx: usize,
    rule: &Dependency,
    facts: &[NondetFact],
    index: &FactIndex<'a>,
    delta_from: usize,
    i: usize,
    chosen: &mut Vec<(usize, &'a Atom)>,
    h: &mut Mapping,
    out: &mut BTreeSet<NondetFact>,
) {
    if i == rule.body.len() {
        if chosen.iter().any(|(f, _)| *f >= delta_from) {
            out.insert(result_fact(idx, rule, facts, chosen, h));
        }
        return;
    }
    let Some(cands) = index.by_rel.get(&*rule.body[i].rel) else {
        return;
    };
    for &(f, a) in cands {
        let mut added = Vec::new();
        if match_atom(&rule.body[i], a, h, &mut added) {
            chosen.push((f, a));
            walk(idx, rule, facts, index, delta_from, i + 1, chosen, h, out);
            chosen.pop();
        }
        for v in added {
            h.remove(&v);
        }
    }
}

/// `res(F, σ, h) = h'(head) ∪ ⋃ (F_i \ {h(α_i)})`.
fn result_fact(
    idx: usize,
    rule: &Dependency,
    facts: &[NondetFact],
    chosen: &[(usize, &Atom)],
    h: &Mapping,
) -> NondetFact {
    let h2 = extend_with_nulls(idx, rule, h);
    let mut atoms = BTreeSet::new();
    for head in rule.head_atoms() {
        if let HeadAtom::Rel(a) = head {
            atoms.insert(a.apply(&h2));
        }
    }
    for &(f, a) in chosen {
        atoms.extend(facts[f].atoms().iter().filter(|b| *b != a).cloned());
    }
    NondetFact(atoms)
}

/// All results of applying rule `idx` of `rules` to `instance`.
pub fn apply_rule(
    instance: &NondetInstance,
    rules: &RuleSet,
    idx: usize,
) -> Result<BTreeSet<NondetFact>, ChaseError> {
    let rule = &rules.rules[idx];
    if rule.has_equality() {
        return Err(ChaseError::Equality(idx));
    }
    if !rule.is_canonical() {
        return Err(ChaseError::NonCanonical(idx));
    }
    let facts: Vec<NondetFact> = instance.facts.iter().cloned().collect();
    let index = FactIndex::new(&facts);
    Ok(apply_indexed(idx, rule, &facts, &index, 0))
}

/// Breadth-first chase state. Facts are kept in insertion order so that the
/// facts of the latest round form a suffix.
pub struct ChaseRun<'r> {
    rules: &'r RuleSet,
    facts: Vec<NondetFact>,
    seen: BTreeSet<NondetFact>,
    delta_from: usize,
    round: usize,
    saturated: bool,
    limits: ChaseLimits,
}

impl<'r> ChaseRun<'r> {
    pub fn new(d: &Instance, rules: &'r RuleSet, limits: ChaseLimits) -> Result<Self, ChaseError> {
        check_chaseable(rules)?;
        let seen: BTreeSet<NondetFact> = d.iter().cloned().map(NondetFact::single).collect();
        Ok(ChaseRun {
            rules,
            facts: seen.iter().cloned().collect(),
            seen,
            delta_from: 0,
            round: 0,
            saturated: false,
            limits,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn facts(&self) -> &BTreeSet<NondetFact> {
        &self.seen
    }

    /// New facts of the next round, without committing them.
    fn next_round(&self) -> Result<Vec<NondetFact>, ChaseError> {
        let index = FactIndex::new(&self.facts);
        let produced: Vec<BTreeSet<NondetFact>> = self
            .rules
            .rules
            .par_iter()
            .enumerate()
            .map(|(i, r)| apply_indexed(i, r, &self.facts, &index, self.delta_from))
            .collect();
        let mut fresh = BTreeSet::new();
        for set in produced {
            for f in set {
                if !self.seen.contains(&f) {
                    fresh.insert(f);
                }
            }
        }
        if self.seen.len() + fresh.len() > self.limits.max_facts {
            return Err(ChaseError::FactLimit {
                limit: self.limits.max_facts,
                round: self.round + 1,
            });
        }
        Ok(fresh.into_iter().collect())
    }

    /// Probes round `k+1`. Marks saturation and returns false when it adds nothing;
    /// otherwise commits it and returns true.
    pub fn step(&mut self) -> Result<bool, ChaseError> {
        if self.saturated {
            return Ok(false);
        }
        let fresh = self.next_round()?;
        if fresh.is_empty() {
            self.saturated = true;
            return Ok(false);
        }
        self.delta_from = self.facts.len();
        for f in fresh {
            self.seen.insert(f.clone());
            self.facts.push(f);
        }
        self.round += 1;
        Ok(true)
    }

    /// Decides saturation of the current prefix without advancing it.
    pub fn probe(&mut self) -> Result<bool, ChaseError> {
        if !self.saturated && self.next_round()?.is_empty() {
            self.saturated = true;
        }
        Ok(self.saturated)
    }

    pub fn snapshot(&self) -> NondetInstance {
        NondetInstance {
            facts: self.seen.clone(),
            round: self.round,
            saturated: self.saturated,
        }
    }
}

/// `chase_depth(D, Σ)`; `round` is the last round that added facts when the
/// chase saturates earlier.
pub fn chase(d: &Instance, rules: &RuleSet, depth: usize) -> Result<NondetInstance, ChaseError> {
    chase_limited(d, rules, depth, ChaseLimits::default())
}

pub fn chase_limited(
    d: &Instance,
    rules: &RuleSet,
    depth: usize,
    limits: ChaseLimits,
) -> Result<NondetInstance, ChaseError> {
    let mut run = ChaseRun::new(d, rules, limits)?;
    while run.round() < depth {
        if !run.step()? {
            break;
        }
    }
    if !run.saturated() {
        // the probe may overflow the cap even though the prefix itself fits
        match run.probe() {
            Ok(_) | Err(ChaseError::FactLimit { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(run.snapshot())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_database, parse_program};

    fn fact(atoms: &[(&str, &[&str])]) -> NondetFact {
        NondetFact::new(atoms.iter().map(|(r, a)| Atom::parse_args(r, a)))
    }

    #[test]
    fn disjunctive_rule_application() {
        let rules = parse_program("P(X) -> Q(X) | R(X).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let out = apply_rule(&NondetInstance::from_database(&d), &rules, 0).unwrap();
        assert_eq!(out, BTreeSet::from([fact(&[("Q", &["a"]), ("R", &["a"])])]));
    }

    #[test]
    fn res_keeps_other_disjuncts() {
        let rules = parse_program("Q(X) -> S(X).").unwrap();
        let inst = NondetInstance {
            facts: BTreeSet::from([fact(&[("Q", &["a"]), ("R", &["a"])])]),
            round: 0,
            saturated: false,
        };
        let out = apply_rule(&inst, &rules, 0).unwrap();
        assert_eq!(out, BTreeSet::from([fact(&[("S", &["a"]), ("R", &["a"])])]));
    }

    #[test]
    fn existential_gets_skolem_null() {
        let rules = parse_program("P(X) -> E(X,Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let out = apply_rule(&NondetInstance::from_database(&d), &rules, 0).unwrap();
        let n = Term::skolem(0, vec![Term::constant("a")], "Y");
        assert_eq!(
            out,
            BTreeSet::from([NondetFact::single(Atom::new(
                "E",
                vec![Term::constant("a"), n]
            ))])
        );
    }

    #[test]
    fn empty_program_saturates_immediately() {
        let d = parse_database("P(a).").unwrap();
        let c = chase(&d, &RuleSet::default(), 3).unwrap();
        assert!(c.saturated);
        assert_eq!(c.round, 0);
        assert_eq!(c.facts, BTreeSet::from([fact(&[("P", &["a"])])]));
    }

    #[test]
    fn disjunction_collapses_to_singleton() {
        let rules = parse_program("P(X) -> Q(X) | R(X).\nQ(X) -> S(X).\nR(X) -> S(X).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let c = chase(&d, &rules, 3).unwrap();
        assert!(c.facts.contains(&fact(&[("S", &["a"])])));
    }

    #[test]
    fn existential_chain_saturates_at_two() {
        let rules = parse_program("P(X) -> E(X,Y).\nE(X,Y) -> Q(Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let c = chase(&d, &rules, 2).unwrap();
        assert!(c.saturated);
        assert_eq!(c.round, 2);
        assert!(c.is_deterministic());
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn depth_zero_is_database() {
        let rules = parse_program("P(X) -> Q(X).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let c = chase(&d, &rules, 0).unwrap();
        assert_eq!(c.round, 0);
        assert!(!c.saturated);
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn fact_cap_is_reported() {
        let rules = parse_program("A(X) -> E(X,Y).\nE(X,Y) -> A(Y).").unwrap();
        let d = parse_database("A(a).").unwrap();
        let limits = ChaseLimits {
            max_facts: 3,
            ..Default::default()
        };
        assert!(matches!(
            chase_limited(&d, &rules, 10, limits),
            Err(ChaseError::FactLimit { .. })
        ));
    }

    #[test]
    fn rejects_non_canonical_and_equality() {
        let d = Instance::new();
        let rules = parse_program("P(X) -> Q(X), R(X).").unwrap();
        assert_eq!(chase(&d, &rules, 1), Err(ChaseError::NonCanonical(0)));
        let rules = parse_program("P(X,Y) -> X = Y.").unwrap();
        assert_eq!(chase(&d, &rules, 1), Err(ChaseError::Equality(0)));
    }
}
