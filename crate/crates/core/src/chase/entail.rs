use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{ChaseError, ChaseLimits, ChaseRun, NondetInstance};
use crate::model::{entails_ucq, Atom, Instance, Ucq};
use crate::syntax::RuleSet;

/// Result of a bounded certain-answer computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerVerdict {
    /// `chase_round ⊨ q`.
    Entailed { round: usize },
    /// The chase saturated at `round` without entailing `q`.
    NotEntailed { round: usize },
    /// Neither, within `depth` rounds.
    Unknown { depth: usize },
}

impl AnswerVerdict {
    pub fn is_entailed(&self) -> bool {
        matches!(self, AnswerVerdict::Entailed { .. })
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, AnswerVerdict::Unknown { .. })
    }

    /// `Some(true/false)` when decided.
    pub fn decided(&self) -> Option<bool> {
        match self {
            AnswerVerdict::Entailed { .. } => Some(true),
            AnswerVerdict::NotEntailed { .. } => Some(false),
            AnswerVerdict::Unknown { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnswerVerdict::Entailed { .. } => "ENTAILED",
            AnswerVerdict::NotEntailed { .. } => "NOT_ENTAILED",
            AnswerVerdict::Unknown { .. } => "UNKNOWN",
        }
    }
}

impl fmt::Display for AnswerVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerVerdict::Entailed { round } => write!(f, "ENTAILED (round {round})"),
            AnswerVerdict::NotEntailed { round } => {
                write!(f, "NOT_ENTAILED (saturated at round {round})")
            }
            AnswerVerdict::Unknown { depth } => write!(f, "UNKNOWN (depth {depth})"),
        }
    }
}

struct Search<'a> {
    clauses: Vec<Vec<&'a Atom>>,
    q: &'a Ucq,
    models: usize,
    max_models: usize,
}

impl<'a> Search<'a> {
    /// False iff some model extending `chosen` (and avoiding `banned`) falsifies q.
    fn all_satisfy(
        &mut self,
        chosen: &mut BTreeSet<&'a Atom>,
        banned: &mut Vec<&'a Atom>,
    ) -> Result<bool, ChaseError> {
        let inst: Instance = chosen.iter().map(|a| (*a).clone()).collect();
        if entails_ucq(&inst, self.q) {
            return Ok(true);
        }
        // most constrained unhit clause first
        let mut pick: Option<Vec<&'a Atom>> = None;
        for c in &self.clauses {
            if c.iter().any(|a| chosen.contains(a)) {
                continue;
            }
            let open: Vec<&'a Atom> = c.iter().copied().filter(|a| !banned.contains(a)).collect();
            if open.is_empty() {
                // every model here also contains an atom excluded by an earlier branch
                return Ok(true);
            }
            if pick.as_ref().is_none_or(|p| open.len() < p.len()) {
                pick = Some(open);
            }
        }
        let Some(open) = pick else {
            self.models += 1;
            if self.models > self.max_models {
                return Err(ChaseError::ModelLimit(self.max_models));
            }
            return Ok(false);
        };
        let mark = banned.len();
        for a in open {
            chosen.insert(a);
            let ok = self.all_satisfy(chosen, banned)?;
            chosen.remove(a);
            if !ok {
                banned.truncate(mark);
                return Ok(false);
            }
            banned.push(a);
        }
        banned.truncate(mark);
        Ok(true)
    }
}

/// Every model of `I` (facts read as positive clauses) satisfies `q`.
pub fn nd_entails(instance: &NondetInstance, q: &Ucq) -> bool {
    nd_entails_limited(instance, q, usize::MAX).expect("unbounded model search")
}

/// [`nd_entails`] with a cap on the number of complete models visited.
pub fn nd_entails_limited(
    instance: &NondetInstance,
    q: &Ucq,
    max_models: usize,
) -> Result<bool, ChaseError> {
    // a superset of another clause is implied by it
    let mut facts: Vec<&BTreeSet<Atom>> = instance.facts.iter().map(|f| f.atoms()).collect();
    facts.sort_by_key(|f| f.len());
    let mut kept: Vec<&BTreeSet<Atom>> = Vec::new();
    for f in facts {
        if !kept.iter().any(|k| k.is_subset(f)) {
            kept.push(f);
        }
    }
    let mut search = Search {
        clauses: kept.iter().map(|f| f.iter().collect()).collect(),
        q,
        models: 0,
        max_models,
    };
    search.all_satisfy(&mut BTreeSet::new(), &mut Vec::new())
}

/// Decides `D ∪ Σ ⊨ q` from the chase prefixes up to `depth`.
pub fn certain_answer(
    d: &Instance,
    rules: &RuleSet,
    q: &Ucq,
    depth: usize,
) -> Result<AnswerVerdict, ChaseError> {
    certain_answer_limited(d, rules, q, depth, ChaseLimits::default())
}

pub fn certain_answer_limited(
    d: &Instance,
    rules: &RuleSet,
    q: &Ucq,
    depth: usize,
    limits: ChaseLimits,
) -> Result<AnswerVerdict, ChaseError> {
    let mut run = ChaseRun::new(d, rules, limits)?;
    loop {
        let snap = run.snapshot();
        if nd_entails_limited(&snap, q, limits.max_models)? {
            return Ok(AnswerVerdict::Entailed { round: run.round() });
        }
        if run.round() == depth {
            return Ok(match run.probe() {
                Ok(true) => AnswerVerdict::NotEntailed { round: run.round() },
                Ok(false) | Err(ChaseError::FactLimit { .. }) => AnswerVerdict::Unknown { depth },
                Err(e) => return Err(e),
            });
        }
        if !run.step()? {
            return Ok(AnswerVerdict::NotEntailed { round: run.round() });
        }
    }
}
