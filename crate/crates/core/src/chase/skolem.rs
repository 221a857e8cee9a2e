use std::collections::BTreeMap;

use super::{extend_with_nulls, ChaseError, ChaseLimits};
use crate::model::{Atom, Instance, Mapping};
use crate::syntax::{HeadAtom, RuleSet};

/// Outcome of [`skolem_chase_full`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemResult {
    pub instance: Instance,
    pub round: usize,
    pub saturated: bool,
}

/// All body matches of `body` in `inst`, by plain nested-loop join.
fn matches(body: &[Atom], inst: &Instance) -> Vec<Mapping> {
    matches_from(body, inst, Mapping::new())
}

fn matches_from(body: &[Atom], inst: &Instance, seed: Mapping) -> Vec<Mapping> {
    let mut by_rel: BTreeMap<&str, Vec<&Atom>> = BTreeMap::new();
    for a in inst.iter() {
        by_rel.entry(&a.rel).or_default().push(a);
    }
    let mut partial = vec![seed];
    for pat in body {
        let mut next = Vec::new();
        let cands = by_rel.get(&*pat.rel).map(Vec::as_slice).unwrap_or(&[]);
        for h in &partial {
            'cand: for a in cands.iter().filter(|a| a.arity() == pat.arity()) {
                let mut h = h.clone();
                for (p, g) in pat.args.iter().zip(&a.args) {
                    if p.is_var() {
                        if let Some(x) = h.get(p) {
                            if x != g {
                                continue 'cand;
                            }
                        } else {
                            h.insert(p.clone(), g.clone());
                        }
                    } else if p != g {
                        continue 'cand;
                    }
                }
                next.push(h);
            }
        }
        partial = next;
    }
    partial
}

/// Oblivious skolem chase for TGDs, with the same null naming as the
/// nondeterministic chase. Conjunctive heads are allowed. At most `depth`
/// rounds are run; `saturated` is set only when a round within that budget
/// adds nothing.
pub fn skolem_chase(d: &Instance, rules: &RuleSet, depth: usize) -> Result<Instance, ChaseError> {
    Ok(skolem_chase_full(d, rules, depth, ChaseLimits::default())?.instance)
}

pub fn skolem_chase_full(
    d: &Instance,
    rules: &RuleSet,
    depth: usize,
    limits: ChaseLimits,
) -> Result<SkolemResult, ChaseError> {
    for (i, r) in rules.rules.iter().enumerate() {
        if r.has_equality() {
            return Err(ChaseError::Equality(i));
        }
        if r.head.len() != 1 {
            return Err(ChaseError::Disjunctive(i));
        }
    }
    let mut cur = d.clone();
    let mut round = 0;
    while round < depth {
        let mut next = cur.clone();
        for (i, r) in rules.rules.iter().enumerate() {
            for h in matches(&r.body, &cur) {
                let h2 = extend_with_nulls(i, r, &h);
                for head in &r.head[0] {
                    if let HeadAtom::Rel(a) = head {
                        next.insert(a.apply(&h2));
                    }
                }
            }
        }
        if next.len() > limits.max_facts {
            return Err(ChaseError::FactLimit {
                limit: limits.max_facts,
                round: round + 1,
            });
        }
        if next == cur {
            return Ok(SkolemResult {
                instance: cur,
                round,
                saturated: true,
            });
        }
        cur = next;
        round += 1;
    }
    Ok(SkolemResult {
        instance: cur,
        round,
        saturated: false,
    })
}

/// One skolem-chase application of TGD `idx` under `bind`, checked by
/// joining the body against `inst` from the given seed. Returns the head
/// atoms, or `None` when the bound body is not contained in `inst`.
pub fn fire_tgd(
    inst: &Instance,
    rules: &RuleSet,
    idx: usize,
    bind: &Mapping,
) -> Result<Option<Vec<Atom>>, ChaseError> {
    let rule = &rules.rules[idx];
    if rule.has_equality() {
        return Err(ChaseError::Equality(idx));
    }
    if rule.head.len() != 1 {
        return Err(ChaseError::Disjunctive(idx));
    }
    let Some(h) = matches_from(&rule.body, inst, bind.clone())
        .into_iter()
        .next()
    else {
        return Ok(None);
    };
    let h2 = extend_with_nulls(idx, rule, &h);
    Ok(Some(
        rule.head[0]
            .iter()
            .filter_map(HeadAtom::as_rel)
            .map(|a| a.apply(&h2))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::syntax::{parse_database, parse_program};

    #[test]
    fn single_application() {
        let rules = parse_program("P(X) -> E(X,Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let out = skolem_chase(&d, &rules, 3).unwrap();
        let n = Term::skolem(0, vec![Term::constant("a")], "Y");
        let want: Instance = [
            Atom::parse_args("P", &["a"]),
            Atom::new("E", vec![Term::constant("a"), n]),
        ]
        .into_iter()
        .collect();
        assert_eq!(out, want);
    }

    #[test]
    fn empty_database_needs_empty_body() {
        let rules = parse_program("P(X) -> Q(X).").unwrap();
        assert!(skolem_chase(&Instance::new(), &rules, 3)
            .unwrap()
            .is_empty());
        let rules = parse_program("true -> Q(a).").unwrap();
        assert_eq!(skolem_chase(&Instance::new(), &rules, 3).unwrap().len(), 1);
    }

    #[test]
    fn disjunction_rejected() {
        let rules = parse_program("P(X) -> Q(X) | R(X).").unwrap();
        assert_eq!(
            skolem_chase(&Instance::new(), &rules, 1),
            Err(ChaseError::Disjunctive(0))
        );
    }
}
