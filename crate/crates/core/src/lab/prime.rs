//! Prime queries, data constructivity and the chase-union claim for linear TGDs.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::enumerate::{consts_within, functions};
use super::{
    canonical_bcq, constants, data_schema, enumerate_lab_databases, enumerate_lab_queries,
    query_schema, Call, LabBounds, LabError, Oracle, Status, Verdict,
};
use crate::automata::require_linear;
use crate::chase::{skolem_chase, AnswerVerdict};
use crate::model::{entails_bcq, hom_search, Atom, Bcq, Instance, Term, Ucq};
use crate::syntax::{Dialect, RuleSet};

fn equivalent(a: &Bcq, b: &Bcq) -> bool {
    entails_bcq(&a.frozen(), b) && entails_bcq(&b.frozen(), a)
}

/// No two proper nonempty subqueries, with variables renamed apart, have a
/// conjunction equivalent to `q`.
pub fn is_inseparable(q: &Bcq) -> bool {
    let atoms: Vec<&Atom> = q.atoms().iter().collect();
    let n = atoms.len();
    let pick = |mask: usize, suffix: &str| -> Vec<Atom> {
        (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| {
                atoms[i].map_terms(|t| match t {
                    Term::Var(v) => Term::var(&format!("{v}{suffix}")),
                    t => t.clone(),
                })
            })
            .collect()
    };
    let full = (1usize << n) - 1;
    for m1 in 1..full {
        for m2 in m1..full {
            let mut both = pick(m1, "");
            both.extend(pick(m2, "_2"));
            let conj = Bcq::new(both).expect("nonempty");
            if equivalent(q, &conj) {
                return false;
            }
        }
    }
    true
}

/// No substitution of some variables of `q` by constants of `consts` yields
/// a member of the class.
pub fn is_most_specific(
    q: &Bcq,
    consts: &[Term],
    member: &mut dyn FnMut(&Bcq) -> Result<bool, LabError>,
) -> Result<bool, LabError> {
    let vars: Vec<Term> = q.vars().into_iter().collect();
    for mask in 1usize..1 << vars.len() {
        let chosen: Vec<Term> = (0..vars.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| vars[i].clone())
            .collect();
        for s in functions(&chosen, consts) {
            if member(&q.apply(&s))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn is_prime(
    q: &Bcq,
    consts: &[Term],
    member: &mut dyn FnMut(&Bcq) -> Result<bool, LabError>,
) -> Result<bool, LabError> {
    Ok(is_inseparable(q) && is_most_specific(q, consts, member)?)
}

/// Two-way C-homomorphisms between `chase_i(D ∪ D')` and
/// `chase_i(D) ∪ chase_i(D')` for every `i ≤ rounds`, with C the constants.
pub fn check_union_claim(
    rules: &RuleSet,
    d1: &Instance,
    d2: &Instance,
    rounds: usize,
) -> Result<bool, LabError> {
    for i in 0..=rounds {
        let joint = skolem_chase(&d1.union(d2), rules, i)?;
        let split = skolem_chase(d1, rules, i)?.union(&skolem_chase(d2, rules, i)?);
        let fixed = joint
            .union(&split)
            .terms()
            .into_iter()
            .filter(Term::is_const)
            .collect();
        let there = hom_search(&joint, &split, &fixed).map_err(crate::chase::ChaseError::from)?;
        let back = hom_search(&split, &joint, &fixed).map_err(crate::chase::ChaseError::from)?;
        if there.is_none() || back.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pair indices, a witness and a note for one pair of databases.
type PairResult = (usize, usize, Option<Vec<Call>>, Option<String>);

/// Bounded `(D, D', q)` with `q` prime with respect to `O(D ∪ D')` and
/// entailed there must be entailed by `D` or by `D'`. For linear rules the
/// chase-union claim is checked on every pair up to round 3.
pub fn check_data_constructivity(rules: &RuleSet, bounds: &LabBounds) -> Result<Verdict, LabError> {
    let found = rules.dialect();
    if found > Dialect::Tgd {
        return Err(LabError::Dialect {
            found,
            allowed: Dialect::Tgd,
        });
    }
    let linear = require_linear(rules).is_ok();
    let oracle = Oracle::new(rules, bounds.depth)?;
    let consts = constants(bounds.consts);
    let dbs = enumerate_lab_databases(&data_schema(rules), &consts, bounds.facts);
    let qs = enumerate_lab_queries(&query_schema(rules), &consts, bounds.qatoms);
    let index: BTreeMap<Vec<Atom>, usize> = qs
        .iter()
        .enumerate()
        .map(|(i, q)| (q.atoms().iter().cloned().collect(), i))
        .collect();
    let row = |d: &Instance| -> Vec<AnswerVerdict> {
        let session = oracle.session(d);
        qs.iter()
            .map(|q| session.decide(&Ucq::from(q.clone())))
            .collect()
    };
    let rows: HashMap<&Instance, Vec<AnswerVerdict>> =
        dbs.par_iter().map(|d| (d, row(d))).collect();
    let pairs: Vec<(usize, usize)> = (0..dbs.len())
        .flat_map(|i| (i + 1..dbs.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (d1, d2) = (&dbs[i], &dbs[j]);
            if linear && !check_union_claim(rules, d1, d2, 3).unwrap_or(false) {
                let note = format!(
                    "chase union claim fails for {} and {}",
                    super::db_text(d1),
                    super::db_text(d2)
                );
                return (1, 0, Some(vec![]), Some(note));
            }
            let u = d1.union(d2);
            let session = oracle.session(&u);
            let urow: Vec<AnswerVerdict> = match rows.get(&u) {
                Some(r) => r.clone(),
                None => qs
                    .iter()
                    .map(|q| session.decide(&Ucq::from(q.clone())))
                    .collect(),
            };
            let adom = u.adom();
            let universe: Vec<Term> = adom.iter().cloned().collect();
            let (mut checked, mut blocked) = (0, 0);
            for (k, q) in qs.iter().enumerate() {
                if !consts_within(q, &adom) || !urow[k].is_entailed() {
                    continue;
                }
                checked += 1;
                let mut member = |p: &Bcq| -> Result<bool, LabError> {
                    let key: Vec<Atom> = canonical_bcq(p).atoms().iter().cloned().collect();
                    let v = match index.get(&key) {
                        Some(&x) => urow[x],
                        None => session.decide(&Ucq::from(p.clone())),
                    };
                    v.decided()
                        .ok_or_else(|| LabError::Inconclusive(format!("{p} over {u}")))
                };
                match is_prime(q, &universe, &mut member) {
                    Ok(false) => continue,
                    Err(_) => {
                        blocked += 1;
                        continue;
                    }
                    Ok(true) => {}
                }
                match (rows[d1][k].decided(), rows[d2][k].decided()) {
                    (Some(true), _) | (_, Some(true)) => {}
                    (Some(false), Some(false)) => {
                        let q = Ucq::from(q.clone());
                        let calls = vec![
                            Call::new(&u, &q, true),
                            Call::new(d1, &q, false),
                            Call::new(d2, &q, false),
                        ];
                        return (checked, blocked, Some(calls), None);
                    }
                    _ => blocked += 1,
                }
            }
            (checked, blocked, None, None)
        })
        .collect();
    let checked = results.iter().map(|r| r.0).sum();
    let blocked = results.iter().map(|r| r.1).sum();
    let hit = results.into_iter().find(|r| r.2.is_some());
    let mut v = Verdict::from_cases("data-constructivity", *bounds, checked, blocked, None);
    if let Some((_, _, w, note)) = hit {
        v.status = Status::Counterexample;
        v.witness = w;
        v.note = note;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::certain_answer;
    use crate::syntax::{parse_database, parse_program, parse_query};

    fn bcq(s: &str) -> Bcq {
        parse_query(s)
            .unwrap()
            .disjuncts()
            .iter()
            .next()
            .unwrap()
            .clone()
    }

    #[test]
    fn separability() {
        assert!(is_inseparable(&bcq("E(a,Y), Q(Y).")));
        assert!(!is_inseparable(&bcq("E(a,Y), Q(b).")));
        assert!(is_inseparable(&bcq("E(a,Y).")));
        // redundant atom: E(X,Y) ∧ E(X,Z) is equivalent to either half twice
        assert!(!is_inseparable(&bcq("E(X,Y), E(X,Z).")));
    }

    #[test]
    fn most_specific_against_the_successor_chase() {
        let rules = parse_program("P(X) -> E(X,Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let mut member = |q: &Bcq| -> Result<bool, LabError> {
            Ok(certain_answer(&d, &rules, &Ucq::from(q.clone()), 4)?.is_entailed())
        };
        let consts = [Term::constant("a")];
        assert!(!is_most_specific(&bcq("E(X,Y)."), &consts, &mut member).unwrap());
        assert!(is_most_specific(&bcq("E(a,Y)."), &consts, &mut member).unwrap());
        assert!(is_prime(&bcq("E(a,Y)."), &consts, &mut member).unwrap());
    }

    #[test]
    fn data_constructivity() {
        let b = LabBounds {
            consts: 1,
            facts: 2,
            qatoms: 1,
            depth: 4,
        };
        let linear =
            parse_program("@data: A/1, B/1\n@query: C/1, E/2\nA(X) -> C(X).\nB(X) -> E(X,Y).")
                .unwrap();
        assert_eq!(
            check_data_constructivity(&linear, &b).unwrap().status,
            Status::NoCounterexample
        );
        let join = parse_program("@data: A/1, B/1\n@query: C/1\nA(X), B(X) -> C(X).").unwrap();
        let v = check_data_constructivity(&join, &b).unwrap();
        assert_eq!(v.status, Status::Counterexample);
        let w = v.witness.unwrap();
        assert_eq!(w[0].query, "C(a).");
        assert!(super::super::replay_witness(&join, 4, &w).unwrap());
    }

    #[test]
    fn union_claim_holds_for_linear_rules() {
        let rules = parse_program("E(X,Y) -> E(Y,Z).").unwrap();
        let d1 = parse_database("E(a,b).").unwrap();
        let d2 = parse_database("E(b,a).").unwrap();
        assert!(check_union_claim(&rules, &d1, &d2, 3).unwrap());
    }
}
