//! Oblivious automata back to linear TGDs, and the combination of per-fact
//! programs into one program over a shared schema.

use std::collections::{BTreeMap, BTreeSet};

use super::{AutomataError, Nta};
use crate::model::{Atom, Instance, Term};
use crate::syntax::{Dependency, RuleSet, Schema};

/// Constants become the reserved variables `_vc_c`.
fn hat(t: &Term) -> Term {
    match t {
        Term::Const(c) => Term::var(&format!("_vc_{c}")),
        t => t.clone(),
    }
}

fn single_fact(d: &Instance) -> Result<&Atom, AutomataError> {
    match d.len() {
        1 => Ok(d.iter().next().expect("one fact")),
        n => Err(AutomataError::NotSingleFact(n)),
    }
}

/// Linear TGDs whose chase over the fact of `d` builds, for every accepted
/// tree, a path of `T` atoms mirroring a run, and emits the atom of every
/// labelled node on it. Rule groups, in order: `root` starts runs at the fact,
/// `descend` follows a transition from a state to a child state, `emit` copies
/// label atoms out. Each letter's state relation lists the label's constants
/// (as `_vc_` variables) and then its variables.
pub fn nta_to_linear_tgds(nta: &Nta, d: &Instance) -> Result<RuleSet, AutomataError> {
    nta.require_oblivious()?;
    let fact = single_fact(d)?;
    let results = nta.letter_results();
    let state_atom = |l: usize| -> Option<Atom> {
        let s = *results[l].iter().next()?;
        let args = nta.letters[l].terms.iter().map(hat).collect();
        Some(Atom::new(&format!("_T{s}_{l}"), args))
    };
    let mut children: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nta.letters.len()];
    for t in &nta.transitions {
        let sym = nta.alphabet[t.symbol];
        for pos in 0..sym.arity {
            children[sym.letter].extend(nta.state_sets[t.child_set(pos)].iter().copied());
        }
    }
    let mut by_state: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (l, r) in results.iter().enumerate() {
        if let Some(s) = r.iter().next() {
            by_state.entry(*s).or_default().push(l);
        }
    }

    let body = fact.map_terms(hat);
    let mut rules = Vec::new();
    for (l, r) in results.iter().enumerate() {
        if r.iter().any(|s| nta.finals.contains(s)) {
            let head = state_atom(l).expect("letter has a state");
            rules.push(
                Dependency::tgd(vec![body.clone()], vec![head]).labeled(&format!("root_{l}")),
            );
        }
    }
    for (l2, kids) in children.iter().enumerate() {
        let Some(from) = state_atom(l2) else { continue };
        for s in kids {
            for &l1 in by_state.get(s).map(Vec::as_slice).unwrap_or(&[]) {
                let to = state_atom(l1).expect("letter has a state");
                rules.push(
                    Dependency::tgd(vec![from.clone()], vec![to])
                        .labeled(&format!("descend_{l2}_{l1}")),
                );
            }
        }
    }
    let mut query = Schema::new();
    for (l, letter) in nta.letters.iter().enumerate() {
        let (Some(a), Some(from)) = (&letter.atom, state_atom(l)) else {
            continue;
        };
        query = query.with(&a.rel, a.arity());
        rules.push(
            Dependency::tgd(vec![from], vec![a.map_terms(hat)]).labeled(&format!("emit_{l}")),
        );
    }
    let data = Schema::new().with(&fact.rel, fact.arity());
    Ok(RuleSet::new(rules, data, query)?)
}

/// Same relation and same pattern of repeated arguments.
fn isomorphic(a: &Atom, b: &Atom) -> bool {
    let pattern = |x: &Atom| -> Vec<usize> {
        x.args
            .iter()
            .map(|t| x.args.iter().position(|u| u == t).expect("own argument"))
            .collect()
    };
    a.rel == b.rel && pattern(a) == pattern(b)
}

/// Unions the programs `Σ_i` built for single-fact databases `D_i`, each over
/// its own copy `_c{i}_R` of every relation, with copy rules from `data`
/// into every copy and from every copy back into `query`.
pub fn combine_single_fact(
    parts: &[(Instance, RuleSet)],
    data: &Schema,
    query: &Schema,
) -> Result<RuleSet, AutomataError> {
    let facts: Vec<&Atom> = parts
        .iter()
        .map(|(d, _)| single_fact(d))
        .collect::<Result<_, _>>()?;
    for i in 0..facts.len() {
        for j in i + 1..facts.len() {
            if isomorphic(facts[i], facts[j]) {
                return Err(AutomataError::DuplicateDatabase(i, j));
            }
        }
    }
    let copy = |i: usize, rel: &str| format!("_c{i}_{rel}");
    let vars = |k: usize| -> Vec<Term> { (1..=k).map(|j| Term::var(&format!("X{j}"))).collect() };
    let mut rules = Vec::new();
    for (i, (_, sigma)) in parts.iter().enumerate() {
        for r in &sigma.rules {
            let rename = |a: &Atom| Atom::new(&copy(i, &a.rel), a.args.clone());
            let mut r2 = Dependency::new(
                r.body.iter().map(rename).collect(),
                r.head
                    .iter()
                    .map(|d| {
                        d.iter()
                            .map(|h| match h {
                                crate::syntax::HeadAtom::Rel(a) => {
                                    crate::syntax::HeadAtom::Rel(rename(a))
                                }
                                e => e.clone(),
                            })
                            .collect()
                    })
                    .collect(),
            );
            if let Some(l) = &r.label {
                r2 = r2.labeled(&format!("c{i}_{l}"));
            }
            rules.push(r2);
        }
    }
    for (i, _) in parts.iter().enumerate() {
        for (rel, k) in data.iter() {
            let x = vars(k);
            rules.push(
                Dependency::tgd(
                    vec![Atom::new(rel, x.clone())],
                    vec![Atom::new(&copy(i, rel), x)],
                )
                .labeled(&format!("copy_in_{i}_{rel}")),
            );
        }
    }
    for (i, _) in parts.iter().enumerate() {
        for (rel, k) in query.iter() {
            let x = vars(k);
            rules.push(
                Dependency::tgd(
                    vec![Atom::new(&copy(i, rel), x.clone())],
                    vec![Atom::new(rel, x)],
                )
                .labeled(&format!("copy_out_{i}_{rel}")),
            );
        }
    }
    Ok(RuleSet::new(rules, data.clone(), query.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::compile_linear_tgds;
    use crate::chase::certain_answer;
    use crate::model::Ucq;
    use crate::syntax::{parse_database, parse_program, parse_query};

    #[test]
    fn round_trip_on_the_successor_program() {
        let rules = parse_program("A(X) -> E(X,Y).").unwrap();
        let d = parse_database("A(a).").unwrap();
        let nta = compile_linear_tgds(&rules, &d, &Schema::new().with("E", 2)).unwrap();
        let inv = nta_to_linear_tgds(&nta, &d).unwrap();
        assert!(inv.rules.iter().all(|r| r.body.len() == 1));
        let q = |s: &str| -> Ucq { parse_query(s).unwrap() };
        let yes = certain_answer(&d, &inv, &q("E(a,Y)."), 4).unwrap();
        assert!(yes.is_entailed());
        let no = certain_answer(&d, &inv, &q("E(Y,a)."), 4).unwrap();
        assert!(!no.is_entailed());
        let printed = inv.to_string();
        assert_eq!(crate::syntax::parse_program(&printed).unwrap(), inv);
    }

    #[test]
    fn combine_counts_copy_rules() {
        let data = Schema::new().with("A", 1).with("B", 1);
        let query = Schema::new().with("E", 2);
        let s = parse_program("A(X) -> E(X,Y).").unwrap();
        let parts = vec![
            (parse_database("A(a).").unwrap(), s.clone()),
            (parse_database("B(a).").unwrap(), s.clone()),
        ];
        let out = combine_single_fact(&parts, &data, &query).unwrap();
        let copy_in = out
            .rules
            .iter()
            .filter(|r| r.label.as_deref().is_some_and(|l| l.starts_with("copy_in")))
            .count();
        assert_eq!(copy_in, 2 * parts.len());
        let dup = vec![
            (parse_database("A(a).").unwrap(), s.clone()),
            (parse_database("A(b).").unwrap(), s),
        ];
        assert_eq!(
            combine_single_fact(&dup, &data, &query),
            Err(AutomataError::DuplicateDatabase(0, 1))
        );
    }
}
