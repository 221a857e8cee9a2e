//! Atomic entailment `{α} ∪ Σ ⊨ ∃x̄ β` for linear TGDs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{require_linear, AutomataError};
use crate::model::{Atom, Mapping, Term};
use crate::syntax::{HeadAtom, RuleSet};

fn freeze(t: &Term) -> Term {
    match t {
        Term::Var(v) => Term::constant(&format!("#{v}")),
        t => t.clone(),
    }
}

/// Renames nulls in order of first occurrence.
fn canonical(a: &Atom) -> Atom {
    let mut names: BTreeMap<Term, Term> = BTreeMap::new();
    let args = a
        .args
        .iter()
        .map(|t| {
            if !t.is_null() {
                return t.clone();
            }
            let n = names.len();
            names
                .entry(t.clone())
                .or_insert_with(|| Term::null(&format!("_n{n}")))
                .clone()
        })
        .collect();
    Atom::new(&a.rel, args)
}

fn match_atom(pat: &Atom, target: &Atom, seed: &Mapping) -> Option<Mapping> {
    if pat.rel != target.rel || pat.arity() != target.arity() {
        return None;
    }
    let mut h = seed.clone();
    for (p, g) in pat.args.iter().zip(&target.args) {
        if p.is_var() {
            match h.get(p) {
                Some(x) if x != g => return None,
                Some(_) => {}
                None => {
                    h.insert(p.clone(), g.clone());
                }
            }
        } else if p != g {
            return None;
        }
    }
    Some(h)
}

/// Every atom of the linear chase of `{α}` under `rules`, up to renaming of
/// nulls. The variables of `α` are frozen to constants `#X`. Finite because a
/// pattern is determined by its relation, constants and null equalities.
pub fn entailed_patterns(alpha: &Atom, rules: &RuleSet) -> Result<BTreeSet<Atom>, AutomataError> {
    require_linear(rules)?;
    let mut seen: BTreeSet<Atom> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let push = |a: Atom, seen: &mut BTreeSet<Atom>, queue: &mut VecDeque<Atom>| {
        let a = canonical(&a);
        if seen.insert(a.clone()) {
            queue.push_back(a);
        }
    };
    push(alpha.map_terms(freeze), &mut seen, &mut queue);
    let fire = |r: &crate::syntax::Dependency, h: &Mapping| -> Vec<Atom> {
        let mut h = h.clone();
        for (i, x) in r.existentials().iter().enumerate() {
            h.insert(x.clone(), Term::null(&format!("_f{i}")));
        }
        r.head[0]
            .iter()
            .filter_map(HeadAtom::as_rel)
            .map(|a| a.apply(&h))
            .collect()
    };
    for r in rules.rules.iter().filter(|r| r.body.is_empty()) {
        for a in fire(r, &Mapping::new()) {
            push(a, &mut seen, &mut queue);
        }
    }
    while let Some(p) = queue.pop_front() {
        for r in rules.rules.iter().filter(|r| r.body.len() == 1) {
            if let Some(h) = match_atom(&r.body[0], &p, &Mapping::new()) {
                for a in fire(r, &h) {
                    push(a, &mut seen, &mut queue);
                }
            }
        }
    }
    Ok(seen)
}

/// Whether `∃x̄ β` holds in `patterns`, where variables of `β` shared with
/// `alpha` are the frozen constants and the rest are existential.
pub fn pattern_matches(patterns: &BTreeSet<Atom>, alpha: &Atom, beta: &Atom) -> bool {
    let shared: BTreeSet<&Term> = alpha.vars().collect();
    let b = beta.map_terms(|t| {
        if shared.contains(t) {
            freeze(t)
        } else {
            t.clone()
        }
    });
    patterns
        .iter()
        .any(|p| match_atom(&b, p, &Mapping::new()).is_some())
}

pub fn atomic_entailment(
    alpha: &Atom,
    rules: &RuleSet,
    beta: &Atom,
) -> Result<bool, AutomataError> {
    Ok(pattern_matches(
        &entailed_patterns(alpha, rules)?,
        alpha,
        beta,
    ))
}
