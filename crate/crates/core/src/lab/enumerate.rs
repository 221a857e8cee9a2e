//! Bounded universes of databases and queries.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::atom_universe;
use crate::model::{Atom, Bcq, Instance, Mapping, Term};
use crate::syntax::Schema;

/// The constants `a, b, …` of a universe of size `n`.
pub fn constants(n: usize) -> Vec<Term> {
    (0..n)
        .map(|i| match i {
            0..=25 => Term::constant(&((b'a' + i as u8) as char).to_string()),
            _ => Term::constant(&format!("c{i}")),
        })
        .collect()
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

/// Nonempty databases over `schema` with at most `facts` facts over `consts`.
pub fn enumerate_lab_databases(schema: &Schema, consts: &[Term], facts: usize) -> Vec<Instance> {
    let atoms = atom_universe(schema, consts);
    subsets(&atoms, facts)
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.into_iter().collect())
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Representative of `q` up to variable renaming: variables become `X1, X2, …`
/// under the numbering giving the least sorted atom list.
pub fn canonical_bcq(q: &Bcq) -> Bcq {
    let vars: Vec<Term> = q.vars().into_iter().collect();
    let names: Vec<Term> = (1..=vars.len())
        .map(|i| Term::var(&format!("X{i}")))
        .collect();
    permutations(vars.len())
        .into_iter()
        .map(|p| {
            let m: Mapping = vars
                .iter()
                .cloned()
                .zip(p.iter().map(|i| names[*i].clone()))
                .collect();
            q.apply(&m)
        })
        .min_by(|a, b| {
            let a: Vec<&Atom> = a.atoms().iter().collect();
            let b: Vec<&Atom> = b.atoms().iter().collect();
            a.cmp(&b)
        })
        .expect("at least one permutation")
}

/// BCQs over `schema` with at most `max_atoms` atoms whose terms come from
/// `consts` and enough variables for every such query, one per isomorphism
/// class.
pub fn enumerate_lab_queries(schema: &Schema, consts: &[Term], max_atoms: usize) -> Vec<Bcq> {
    let mut terms = consts.to_vec();
    terms.extend((1..=max_atoms * schema.max_arity()).map(|i| Term::var(&format!("X{i}"))));
    let atoms = atom_universe(schema, &terms);
    let mut out: BTreeMap<Vec<Atom>, Bcq> = BTreeMap::new();
    for s in subsets(&atoms, max_atoms) {
        if s.is_empty() {
            continue;
        }
        let Ok(q) = Bcq::new(s) else { continue };
        let c = canonical_bcq(&q);
        out.entry(c.atoms().iter().cloned().collect()).or_insert(c);
    }
    out.into_values().collect()
}

/// Every map from `from` into `into`.
pub(crate) fn functions(from: &[Term], into: &[Term]) -> Vec<Mapping> {
    let mut out = vec![Mapping::new()];
    for x in from {
        out = out
            .into_iter()
            .flat_map(|m| {
                into.iter().map(move |y| {
                    let mut m = m.clone();
                    m.insert(x.clone(), y.clone());
                    m
                })
            })
            .collect();
    }
    out
}

pub(crate) fn consts_within(q: &Bcq, allowed: &BTreeSet<Term>) -> bool {
    q.consts().is_subset(allowed)
}
