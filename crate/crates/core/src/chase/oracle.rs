//! Model-enumeration oracles for existential-free rule sets. They share no
//! code with the chase.

use std::collections::{BTreeMap, BTreeSet};

use super::ChaseError;
use crate::model::{Atom, Instance, Mapping, Term, Ucq};
use crate::syntax::{Dialect, HeadAtom, RuleSet};

/// Largest Herbrand base (beyond the database) the oracles will enumerate.
pub const MAX_FREE_ATOMS: usize = 22;

struct Ground {
    rules: Vec<(u64, Vec<Option<u64>>)>,
    query: Vec<u64>,
    fixed: u64,
    free: Vec<usize>,
}

fn assignments(vars: &[Term], domain: &[Term]) -> Vec<Mapping> {
    let mut out = vec![Mapping::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|m| {
                domain.iter().map(move |c| {
                    let mut m = m.clone();
                    m.insert(v.clone(), c.clone());
                    m
                })
            })
            .collect();
    }
    out
}

fn ground(
    d: &Instance,
    rules: &RuleSet,
    q: &Ucq,
    rep: &dyn Fn(&Term) -> Term,
) -> Result<Ground, ChaseError> {
    let mut consts: BTreeSet<Term> = d.adom();
    consts.extend(rules.consts());
    consts.extend(q.consts());
    let domain: Vec<Term> = consts
        .iter()
        .map(rep)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut schema = rules.schema()?.0;
    for a in d
        .iter()
        .chain(q.disjuncts().iter().flat_map(|p| p.atoms().iter()))
    {
        crate::model::merge_arity(&mut schema, &a.rel, a.arity())?;
    }
    let mut index = BTreeMap::new();
    for (rel, k) in &schema {
        let vars: Vec<Term> = (0..*k).map(|i| Term::var(&format!("V{i}"))).collect();
        for m in assignments(&vars, &domain) {
            let a = Atom::new(rel, vars.iter().map(|v| m[v].clone()).collect());
            let n = index.len();
            index.insert(a, n);
        }
    }
    if index.len() > 64 {
        return Err(ChaseError::TooLarge(index.len()));
    }
    let bit = |a: &Atom| -> u64 { 1u64 << index[a] };
    let close = |a: &Atom, m: &Mapping| a.apply(m).map_terms(rep);

    let mut fixed = 0u64;
    for a in d.iter() {
        fixed |= bit(&a.map_terms(rep));
    }
    let mut grounded = Vec::new();
    for r in &rules.rules {
        for m in assignments(&r.universal(), &domain) {
            let mut body = 0u64;
            for a in &r.body {
                body |= bit(&close(a, &m));
            }
            let mut heads = Vec::new();
            for disj in &r.head {
                let mut mask = Some(0u64);
                for h in disj {
                    match h {
                        HeadAtom::Rel(a) => {
                            if let Some(x) = mask.as_mut() {
                                *x |= bit(&close(a, &m));
                            }
                        }
                        HeadAtom::Eq(l, r) => {
                            let l = rep(m.get(l).unwrap_or(l));
                            let r = rep(m.get(r).unwrap_or(r));
                            if l != r {
                                mask = None;
                            }
                        }
                    }
                }
                heads.push(mask);
            }
            grounded.push((body, heads));
        }
    }
    let mut query = Vec::new();
    for p in q.disjuncts() {
        let vars: Vec<Term> = p.vars().into_iter().collect();
        for m in assignments(&vars, &domain) {
            let mut mask = 0u64;
            for a in p.atoms() {
                mask |= bit(&close(a, &m));
            }
            query.push(mask);
        }
    }
    let free: Vec<usize> = (0..index.len()).filter(|i| fixed & (1 << i) == 0).collect();
    if free.len() > MAX_FREE_ATOMS {
        return Err(ChaseError::TooLarge(free.len()));
    }
    Ok(Ground {
        rules: grounded,
        query,
        fixed,
        free,
    })
}

impl Ground {
    fn is_model(&self, m: u64) -> bool {
        self.rules
            .iter()
            .all(|(body, heads)| m & body != *body || heads.iter().flatten().any(|h| m & h == *h))
    }

    fn satisfies_query(&self, m: u64) -> bool {
        self.query.iter().any(|p| m & p == *p)
    }

    /// Some model of the ground program misses every query grounding.
    fn has_countermodel(&self) -> bool {
        (0u64..(1u64 << self.free.len())).any(|bits| {
            let mut m = self.fixed;
            for (j, i) in self.free.iter().enumerate() {
                if bits & (1 << j) != 0 {
                    m |= 1 << i;
                }
            }
            self.is_model(m) && !self.satisfies_query(m)
        })
    }
}

fn check_existential_free(rules: &RuleSet) -> Result<(), ChaseError> {
    for (i, r) in rules.rules.iter().enumerate() {
        if !r.existentials().is_empty() {
            return Err(ChaseError::Existential(i));
        }
    }
    Ok(())
}

/// `D ∪ Σ ⊨ q` for existential-free DTGDs, by enumerating every subset of
/// the ground Herbrand base that contains `D`.
pub fn brute_force_certain(d: &Instance, rules: &RuleSet, q: &Ucq) -> Result<bool, ChaseError> {
    check_existential_free(rules)?;
    for (i, r) in rules.rules.iter().enumerate() {
        if r.classify() == Dialect::Ded {
            return Err(ChaseError::Equality(i));
        }
    }
    let g = ground(d, rules, q, &|t| t.clone())?;
    Ok(!g.has_countermodel())
}

fn partitions(items: &[Term]) -> Vec<Vec<Vec<Term>>> {
    let Some((first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for p in partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first.clone());
            out.push(q);
        }
        let mut q = p;
        q.insert(0, vec![first.clone()]);
        out.push(q);
    }
    out
}

/// `D ∪ Σ ⊨ q` for existential-free DEDs under first-order equality: every
/// identification of constants is tried, then every Herbrand model over the
/// classes. With `unique_names` only the discrete identification is used.
pub fn brute_force_certain_ded(
    d: &Instance,
    rules: &RuleSet,
    q: &Ucq,
    unique_names: bool,
) -> Result<bool, ChaseError> {
    check_existential_free(rules)?;
    let mut consts: BTreeSet<Term> = d.adom();
    consts.extend(rules.consts());
    consts.extend(q.consts());
    let consts: Vec<Term> = consts.into_iter().collect();
    let parts = if unique_names {
        vec![consts.iter().map(|c| vec![c.clone()]).collect()]
    } else {
        partitions(&consts)
    };
    for p in parts {
        let mut rep_of: BTreeMap<Term, Term> = BTreeMap::new();
        for class in &p {
            for c in class {
                rep_of.insert(c.clone(), class[0].clone());
            }
        }
        let rep = |t: &Term| rep_of.get(t).cloned().unwrap_or_else(|| t.clone());
        let g = ground(d, rules, q, &rep)?;
        if g.has_countermodel() {
            return Ok(false);
        }
    }
    Ok(true)
}
