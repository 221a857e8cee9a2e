//! Tree representations of BCQs and their encoding as ranked trees over a
//! bounded variable pool.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{AutomataError, Letter, RankedTree};
use crate::model::{Atom, Bcq, Term};

/// A tree whose nodes carry a term set `X` and atoms `Φ` over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeRepresentation {
    pub terms: BTreeSet<Term>,
    pub atoms: BTreeSet<Atom>,
    pub children: Vec<TreeRepresentation>,
}

impl TreeRepresentation {
    pub fn new(
        terms: impl IntoIterator<Item = Term>,
        atoms: impl IntoIterator<Item = Atom>,
        children: Vec<TreeRepresentation>,
    ) -> Self {
        TreeRepresentation {
            terms: terms.into_iter().collect(),
            atoms: atoms.into_iter().collect(),
            children,
        }
    }

    fn walk<'a>(
        &'a self,
        parent: Option<&'a TreeRepresentation>,
        f: &mut impl FnMut(&'a Self, Option<&'a Self>),
    ) {
        f(self, parent);
        for c in &self.children {
            c.walk(Some(self), f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReprReport {
    pub valid: bool,
    pub violations: Vec<String>,
    pub width: usize,
    pub linear: bool,
}

/// Checks that the atoms of `r` are exactly `[q]` with each node's atoms over
/// its terms, that every term occupies a connected set of nodes, and that every
/// constant occurs at the root.
pub fn validate_representation(r: &TreeRepresentation, q: &Bcq) -> ReprReport {
    let mut violations = Vec::new();
    let mut atoms = BTreeSet::new();
    let mut width = 0;
    let mut linear = true;
    // number of nodes holding t whose parent does not hold it
    let mut tops: BTreeMap<&Term, usize> = BTreeMap::new();
    r.walk(None, &mut |n, parent| {
        width = width.max(n.terms.len());
        linear &= n.atoms.len() <= 1;
        for a in &n.atoms {
            atoms.insert(a.clone());
            if let Some(t) = a.args.iter().find(|t| !n.terms.contains(t)) {
                violations.push(format!("atom {a} uses {t} outside its node's terms"));
            }
        }
        for t in &n.terms {
            let top = parent.is_none_or(|p| !p.terms.contains(t));
            *tops.entry(t).or_default() += usize::from(top);
            if t.is_const() && !r.terms.contains(t) {
                violations.push(format!("constant {t} is missing from the root"));
            }
        }
    });
    if &atoms != q.atoms() {
        violations.push(format!(
            "node atoms {} differ from the query atoms {}",
            show(&atoms),
            show(q.atoms())
        ));
    }
    for (t, n) in tops {
        if n > 1 {
            violations.push(format!("nodes holding {t} are not connected"));
        }
    }
    violations.dedup();
    ReprReport {
        valid: violations.is_empty(),
        violations,
        width,
        linear,
    }
}

fn show(atoms: &BTreeSet<Atom>) -> String {
    atoms
        .iter()
        .map(Atom::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn pool_var(i: usize) -> Term {
    Term::var(&format!("X{i}"))
}

/// Renames the variables of a linear representation of width at most `k`
/// into the pool `X1..X2k`. A node keeps its parent's pool variable for a
/// shared term and takes the lowest variable unused by its parent otherwise.
pub fn encode_representation(
    r: &TreeRepresentation,
    k: usize,
) -> Result<RankedTree, AutomataError> {
    fn go(
        n: &TreeRepresentation,
        parent: &BTreeMap<Term, Term>,
        k: usize,
    ) -> Result<RankedTree, AutomataError> {
        if n.atoms.len() > 1 {
            return Err(AutomataError::NotLinearRepresentation);
        }
        if n.terms.len() > k {
            return Err(AutomataError::Width {
                width: n.terms.len(),
                k,
            });
        }
        let taken: BTreeSet<&Term> = parent.values().collect();
        let mut env = BTreeMap::new();
        for t in n.terms.iter().filter(|t| !t.is_const()) {
            if let Some(p) = parent.get(t) {
                env.insert(t.clone(), p.clone());
            }
        }
        for t in n.terms.iter().filter(|t| !t.is_const()) {
            if env.contains_key(t) {
                continue;
            }
            let used: BTreeSet<Term> = env.values().cloned().collect();
            let v = (1..=2 * k)
                .map(pool_var)
                .find(|v| !taken.contains(v) && !used.contains(v))
                .expect("2k pool variables suffice for width k");
            env.insert(t.clone(), v);
        }
        for a in &n.atoms {
            if let Some(t) = a.args.iter().find(|t| !n.terms.contains(t)) {
                return Err(AutomataError::InvalidRepresentation(format!(
                    "atom {a} uses {t} outside its node's terms"
                )));
            }
        }
        let rename = |t: &Term| env.get(t).cloned().unwrap_or_else(|| t.clone());
        let letter = Letter::new(
            n.terms.iter().map(rename),
            n.atoms.iter().next().map(|a| a.map_terms(rename)),
        );
        let children = n
            .children
            .iter()
            .map(|c| go(c, &env, k))
            .collect::<Result<_, _>>()?;
        Ok(RankedTree { letter, children })
    }
    go(r, &BTreeMap::new(), k)
}

/// Reads a ranked tree back as a BCQ: a label variable shared with the
/// parent's label denotes the parent's variable, any other one is fresh.
pub fn decode_tree(t: &RankedTree) -> Result<Bcq, AutomataError> {
    fn go(n: &RankedTree, parent: &BTreeMap<Term, Term>, fresh: &mut usize, out: &mut Vec<Atom>) {
        let mut env = BTreeMap::new();
        let mut bind = |t: &Term, env: &mut BTreeMap<Term, Term>| {
            if t.is_const() || env.contains_key(t) {
                return;
            }
            let v = match parent.get(t) {
                Some(v) if n.letter.terms.contains(t) => v.clone(),
                _ => {
                    *fresh += 1;
                    Term::var(&format!("Y{fresh}"))
                }
            };
            env.insert(t.clone(), v);
        };
        for t in &n.letter.terms {
            bind(t, &mut env);
        }
        if let Some(a) = &n.letter.atom {
            for t in &a.args {
                bind(t, &mut env);
            }
            out.push(a.apply(&env));
        }
        for c in &n.children {
            go(c, &env, fresh, out);
        }
    }
    let mut out = Vec::new();
    go(t, &BTreeMap::new(), &mut 0, &mut out);
    Bcq::new(out).map_err(|_| AutomataError::EmptyTree)
}
