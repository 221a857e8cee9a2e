//! Whether an automaton accepts some ranked tree that decodes to a given BCQ.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{AutomataError, Children, Nta, RankedTree};
use crate::model::{Atom, Bcq, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryAcceptance {
    pub accepted: bool,
    /// Largest number of atom-free nodes tried; a rejection is relative to it.
    pub bound: usize,
    pub witness: Option<RankedTree>,
}

/// Pool variable of the parent label and the query variable it carries.
type Vis = Vec<(Term, Option<usize>)>;

/// State, atoms still to place, visible variables, introduced variables, budget.
type MemoKey = (usize, u64, Vis, u64, usize);

struct Search<'a> {
    nta: &'a Nta,
    atoms: Vec<Atom>,
    qvars: Vec<Term>,
    atom_vars: Vec<u64>,
    by_result: Vec<Vec<usize>>,
    /// Label variables that occur in some letter atom; only these can carry
    /// query variables.
    atom_terms: BTreeSet<Term>,
    memo: HashMap<MemoKey, Option<(usize, RankedTree)>>,
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Assignments of `n` items to `m` ordered slots; with `symmetric` slots only
/// one assignment per set partition is produced.
fn assignments(n: usize, m: usize, symmetric: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, m: usize, symmetric: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let top = if symmetric {
            cur.iter()
                .max()
                .map_or(0, |x| x + 1)
                .min(m.saturating_sub(1))
        } else {
            m.saturating_sub(1)
        };
        for c in 0..=top {
            cur.push(c);
            go(n, m, symmetric, cur, out);
            cur.pop();
        }
    }
    if m > 0 || n == 0 {
        go(n, m, symmetric, &mut cur, &mut out);
    }
    out
}

/// Injective partial maps from `from` into `into`.
fn partial_injections(from: &[usize], into: &[Term]) -> Vec<Vec<(usize, Term)>> {
    let Some((&y, rest)) = from.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for tail in partial_injections(rest, into) {
        out.push(tail.clone());
        for x in into.iter().filter(|x| tail.iter().all(|(_, t)| t != *x)) {
            let mut v = tail.clone();
            v.push((y, x.clone()));
            out.push(v);
        }
    }
    out
}

impl<'a> Search<'a> {
    fn vars_of(&self, todo: u64) -> u64 {
        bits(todo).fold(0, |acc, a| acc | self.atom_vars[a])
    }

    /// Matches query atom `a` onto the letter atom `beta`: visible query
    /// variables must sit on their pool variable, new ones on distinct fresh
    /// label variables.
    fn bind_atom(
        &self,
        a: &Atom,
        beta: &Atom,
        visible: &BTreeMap<usize, Term>,
        fresh: &BTreeSet<Term>,
    ) -> Option<BTreeMap<usize, Term>> {
        if a.rel != beta.rel || a.arity() != beta.arity() {
            return None;
        }
        let mut b: BTreeMap<usize, Term> = BTreeMap::new();
        for (qa, tb) in a.args.iter().zip(&beta.args) {
            if !qa.is_var() {
                if qa != tb {
                    return None;
                }
                continue;
            }
            let y = self
                .qvars
                .iter()
                .position(|v| v == qa)
                .expect("query variable");
            if let Some(x) = visible.get(&y) {
                if x != tb {
                    return None;
                }
            } else if let Some(x) = b.get(&y) {
                if x != tb {
                    return None;
                }
            } else {
                if !fresh.contains(tb) || b.values().any(|x| x == tb) {
                    return None;
                }
                b.insert(y, tb.clone());
            }
        }
        Some(b)
    }

    fn solve(
        &mut self,
        s: usize,
        todo: u64,
        vis: &Vis,
        introduced: u64,
        budget: usize,
    ) -> Option<(usize, RankedTree)> {
        let key = (s, todo, vis.clone(), introduced, budget);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.solve_uncached(s, todo, vis, introduced, budget);
        self.memo.insert(key, r.clone());
        r
    }

    fn solve_uncached(
        &mut self,
        s: usize,
        todo: u64,
        vis: &Vis,
        introduced: u64,
        budget: usize,
    ) -> Option<(usize, RankedTree)> {
        let nta = self.nta;
        let needed = self.vars_of(todo);
        let visible: BTreeMap<usize, Term> = vis
            .iter()
            .filter_map(|(x, y)| y.map(|y| (y, x.clone())))
            .collect();
        let visible_mask = visible.keys().fold(0u64, |m, y| m | 1 << y);
        // a variable bound higher up but dropped on the way cannot come back
        if needed & introduced & !visible_mask != 0 {
            return None;
        }
        let inherited: BTreeMap<&Term, Option<usize>> = vis.iter().map(|(x, y)| (x, *y)).collect();
        let mut best: Option<(usize, RankedTree)> = None;
        for ti in self.by_result[s].clone() {
            let t = &nta.transitions[ti];
            let sym = nta.alphabet[t.symbol];
            let letter = &nta.letters[sym.letter];
            let m = sym.arity;
            let cost = usize::from(letter.atom.is_none());
            if cost > budget || best.as_ref().is_some_and(|(u, _)| *u <= cost) {
                continue;
            }
            let left = budget - cost;
            if bits(needed & visible_mask).any(|y| !letter.terms.contains(&visible[&y])) {
                continue;
            }
            let fresh: BTreeSet<Term> = letter
                .terms
                .iter()
                .filter(|x| {
                    x.is_var() && !inherited.contains_key(x) && self.atom_terms.contains(*x)
                })
                .cloned()
                .collect();
            let options: Vec<(u64, BTreeMap<usize, Term>)> = match &letter.atom {
                None => vec![(todo, BTreeMap::new())],
                Some(beta) => bits(todo)
                    .filter_map(|a| {
                        self.bind_atom(&self.atoms[a], beta, &visible, &fresh)
                            .map(|b| (todo & !(1 << a), b))
                    })
                    .collect(),
            };
            for (rest, b) in options {
                let n_rest = rest.count_ones() as usize;
                if m > n_rest + left || (m == 0 && rest != 0) {
                    continue;
                }
                let rest_new: Vec<usize> = bits(self.vars_of(rest) & !visible_mask)
                    .filter(|y| !b.contains_key(y))
                    .collect();
                let free: Vec<Term> = fresh
                    .iter()
                    .filter(|x| !b.values().any(|v| v == *x))
                    .cloned()
                    .collect();
                for extra in partial_injections(&rest_new, &free) {
                    let mut here = b.clone();
                    here.extend(extra);
                    let by_pool: BTreeMap<&Term, usize> =
                        here.iter().map(|(y, x)| (x, *y)).collect();
                    let next_vis: Vis = letter
                        .terms
                        .iter()
                        .filter(|x| x.is_var())
                        .map(|x| {
                            let y = inherited
                                .get(x)
                                .copied()
                                .unwrap_or_else(|| by_pool.get(x).copied());
                            (x.clone(), y)
                        })
                        .collect();
                    let bound_here = here.keys().fold(0u64, |acc, y| acc | 1 << y);
                    let next_intro = introduced | visible_mask | bound_here;
                    let unbound = self.vars_of(rest) & !visible_mask & !bound_here;
                    let rest_atoms: Vec<usize> = bits(rest).collect();
                    let symmetric = matches!(t.children, Children::Each { .. });
                    'assign: for assign in assignments(rest_atoms.len(), m, symmetric) {
                        let mut parts = vec![0u64; m];
                        for (a, c) in rest_atoms.iter().zip(&assign) {
                            parts[*c] |= 1 << a;
                        }
                        let mut seen = 0u64;
                        for p in &parts {
                            let v = self.vars_of(*p) & unbound;
                            if v & seen != 0 {
                                continue 'assign;
                            }
                            seen |= v;
                        }
                        let mut used = cost;
                        let mut kids = Vec::with_capacity(m);
                        for (i, p) in parts.iter().enumerate() {
                            let set = nta.state_sets[t.child_set(i)].clone();
                            let mut child: Option<(usize, RankedTree)> = None;
                            for cs in set {
                                let room = budget - used;
                                if let Some(r) = self.solve(cs, *p, &next_vis, next_intro, room) {
                                    if child.as_ref().is_none_or(|(u, _)| r.0 < *u) {
                                        child = Some(r);
                                    }
                                }
                            }
                            match child {
                                Some((u, tree)) if used + u <= budget => {
                                    used += u;
                                    kids.push(tree);
                                }
                                _ => continue 'assign,
                            }
                        }
                        if best.as_ref().is_none_or(|(u, _)| used < *u) {
                            best = Some((used, RankedTree::node(letter.clone(), kids)));
                        }
                    }
                }
            }
        }
        best
    }
}

/// Searches for an accepted ranked tree whose decoding is `q` up to variable
/// renaming, using at most `bound` atom-free nodes. Each query atom labels
/// exactly one node.
pub fn nta_accepts_query(
    nta: &Nta,
    q: &Bcq,
    bound: usize,
) -> Result<QueryAcceptance, AutomataError> {
    let atoms: Vec<Atom> = q.atoms().iter().cloned().collect();
    let qvars: Vec<Term> = q.vars().into_iter().collect();
    if atoms.len() > 64 || qvars.len() > 64 {
        return Err(AutomataError::Format(
            "query too large for the search".into(),
        ));
    }
    let atom_vars = atoms
        .iter()
        .map(|a| {
            a.vars()
                .map(|v| qvars.iter().position(|x| x == v).expect("query variable"))
                .fold(0u64, |m, y| m | 1 << y)
        })
        .collect();
    let mut by_result = vec![Vec::new(); nta.states.len()];
    for (i, t) in nta.transitions.iter().enumerate() {
        by_result[t.result].push(i);
    }
    let atom_terms = nta
        .letters
        .iter()
        .filter_map(|l| l.atom.as_ref())
        .flat_map(|a| a.vars().cloned())
        .collect();
    let mut search = Search {
        nta,
        atoms,
        qvars,
        atom_vars,
        by_result,
        atom_terms,
        memo: HashMap::new(),
    };
    let all = (1u64 << search.atoms.len()) - 1;
    let mut best: Option<(usize, RankedTree)> = None;
    for &f in &nta.finals {
        if let Some(r) = search.solve(f, all, &Vec::new(), 0, bound) {
            if best.as_ref().is_none_or(|(u, _)| r.0 < *u) {
                best = Some(r);
            }
        }
    }
    Ok(QueryAcceptance {
        accepted: best.is_some(),
        bound,
        witness: best.map(|(_, t)| t),
    })
}
