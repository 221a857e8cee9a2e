//! Linear TGDs with a single-fact database to an oblivious automaton that
//! accepts the tree representations of entailed queries.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{
    entailed_patterns, pattern_matches, require_linear, AutomataError, Children, Letter, Nta,
    Symbol, Transition,
};
use crate::model::{Atom, Instance, Term};
use crate::syntax::{RuleSet, Schema};

/// Name of the single final state.
pub const FINAL_STATE: &str = "◇";

/// All atoms over `schema` with arguments from `terms`, in lexicographic order.
pub fn atom_universe(schema: &Schema, terms: &[Term]) -> Vec<Atom> {
    let mut out = BTreeSet::new();
    for (rel, k) in schema.iter() {
        let mut tuples: Vec<Vec<Term>> = vec![vec![]];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    terms.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| Atom::new(rel, t)));
    }
    out.into_iter().collect()
}

/// Builds the automaton whose states are the atoms over `adom(D)` and the
/// pool `X1..X2k` plus a final state. A node labelled for atom `α` moves to
/// state `α` when each child state is an atom entailed by `{α} ∪ Σ`; the root
/// label moves to the final state on the database fact. Every rank from 0 to
/// the number of atoms is in the alphabet.
pub fn compile_linear_tgds(
    rules: &RuleSet,
    d: &Instance,
    query: &Schema,
) -> Result<Nta, AutomataError> {
    require_linear(rules)?;
    if d.len() != 1 {
        return Err(AutomataError::NotSingleFact(d.len()));
    }
    let fact = d.iter().next().expect("one fact").clone();
    let mut schema = rules
        .schema()
        .map_err(|e| AutomataError::Format(e.to_string()))?;
    schema = schema.with(&fact.rel, fact.arity());
    for (r, k) in query.iter() {
        schema = schema.with(r, k);
    }
    let k = schema.max_arity();
    let adom: Vec<Term> = d.adom().into_iter().collect();
    let mut terms = adom.clone();
    terms.extend((1..=2 * k).map(|i| Term::var(&format!("X{i}"))));
    let at = atom_universe(&schema, &terms);

    // ι: the i-th atom gets the variables at the set bits of i+1, which is
    // never 0 and never all bits.
    let bits = usize::BITS - (at.len() + 1).leading_zeros();
    let v0: Vec<Term> = (1..=bits).map(|i| Term::var(&format!("V{i}"))).collect();
    let iota = |i: usize| {
        v0.iter()
            .enumerate()
            .filter(move |(b, _)| (i + 1) >> b & 1 == 1)
            .map(|(_, v)| v.clone())
    };

    let ent: Vec<BTreeSet<usize>> = at
        .par_iter()
        .map(|alpha| {
            let pats = entailed_patterns(alpha, rules)?;
            Ok(at
                .iter()
                .enumerate()
                .filter(|(_, beta)| pattern_matches(&pats, alpha, beta))
                .map(|(j, _)| j)
                .collect())
        })
        .collect::<Result<_, AutomataError>>()?;

    let fin = at.len();
    let mut states: Vec<String> = at.iter().map(Atom::to_string).collect();
    states.push(FINAL_STATE.to_string());

    let mut set_ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut intern = |s: BTreeSet<usize>| {
        let n = set_ids.len();
        *set_ids.entry(s).or_insert(n)
    };

    // (letter, state it leads to); the root letter is last
    let mut letters: Vec<(Letter, usize)> = Vec::new();
    for (i, alpha) in at.iter().enumerate() {
        if query.contains(&alpha.rel) {
            letters.push((
                Letter::new(alpha.args.iter().cloned(), Some(alpha.clone())),
                i,
            ));
        }
        letters.push((
            Letter::new(alpha.args.iter().cloned().chain(iota(i)), None),
            i,
        ));
    }
    letters.push((
        Letter::new(adom.iter().cloned().chain(v0.iter().cloned()), None),
        fin,
    ));

    let fact_id = at
        .iter()
        .position(|a| *a == fact)
        .expect("database fact is in the atom universe");
    let fact_set = intern([fact_id].into());
    let ent_sets: Vec<usize> = ent.into_iter().map(&mut intern).collect();

    let mut alphabet = Vec::new();
    let mut transitions = Vec::new();
    for (l, (_, target)) in letters.iter().enumerate() {
        for m in 0..=at.len() {
            let symbol = alphabet.len();
            alphabet.push(Symbol {
                letter: l,
                arity: m,
            });
            if *target == fin {
                if m == 1 {
                    transitions.push(Transition {
                        symbol,
                        children: Children::Positions(vec![fact_set]),
                        result: fin,
                    });
                }
            } else {
                transitions.push(Transition {
                    symbol,
                    children: Children::Each {
                        each: ent_sets[*target],
                    },
                    result: *target,
                });
            }
        }
    }
    let mut state_sets = vec![BTreeSet::new(); set_ids.len()];
    for (s, i) in set_ids {
        state_sets[i] = s;
    }
    Ok(Nta {
        states,
        finals: [fin].into(),
        letters: letters.into_iter().map(|(l, _)| l).collect(),
        alphabet,
        state_sets,
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{nta_accepts_tree, RankedTree};
    use crate::syntax::{parse_database, parse_program};

    pub(crate) fn example() -> (RuleSet, Instance, Schema) {
        (
            parse_program("A(X) -> E(X,Y).").unwrap(),
            parse_database("A(a).").unwrap(),
            Schema::new().with("E", 2),
        )
    }

    #[test]
    fn sizes_and_obliviousness() {
        let (r, d, q) = example();
        let nta = compile_linear_tgds(&r, &d, &q).unwrap();
        // a plus X1..X4: 5 unary and 25 binary atoms
        assert_eq!(nta.states.len(), 31);
        // 25 query letters, 30 atom letters, one root letter
        assert_eq!(nta.letters.len(), 56);
        assert!(nta.is_oblivious());
    }

    #[test]
    fn accepts_the_successor_tree() {
        let (r, d, q) = example();
        let nta = compile_linear_tgds(&r, &d, &q).unwrap();
        let root = nta.letters.last().unwrap().clone();
        let a_letter = nta
            .letters
            .iter()
            .find(|l| {
                l.atom.is_none()
                    && l.terms.contains(&Term::constant("a"))
                    && l.terms.len() < root.terms.len()
            })
            .unwrap()
            .clone();
        let e = |x: &str, y: &str| {
            let a = Atom::parse_args("E", &[x, y]);
            Letter::new(a.args.clone(), Some(a))
        };
        let good = RankedTree::node(
            root.clone(),
            vec![RankedTree::node(
                a_letter.clone(),
                vec![RankedTree::leaf(e("a", "X1"))],
            )],
        );
        assert!(nta_accepts_tree(&nta, &good).unwrap().accepted);
        let bad = RankedTree::node(
            root,
            vec![RankedTree::node(
                a_letter,
                vec![RankedTree::leaf(e("X1", "a"))],
            )],
        );
        assert!(!nta_accepts_tree(&nta, &bad).unwrap().accepted);
    }

    #[test]
    fn preconditions() {
        let (r, _, q) = example();
        let two = parse_database("A(a). A(b).").unwrap();
        assert_eq!(
            compile_linear_tgds(&r, &two, &q),
            Err(AutomataError::NotSingleFact(2))
        );
        let nl = parse_program("A(X), B(X) -> E(X,X).").unwrap();
        let one = parse_database("A(a).").unwrap();
        assert_eq!(
            compile_linear_tgds(&nl, &one, &q),
            Err(AutomataError::NotLinear(0))
        );
    }
}
