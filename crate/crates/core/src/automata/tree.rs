//! Ranked trees, nondeterministic bottom-up tree automata and acceptance.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::AutomataError;
use crate::model::{Atom, Term};
use crate::syntax::parse_query;

/// A node label `(X, Φ)`: a term set and at most one atom over it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub terms: BTreeSet<Term>,
    pub atom: Option<Atom>,
}

impl Letter {
    pub fn new(terms: impl IntoIterator<Item = Term>, atom: Option<Atom>) -> Self {
        Letter {
            terms: terms.into_iter().collect(),
            atom,
        }
    }

    fn to_json(&self) -> Value {
        let terms: Vec<String> = self.terms.iter().map(Term::name).collect();
        match &self.atom {
            Some(a) => json!({ "terms": terms, "atom": a.to_string() }),
            None => json!({ "terms": terms }),
        }
    }

    fn from_json(v: &Value) -> Result<Self, AutomataError> {
        let raw: LetterJson =
            serde_json::from_value(v.clone()).map_err(|e| AutomataError::Format(e.to_string()))?;
        let atom = match raw.atom {
            Some(s) => Some(parse_atom(&s)?),
            None => None,
        };
        Ok(Letter::new(
            raw.terms.iter().map(|t| Term::from_token(t)),
            atom,
        ))
    }
}

#[derive(Deserialize)]
struct LetterJson {
    terms: Vec<String>,
    atom: Option<String>,
}

fn parse_atom(s: &str) -> Result<Atom, AutomataError> {
    let text = if s.trim_end().ends_with('.') {
        s.to_string()
    } else {
        format!("{s}.")
    };
    let q = parse_query(&text)?;
    let d = q.disjuncts();
    match (d.len(), d.iter().next()) {
        (1, Some(b)) if b.len() == 1 => Ok(b.atoms().iter().next().cloned().expect("one atom")),
        _ => Err(AutomataError::Format(format!("`{s}` is not a single atom"))),
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms.iter().map(Term::name).collect();
        write!(f, "{{{}}}", terms.join(","))?;
        if let Some(a) = &self.atom {
            write!(f, "[{a}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A ranked tree; a node's rank is its number of children.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankedTree {
    pub letter: Letter,
    pub children: Vec<RankedTree>,
}

impl RankedTree {
    pub fn leaf(letter: Letter) -> Self {
        RankedTree {
            letter,
            children: Vec::new(),
        }
    }

    pub fn node(letter: Letter, children: Vec<RankedTree>) -> Self {
        RankedTree { letter, children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(RankedTree::size).sum::<usize>()
    }

    fn value(&self) -> Value {
        json!({
            "letter": self.letter.to_json(),
            "children": self.children.iter().map(RankedTree::value).collect::<Vec<_>>(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut v = self.value();
        v["format"] = json!(crate::FORMAT_TAG);
        serde_json::to_string_pretty(&v).expect("tree serializes")
    }

    fn from_value(v: &Value) -> Result<Self, AutomataError> {
        let letter = Letter::from_json(
            v.get("letter")
                .ok_or_else(|| fmt_err("node without letter"))?,
        )?;
        let children = match v.get("children") {
            None => Vec::new(),
            Some(Value::Array(cs)) => cs
                .iter()
                .map(RankedTree::from_value)
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(fmt_err("children must be an array")),
        };
        Ok(RankedTree { letter, children })
    }

    pub fn from_json(text: &str) -> Result<Self, AutomataError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| AutomataError::Format(e.to_string()))?;
        RankedTree::from_value(&v)
    }

    /// Nodes in post-order, each with its path from the root.
    fn postorder(&self) -> Vec<(Vec<usize>, &RankedTree)> {
        fn go<'a>(
            t: &'a RankedTree,
            path: &mut Vec<usize>,
            out: &mut Vec<(Vec<usize>, &'a RankedTree)>,
        ) {
            for (i, c) in t.children.iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
            out.push((path.clone(), t));
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl Serialize for RankedTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

fn fmt_err(msg: &str) -> AutomataError {
    AutomataError::Format(msg.to_string())
}

/// A letter paired with a rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub letter: usize,
    pub arity: usize,
}

/// The admissible child states of a transition, as indices into
/// [`Nta::state_sets`]. `Each(s)` stands for the same set at every position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Children {
    Positions(Vec<usize>),
    Each { each: usize },
}

/// `ω(s1, …, sm) → s` for every choice of `si` in the listed sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub symbol: usize,
    pub children: Children,
    pub result: usize,
}

impl Transition {
    pub fn child_set(&self, pos: usize) -> usize {
        match &self.children {
            Children::Positions(v) => v[pos],
            Children::Each { each } => *each,
        }
    }
}

/// A nondeterministic bottom-up tree automaton. Transitions list child
/// states as products of state sets, which keeps compiled automata small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nta {
    pub states: Vec<String>,
    pub finals: BTreeSet<usize>,
    pub letters: Vec<Letter>,
    pub alphabet: Vec<Symbol>,
    pub state_sets: Vec<BTreeSet<usize>>,
    pub transitions: Vec<Transition>,
}

#[derive(Serialize, Deserialize)]
struct NtaJson {
    #[serde(default)]
    format: Option<String>,
    states: Vec<String>,
    finals: Vec<String>,
    letters: Vec<Value>,
    alphabet: Vec<Symbol>,
    state_sets: Vec<Vec<String>>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    symbol: usize,
    children: Children,
    result: String,
}

impl Nta {
    pub fn to_json(&self) -> String {
        let name = |s: &usize| self.states[*s].clone();
        let j = NtaJson {
            format: Some(crate::FORMAT_TAG.to_string()),
            states: self.states.clone(),
            finals: self.finals.iter().map(name).collect(),
            letters: self.letters.iter().map(Letter::to_json).collect(),
            alphabet: self.alphabet.clone(),
            state_sets: self
                .state_sets
                .iter()
                .map(|s| s.iter().map(name).collect())
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    symbol: t.symbol,
                    children: t.children.clone(),
                    result: name(&t.result),
                })
                .collect(),
        };
        serde_json::to_string(&j).expect("automaton serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AutomataError> {
        let j: NtaJson =
            serde_json::from_str(text).map_err(|e| AutomataError::Format(e.to_string()))?;
        let index: HashMap<&str, usize> = j
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != j.states.len() {
            return Err(fmt_err("duplicate state name"));
        }
        let state = |s: &String| {
            index
                .get(s.as_str())
                .copied()
                .ok_or_else(|| AutomataError::Format(format!("unknown state `{s}`")))
        };
        let nta = Nta {
            states: j.states.clone(),
            finals: j.finals.iter().map(state).collect::<Result<_, _>>()?,
            letters: j
                .letters
                .iter()
                .map(Letter::from_json)
                .collect::<Result<_, _>>()?,
            alphabet: j.alphabet,
            state_sets: j
                .state_sets
                .iter()
                .map(|s| s.iter().map(state).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?,
            transitions: j
                .transitions
                .iter()
                .map(|t| {
                    Ok(Transition {
                        symbol: t.symbol,
                        children: t.children.clone(),
                        result: state(&t.result)?,
                    })
                })
                .collect::<Result<_, AutomataError>>()?,
        };
        nta.check()?;
        Ok(nta)
    }

    fn check(&self) -> Result<(), AutomataError> {
        if self.alphabet.iter().any(|s| s.letter >= self.letters.len()) {
            return Err(fmt_err("alphabet refers to a missing letter"));
        }
        let distinct: HashSet<&Symbol> = self.alphabet.iter().collect();
        if distinct.len() != self.alphabet.len() {
            return Err(fmt_err("duplicate alphabet symbol"));
        }
        for t in &self.transitions {
            let sym = self
                .alphabet
                .get(t.symbol)
                .ok_or_else(|| fmt_err("transition on a missing symbol"))?;
            let sets: Vec<usize> = match &t.children {
                Children::Positions(v) if v.len() != sym.arity => {
                    return Err(fmt_err("transition arity differs from its symbol"));
                }
                Children::Positions(v) => v.clone(),
                Children::Each { each } => vec![*each],
            };
            if sets.iter().any(|s| *s >= self.state_sets.len()) {
                return Err(fmt_err("transition refers to a missing state set"));
            }
        }
        Ok(())
    }

    /// Looks up `(letter, arity)` in the alphabet.
    pub fn symbol_of(&self, letter: &Letter, arity: usize) -> Option<usize> {
        let l = self.letters.iter().position(|x| x == letter)?;
        self.alphabet
            .iter()
            .position(|s| s.letter == l && s.arity == arity)
    }

    fn symbol_index(&self) -> HashMap<(&Letter, usize), usize> {
        self.alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| ((&self.letters[s.letter], s.arity), i))
            .collect()
    }

    fn by_symbol(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.alphabet.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            out[t.symbol].push(i);
        }
        out
    }

    /// Whether transition `t` accepts `child` at position `pos`.
    pub fn admits(&self, t: &Transition, pos: usize, child: usize) -> bool {
        self.state_sets[t.child_set(pos)].contains(&child)
    }

    /// The state reached by each letter; oblivious when every letter reaches at
    /// most one state.
    pub fn letter_results(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.letters.len()];
        for t in &self.transitions {
            out[self.alphabet[t.symbol].letter].insert(t.result);
        }
        out
    }

    pub fn is_oblivious(&self) -> bool {
        self.letter_results().iter().all(|s| s.len() <= 1)
    }

    pub fn require_oblivious(&self) -> Result<(), AutomataError> {
        match self.letter_results().iter().position(|s| s.len() > 1) {
            Some(l) => Err(AutomataError::NotOblivious(self.letters[l].to_string())),
            None => Ok(()),
        }
    }

    fn resolve(&self, tree: &RankedTree) -> Result<Vec<usize>, AutomataError> {
        let index = self.symbol_index();
        tree.postorder()
            .into_iter()
            .map(|(_, n)| {
                index
                    .get(&(&n.letter, n.children.len()))
                    .copied()
                    .ok_or_else(|| AutomataError::UnknownSymbol {
                        letter: n.letter.to_string(),
                        arity: n.children.len(),
                    })
            })
            .collect()
    }
}

/// One rewriting step of a run: the node at `path` (child indices from the
/// root) becomes `state` by `transition`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunStep {
    pub path: Vec<usize>,
    pub state: String,
    pub transition: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeAcceptance {
    pub accepted: bool,
    /// States reachable at the root.
    pub root_states: Vec<String>,
    /// An accepting run in bottom-up order, when accepted.
    pub run: Option<Vec<RunStep>>,
}

/// Post-order node ids with child ids.
fn shape(tree: &RankedTree) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let nodes = tree.postorder();
    let pos: BTreeMap<&Vec<usize>, usize> =
        nodes.iter().enumerate().map(|(i, (p, _))| (p, i)).collect();
    let children = nodes
        .iter()
        .map(|(p, n)| {
            (0..n.children.len())
                .map(|i| {
                    let mut c = p.clone();
                    c.push(i);
                    pos[&c]
                })
                .collect()
        })
        .collect();
    (nodes.into_iter().map(|(p, _)| p).collect(), children)
}

/// Decides acceptance by computing the reachable state set of every node
/// bottom-up, then reads back one accepting run.
pub fn nta_accepts_tree(nta: &Nta, tree: &RankedTree) -> Result<TreeAcceptance, AutomataError> {
    let syms = nta.resolve(tree)?;
    let (paths, children) = shape(tree);
    let by_symbol = nta.by_symbol();
    // reach[n]: state -> (transition, child states)
    let mut reach: Vec<BTreeMap<usize, (usize, Vec<usize>)>> = Vec::with_capacity(syms.len());
    for (n, sym) in syms.iter().enumerate() {
        let mut here = BTreeMap::new();
        for &ti in &by_symbol[*sym] {
            let t = &nta.transitions[ti];
            if here.contains_key(&t.result) {
                continue;
            }
            let pick: Option<Vec<usize>> = children[n]
                .iter()
                .enumerate()
                .map(|(i, c)| reach[*c].keys().copied().find(|s| nta.admits(t, i, *s)))
                .collect();
            if let Some(states) = pick {
                here.insert(t.result, (ti, states));
            }
        }
        reach.push(here);
    }
    let root = syms.len() - 1;
    let root_states = reach[root].keys().map(|s| nta.states[*s].clone()).collect();
    let Some(&fin) = reach[root].keys().find(|s| nta.finals.contains(s)) else {
        return Ok(TreeAcceptance {
            accepted: false,
            root_states,
            run: None,
        });
    };
    let mut chosen = vec![usize::MAX; syms.len()];
    chosen[root] = fin;
    let mut steps = Vec::new();
    for n in (0..syms.len()).rev() {
        let (ti, states) = &reach[n][&chosen[n]];
        for (c, s) in children[n].iter().zip(states) {
            chosen[*c] = *s;
        }
        steps.push(RunStep {
            path: paths[n].clone(),
            state: nta.states[chosen[n]].clone(),
            transition: *ti,
        });
    }
    steps.reverse();
    Ok(TreeAcceptance {
        accepted: true,
        root_states,
        run: Some(steps),
    })
}

/// Acceptance by exploring every rewriting sequence literally: a step turns
/// an unprocessed node whose children all carry states into a state. Exponential;
/// meant as an oracle for small trees.
pub fn accepts_by_rewriting(nta: &Nta, tree: &RankedTree) -> Result<bool, AutomataError> {
    let syms = nta.resolve(tree)?;
    let (_, children) = shape(tree);
    let root = syms.len() - 1;
    let start: Vec<Option<usize>> = vec![None; syms.len()];
    let mut seen = HashSet::new();
    let mut stack = vec![start];
    while let Some(cfg) = stack.pop() {
        if let Some(s) = cfg[root] {
            if nta.finals.contains(&s) {
                return Ok(true);
            }
            continue;
        }
        if !seen.insert(cfg.clone()) {
            continue;
        }
        for n in 0..syms.len() {
            if cfg[n].is_some() || children[n].iter().any(|c| cfg[*c].is_none()) {
                continue;
            }
            for t in nta.transitions.iter().filter(|t| t.symbol == syms[n]) {
                let fits = children[n]
                    .iter()
                    .enumerate()
                    .all(|(i, c)| nta.admits(t, i, cfg[*c].expect("child processed")));
                if fits {
                    let mut next = cfg.clone();
                    next[n] = Some(t.result);
                    stack.push(next);
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letter(terms: &[&str], atom: Option<&str>) -> Letter {
        Letter::new(
            terms.iter().map(|t| Term::from_token(t)),
            atom.map(|a| parse_atom(a).unwrap()),
        )
    }

    /// States p, f. Leaf `a` gives p; `g(p, p)` gives f.
    fn toy() -> Nta {
        Nta {
            states: vec!["p".into(), "f".into()],
            finals: [1].into(),
            letters: vec![letter(&["a"], None), letter(&["X"], Some("E(X)"))],
            alphabet: vec![
                Symbol {
                    letter: 0,
                    arity: 0,
                },
                Symbol {
                    letter: 1,
                    arity: 2,
                },
            ],
            state_sets: vec![[0].into()],
            transitions: vec![
                Transition {
                    symbol: 0,
                    children: Children::Positions(vec![]),
                    result: 0,
                },
                Transition {
                    symbol: 1,
                    children: Children::Each { each: 0 },
                    result: 1,
                },
            ],
        }
    }

    #[test]
    fn accepts_and_traces() {
        let nta = toy();
        let a = RankedTree::leaf(nta.letters[0].clone());
        let t = RankedTree::node(nta.letters[1].clone(), vec![a.clone(), a.clone()]);
        let r = nta_accepts_tree(&nta, &t).unwrap();
        assert!(r.accepted);
        let run = r.run.unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(run.last().unwrap().state, "f");
        assert!(accepts_by_rewriting(&nta, &t).unwrap());
        assert!(!nta_accepts_tree(&nta, &a).unwrap().accepted);
        assert!(!accepts_by_rewriting(&nta, &a).unwrap());
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let nta = toy();
        let t = RankedTree::node(
            nta.letters[0].clone(),
            vec![RankedTree::leaf(nta.letters[0].clone())],
        );
        assert!(matches!(
            nta_accepts_tree(&nta, &t),
            Err(AutomataError::UnknownSymbol { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let nta = toy();
        assert_eq!(Nta::from_json(&nta.to_json()).unwrap(), nta);
        let t = RankedTree::node(
            nta.letters[1].clone(),
            vec![
                RankedTree::leaf(nta.letters[0].clone()),
                RankedTree::leaf(nta.letters[0].clone()),
            ],
        );
        assert_eq!(RankedTree::from_json(&t.to_json()).unwrap(), t);
        assert!(nta.is_oblivious());
    }

    #[test]
    fn rejects_bad_arity() {
        let mut nta = toy();
        nta.transitions[1].children = Children::Positions(vec![0]);
        assert!(Nta::from_json(&nta.to_json()).is_err());
    }
}
