//! Dependencies, rule sets, dialect classification and canonical form.

mod lexer;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{merge_arity, Atom, ModelError, Name, Term};

pub use parser::{parse_database, parse_program, parse_query};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("rule {rule}: variable {var} in an equality does not occur in the body")]
    Unsafe { rule: usize, var: String },
    #[error(transparent)]
    Schema(#[from] ModelError),
    #[error("relation {0} declared in both the data and the query schema")]
    SchemaOverlap(String),
    #[error("rule {0} is not in canonical form")]
    NonCanonical(usize),
    #[error("rule {rule} is {found}, expected at most {allowed}")]
    Dialect {
        rule: usize,
        found: Dialect,
        allowed: Dialect,
    },
}

/// Relation symbols with arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema(pub BTreeMap<Name, usize>);

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, rel: &str, arity: usize) -> Self {
        self.0.insert(rel.into(), arity);
        self
    }

    pub fn contains(&self, rel: &str) -> bool {
        self.0.contains_key(rel)
    }

    pub fn arity(&self, rel: &str) -> Option<usize> {
        self.0.get(rel).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, usize)> {
        self.0.iter().map(|(n, k)| (n, *k))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.0.values().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, k)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}/{k}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeadAtom {
    Rel(Atom),
    Eq(Term, Term),
}

impl HeadAtom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            HeadAtom::Rel(a) => a.args.iter().collect(),
            HeadAtom::Eq(l, r) => vec![l, r],
        }
    }

    pub fn as_rel(&self) -> Option<&Atom> {
        match self {
            HeadAtom::Rel(a) => Some(a),
            HeadAtom::Eq(..) => None,
        }
    }
}

/// The dialect lattice: linear TGD ⊂ TGD ⊂ DTGD ⊂ DED.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dialect {
    LinearTgd,
    Tgd,
    Dtgd,
    Ded,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::LinearTgd => "linear-TGD",
            Dialect::Tgd => "TGD",
            Dialect::Dtgd => "DTGD",
            Dialect::Ded => "DED",
        })
    }
}

/// `body -> head_1 | ... | head_k`, each head disjunct a conjunction.
/// An empty body stands for `true`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dependency {
    pub label: Option<String>,
    pub body: Vec<Atom>,
    pub head: Vec<Vec<HeadAtom>>,
}

fn push_unique(out: &mut Vec<Term>, t: &Term) {
    if t.is_var() && !out.contains(t) {
        out.push(t.clone());
    }
}

impl Dependency {
    pub fn new(body: Vec<Atom>, head: Vec<Vec<HeadAtom>>) -> Self {
        Dependency {
            label: None,
            body,
            head,
        }
    }

    /// A rule with one atom per disjunct.
    pub fn disjunctive(body: Vec<Atom>, head: Vec<Atom>) -> Self {
        Self::new(
            body,
            head.into_iter().map(|a| vec![HeadAtom::Rel(a)]).collect(),
        )
    }

    /// A rule with a single conjunctive head.
    pub fn tgd(body: Vec<Atom>, head: Vec<Atom>) -> Self {
        Self::new(body, vec![head.into_iter().map(HeadAtom::Rel).collect()])
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Body variables in order of first occurrence.
    pub fn universal(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for a in &self.body {
            for t in &a.args {
                push_unique(&mut out, t);
            }
        }
        out
    }

    fn head_vars(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for d in &self.head {
            for h in d {
                for t in h.terms() {
                    push_unique(&mut out, t);
                }
            }
        }
        out
    }

    /// Variables shared by body and head, in body order.
    pub fn frontier(&self) -> Vec<Term> {
        let head = self.head_vars();
        self.universal()
            .into_iter()
            .filter(|v| head.contains(v))
            .collect()
    }

    /// Head-only variables, in head order.
    pub fn existentials(&self) -> Vec<Term> {
        let body = self.universal();
        self.head_vars()
            .into_iter()
            .filter(|v| !body.contains(v))
            .collect()
    }

    pub fn has_equality(&self) -> bool {
        self.head
            .iter()
            .flatten()
            .any(|h| matches!(h, HeadAtom::Eq(..)))
    }

    pub fn is_canonical(&self) -> bool {
        self.head.iter().all(|d| d.len() == 1)
    }

    /// Head atoms of a canonical rule, one per disjunct.
    pub fn head_atoms(&self) -> impl Iterator<Item = &HeadAtom> {
        self.head.iter().flatten()
    }

    pub fn classify(&self) -> Dialect {
        if self.has_equality() {
            Dialect::Ded
        } else if self.head.len() != 1 {
            Dialect::Dtgd
        } else if self.body.len() == 1 {
            Dialect::LinearTgd
        } else {
            Dialect::Tgd
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body
            .iter()
            .chain(self.head.iter().flatten().filter_map(HeadAtom::as_rel))
    }

    pub fn consts(&self) -> BTreeSet<Term> {
        let mut out: BTreeSet<Term> = self
            .atoms()
            .flat_map(|a| a.args.iter())
            .filter(|t| t.is_const())
            .cloned()
            .collect();
        for h in self.head.iter().flatten() {
            if let HeadAtom::Eq(l, r) = h {
                out.extend([l, r].into_iter().filter(|t| t.is_const()).cloned());
            }
        }
        out
    }

    fn check_safe(&self, idx: usize) -> Result<(), SyntaxError> {
        let body = self.universal();
        for h in self.head.iter().flatten() {
            if let HeadAtom::Eq(l, r) = h {
                for t in [l, r] {
                    if t.is_var() && !body.contains(t) {
                        return Err(SyntaxError::Unsafe {
                            rule: idx,
                            var: t.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A finite set of dependencies with its data schema 𝒟 and query schema 𝒬.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Dependency>,
    pub data: Schema,
    pub query: Schema,
}

impl RuleSet {
    /// Builds and validates a rule set.
    pub fn new(rules: Vec<Dependency>, data: Schema, query: Schema) -> Result<Self, SyntaxError> {
        let rs = RuleSet { rules, data, query };
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<(), SyntaxError> {
        for r in self.data.0.keys() {
            if self.query.contains(r) {
                return Err(SyntaxError::SchemaOverlap(r.to_string()));
            }
        }
        self.schema()?;
        for (i, r) in self.rules.iter().enumerate() {
            r.check_safe(i)?;
        }
        Ok(())
    }

    /// The working schema 𝒮: every symbol declared or used.
    pub fn schema(&self) -> Result<Schema, ModelError> {
        let mut m = BTreeMap::new();
        for (r, k) in self.data.iter().chain(self.query.iter()) {
            merge_arity(&mut m, r, k)?;
        }
        for rule in &self.rules {
            for a in rule.atoms() {
                merge_arity(&mut m, &a.rel, a.arity())?;
            }
        }
        Ok(Schema(m))
    }

    pub fn dialect(&self) -> Dialect {
        self.rules
            .iter()
            .map(Dependency::classify)
            .max()
            .unwrap_or(Dialect::LinearTgd)
    }

    pub fn is_canonical(&self) -> bool {
        self.rules.iter().all(Dependency::is_canonical)
    }

    pub fn require_canonical(&self) -> Result<(), SyntaxError> {
        match self.rules.iter().position(|r| !r.is_canonical()) {
            Some(i) => Err(SyntaxError::NonCanonical(i)),
            None => Ok(()),
        }
    }

    pub fn require_dialect(&self, allowed: Dialect) -> Result<(), SyntaxError> {
        for (i, r) in self.rules.iter().enumerate() {
            let found = r.classify();
            if found > allowed {
                return Err(SyntaxError::Dialect {
                    rule: i,
                    found,
                    allowed,
                });
            }
        }
        Ok(())
    }

    pub fn consts(&self) -> BTreeSet<Term> {
        self.rules.iter().flat_map(Dependency::consts).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Looks a rule up by label, falling back to its index.
    pub fn find(&self, id: &str) -> Option<usize> {
        self.rules
            .iter()
            .position(|r| r.label.as_deref() == Some(id))
            .or_else(|| id.parse().ok().filter(|&i: &usize| i < self.rules.len()))
    }

    /// Replaces each multi-atom head disjunct by a fresh auxiliary atom over the
    /// disjunct's variables, plus one projection rule per original atom.
    pub fn canonicalize(&self) -> RuleSet {
        let used: BTreeSet<String> = self
            .schema()
            .map(|s| s.0.keys().map(|k| k.to_string()).collect())
            .unwrap_or_default();
        let mut rules = Vec::new();
        let mut projections = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            if r.is_canonical() {
                rules.push(r.clone());
                continue;
            }
            let mut head = Vec::new();
            for (j, d) in r.head.iter().enumerate() {
                if d.len() == 1 {
                    head.push(d.clone());
                    continue;
                }
                let mut name = format!("_aux{i}_{j}");
                while used.contains(&name) {
                    name.push('_');
                }
                let mut vars = Vec::new();
                for h in d {
                    for t in h.terms() {
                        push_unique(&mut vars, t);
                    }
                }
                let aux = Atom::new(&name, vars);
                for h in d {
                    projections.push(Dependency::new(vec![aux.clone()], vec![vec![h.clone()]]));
                }
                head.push(vec![HeadAtom::Rel(aux)]);
            }
            rules.push(Dependency {
                label: r.label.clone(),
                body: r.body.clone(),
                head,
            });
        }
        rules.extend(projections);
        RuleSet {
            rules,
            data: self.data.clone(),
            query: self.query.clone(),
        }
    }

    /// Symbols that start with the reserved `_` prefix.
    pub fn uses_reserved(&self) -> bool {
        self.rules
            .iter()
            .flat_map(Dependency::atoms)
            .any(|a| a.rel.starts_with('_'))
            || self
                .rules
                .iter()
                .flat_map(Dependency::atoms)
                .flat_map(|a| a.args.iter())
                .any(|t| t.name().starts_with('_'))
    }
}
