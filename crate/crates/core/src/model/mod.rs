//! Terms, atoms, instances and Boolean conjunctive queries.

mod hom;
mod union;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub use hom::{entails_bcq, entails_ucq, hom_search, hom_search_from, is_homomorphism};
pub use union::c_disjoint_union;

/// Interned-ish identifier used for relation symbols, constants and variables.
pub type Name = Arc<str>;

/// A term mapping, e.g. a (C-)homomorphism or a substitution.
pub type Mapping = BTreeMap<Term, Term>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("relation {relation} used with arity {left} and {right}")]
    SchemaMismatch {
        relation: String,
        left: usize,
        right: usize,
    },
    #[error("empty query")]
    EmptyQuery,
}

/// Constant, labeled null or variable. The three kinds never compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Name),
    Null(Null),
    Var(Name),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Null {
    /// A null read from a file or produced by renaming.
    Named(Name),
    /// A null created by the chase; identity is its provenance.
    Skolem(Arc<Skolem>),
}

/// Provenance of a chase null: the rule that fired, the image of its frontier
/// and the existential variable being witnessed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Skolem {
    pub rule: usize,
    pub frontier: Vec<Term>,
    pub var: Name,
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn null(name: &str) -> Self {
        Term::Null(Null::Named(name.into()))
    }

    pub fn skolem(rule: usize, frontier: Vec<Term>, var: &str) -> Self {
        Term::Null(Null::Skolem(Arc::new(Skolem {
            rule,
            frontier,
            var: var.into(),
        })))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Name component without kind information. Skolem nulls render their provenance.
    pub fn name(&self) -> String {
        match self {
            Term::Const(n) | Term::Var(n) => n.to_string(),
            Term::Null(n) => n.to_string(),
        }
    }

    /// Classifies a surface token: uppercase start is a variable, `_` start a null,
    /// anything else a constant.
    pub fn from_token(token: &str) -> Self {
        match token.chars().next() {
            Some(c) if c.is_ascii_uppercase() => Term::var(token),
            Some('_') => Term::null(token),
            _ => Term::constant(token),
        }
    }

    /// Reads variables as nulls; used to build `[q]`.
    pub fn frozen(&self) -> Term {
        match self {
            Term::Var(v) => Term::null(&format!("_{v}")),
            t => t.clone(),
        }
    }
}

impl fmt::Display for Null {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Null::Named(n) => write!(f, "{n}"),
            Null::Skolem(s) => {
                write!(f, "_sk{}.{}(", s.rule, s.var)?;
                for (i, t) in s.frontier.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(n) | Term::Var(n) => write!(f, "{n}"),
            Term::Null(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Null {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A relational atom `R(t1, ..., tk)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(rel: &str, args: Vec<Term>) -> Self {
        Atom {
            rel: rel.into(),
            args,
        }
    }

    /// Builds an atom from surface tokens, classifying each with [`Term::from_token`].
    pub fn parse_args(rel: &str, args: &[&str]) -> Self {
        Atom::new(rel, args.iter().map(|a| Term::from_token(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().filter(|t| t.is_var())
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Atom {
        Atom {
            rel: self.rel.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }

    /// Applies a mapping, leaving unmapped terms untouched.
    pub fn apply(&self, m: &Mapping) -> Atom {
        self.map_terms(|t| m.get(t).cloned().unwrap_or_else(|| t.clone()))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite set of atoms kept in canonical (lexicographic) order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    atoms: BTreeSet<Atom>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter().cloned())
            .collect()
    }

    /// Constants occurring in the instance.
    pub fn adom(&self) -> BTreeSet<Term> {
        self.terms().into_iter().filter(Term::is_const).collect()
    }

    /// No nulls and no variables.
    pub fn is_database(&self) -> bool {
        self.atoms.iter().all(|a| a.args.iter().all(Term::is_const))
    }

    pub fn is_ground(&self) -> bool {
        self.atoms.iter().all(Atom::is_ground)
    }

    /// Relation arities used, or the first conflict.
    pub fn schema(&self) -> Result<BTreeMap<Name, usize>, ModelError> {
        let mut out = BTreeMap::new();
        for a in &self.atoms {
            merge_arity(&mut out, &a.rel, a.arity())?;
        }
        Ok(out)
    }

    pub fn apply(&self, m: &Mapping) -> Instance {
        self.atoms.iter().map(|a| a.apply(m)).collect()
    }

    pub fn union(&self, other: &Instance) -> Instance {
        self.atoms.union(&other.atoms).cloned().collect()
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    /// `I|_A`: the atoms whose terms all lie in `allowed`.
    pub fn restrict(&self, allowed: &BTreeSet<Term>) -> Instance {
        self.atoms
            .iter()
            .filter(|a| a.args.iter().all(|t| allowed.contains(t)))
            .cloned()
            .collect()
    }
}

pub(crate) fn merge_arity(
    schema: &mut BTreeMap<Name, usize>,
    rel: &Name,
    arity: usize,
) -> Result<(), ModelError> {
    match schema.get(rel) {
        Some(&k) if k != arity => Err(ModelError::SchemaMismatch {
            relation: rel.to_string(),
            left: k,
            right: arity,
        }),
        Some(_) => Ok(()),
        None => {
            schema.insert(rel.clone(), arity);
            Ok(())
        }
    }
}

impl FromIterator<Atom> for Instance {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Instance {
            atoms: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Instance {
    type Item = Atom;
    type IntoIter = std::collections::btree_set::IntoIter<Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.into_iter()
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Boolean conjunctive query; every variable is existentially quantified.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bcq {
    atoms: BTreeSet<Atom>,
}

impl Bcq {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Result<Self, ModelError> {
        let atoms: BTreeSet<Atom> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        Ok(Bcq { atoms })
    }

    pub fn atom(atom: Atom) -> Self {
        Bcq {
            atoms: BTreeSet::from([atom]),
        }
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `const(q)`.
    pub fn consts(&self) -> BTreeSet<Term> {
        self.terms().into_iter().filter(Term::is_const).collect()
    }

    pub fn vars(&self) -> BTreeSet<Term> {
        self.terms().into_iter().filter(Term::is_var).collect()
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter().cloned())
            .collect()
    }

    /// `[q]`: the atoms with every variable read as a null.
    pub fn frozen(&self) -> Instance {
        self.atoms
            .iter()
            .map(|a| a.map_terms(Term::frozen))
            .collect()
    }

    /// The atoms themselves as an instance (variables kept).
    pub fn as_instance(&self) -> Instance {
        self.atoms.iter().cloned().collect()
    }

    pub fn apply(&self, m: &Mapping) -> Bcq {
        Bcq {
            atoms: self.atoms.iter().map(|a| a.apply(m)).collect(),
        }
    }

    pub fn relations(&self) -> BTreeSet<Name> {
        self.atoms.iter().map(|a| a.rel.clone()).collect()
    }
}

impl fmt::Display for Bcq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bcq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Boolean union of conjunctive queries.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ucq {
    disjuncts: BTreeSet<Bcq>,
}

impl Ucq {
    pub fn new(disjuncts: impl IntoIterator<Item = Bcq>) -> Result<Self, ModelError> {
        let disjuncts: BTreeSet<Bcq> = disjuncts.into_iter().collect();
        if disjuncts.is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        Ok(Ucq { disjuncts })
    }

    pub fn disjuncts(&self) -> &BTreeSet<Bcq> {
        &self.disjuncts
    }

    pub fn is_cq(&self) -> bool {
        self.disjuncts.len() == 1
    }

    pub fn consts(&self) -> BTreeSet<Term> {
        self.disjuncts.iter().flat_map(Bcq::consts).collect()
    }

    pub fn or(&self, other: &Ucq) -> Ucq {
        Ucq {
            disjuncts: self.disjuncts.union(&other.disjuncts).cloned().collect(),
        }
    }

    pub fn relations(&self) -> BTreeSet<Name> {
        self.disjuncts.iter().flat_map(Bcq::relations).collect()
    }
}

impl From<Bcq> for Ucq {
    fn from(q: Bcq) -> Self {
        Ucq {
            disjuncts: BTreeSet::from([q]),
        }
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
