//! Disjunction elimination for CQ answering: the deterministic chase of the
//! output simulates the nondeterministic chase of the input over numeric
//! encodings of facts, then copies every derivable BCQ into the query schema.
//!
//! Encodings: a list `[e1, ..., en]` under flag `f` is the number reached by
//! folding `Enc` from `f`, so `Enc(u, e, v)` means `v = u ++ [e]`. An atom
//! `R(t1..tk)` is the list of its arguments under `Flag_R`, a disjunction (a
//! nondeterministic fact or a DNF) lives under `Flag_d` and a conjunction (a
//! BCQ, a DNF disjunct or a substitution) under `Flag_c`.

use std::collections::BTreeMap;

use super::{Emitter, TranslateError, TranslationOutput};
use crate::model::{Atom, Term};
use crate::syntax::{Dependency, Dialect, RuleSet, SyntaxError};

/// Names chosen for the generated relation symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TgdSymbols {
    pub enc: String,
    pub num: String,
    pub gt: String,
    pub flag_d: String,
    pub flag_c: String,
    pub flags: BTreeMap<String, String>,
    pub nf: String,
    pub gatom: String,
    pub mrg: String,
    pub truth: String,
    pub member: String,
    pub sub: String,
    pub eq: String,
    pub t_sigma: Vec<String>,
    pub conj: String,
    pub dnf: String,
    pub lift: String,
    pub conj_cat: String,
    pub dist: String,
    pub dnf_cat: String,
    pub normalize: String,
    pub var: String,
    pub var_first: String,
    pub next: String,
    pub term: String,
    pub qatom: String,
    pub bcq: String,
    pub subst: String,
    pub var_at: String,
    pub lookup: String,
    pub inst_term: String,
    pub inst_atom: String,
    pub covers: String,
    pub matches: String,
    pub ren: String,
    pub has: BTreeMap<String, String>,
}

/// Per-rule variable supply. Generated variables use the reserved `_` prefix
/// so they never meet the source rule's own variables.
#[derive(Default)]
struct Gen(usize);

impl Gen {
    fn next(&mut self) -> Term {
        self.0 += 1;
        Term::var(&format!("_g{}", self.0))
    }
}

fn a(rel: &str, args: &[&Term]) -> Atom {
    Atom::new(rel, args.iter().map(|t| (*t).clone()).collect())
}

fn var(name: &str) -> Term {
    Term::var(name)
}

struct Builder<'s> {
    src: &'s RuleSet,
    em: Emitter,
    s: TgdSymbols,
}

impl Builder<'_> {
    fn rule(
        &mut self,
        group: &str,
        label: &str,
        source: Option<usize>,
        body: Vec<Atom>,
        head: Vec<Atom>,
    ) {
        self.em
            .emit(group, source, Dependency::tgd(body, head).labeled(label));
    }

    /// `Flag(y0) ∧ Enc(y0, e1, y1) ∧ ... ∧ Enc(y_{n-1}, e_n, y_n)`; returns the
    /// atoms and `y_n`.
    fn list(&self, flag: &str, elems: &[Term], g: &mut Gen) -> (Vec<Atom>, Term) {
        let y0 = g.next();
        let mut atoms = vec![a(flag, &[&y0])];
        let mut cur = y0;
        for e in elems {
            let y = g.next();
            atoms.push(a(&self.s.enc, &[&cur, e, &y]));
            cur = y;
        }
        (atoms, cur)
    }

    /// `⌈α⌉`: the encoding of an atom with the given arguments.
    fn atom_code(&self, atom: &Atom, g: &mut Gen) -> (Vec<Atom>, Term) {
        self.list(&self.s.flags[&*atom.rel], &atom.args, g)
    }

    fn symbols(&mut self) -> Result<(), TranslateError> {
        let schema = self.src.schema().map_err(SyntaxError::from)?;
        let em = &mut self.em;
        let s = &mut self.s;
        s.enc = em.fresh(
            "Enc",
            "Enc(x,y,z): z encodes the pair (x,y)",
            "pair_encoding",
        );
        s.num = em.fresh("Num", "numbers usable in encodings", "pair_encoding");
        s.gt = em.fresh("GT", "ground terms", "param_typing");
        for (r, _) in schema.iter() {
            let name = em.fresh(
                &format!("Flag_{r}"),
                &format!("flag of relation {r}"),
                "relation_flag",
            );
            s.flags.insert(r.to_string(), name);
        }
        s.flag_d = em.fresh("Flag_d", "flag of disjunctions", "disjunction_flag");
        s.flag_c = em.fresh("Flag_c", "flag of conjunctions", "conjunction_flag");
        s.nf = em.fresh("NF", "encodings of nondeterministic facts", "fact_typing");
        s.gatom = em.fresh("GAtom", "encodings of ground atoms", "atom_typing");
        s.mrg = em.fresh("Mrg", "Mrg(x,y,z): z = x ++ y on disjunctions", "merge");
        s.truth = em.fresh(
            "True",
            "encoded formulas derivable by the simulated chase",
            "simulate",
        );
        s.member = em.fresh("In", "In(a,x): a is an element of list x", "membership");
        s.sub = em.fresh("Sub", "Sub(x,y): every element of x is in y", "inclusion");
        s.eq = em.fresh(
            "Eq",
            "Eq(x,y): x and y hold the same atoms",
            "fact_equivalence",
        );
        for i in 0..self.src.rules.len() {
            let name = em.fresh(
                &format!("T{i}"),
                &format!("matches of source rule {i}"),
                "simulate_body",
            );
            s.t_sigma.push(name);
        }
        s.conj = em.fresh("Conj", "ground conjunctions", "dnf_typing");
        s.dnf = em.fresh("DNF", "disjunctions of ground conjunctions", "dnf_typing");
        s.lift = em.fresh(
            "Lift",
            "Lift(x,y): y is fact x as a DNF of singletons",
            "lift",
        );
        s.conj_cat = em.fresh(
            "ConjCat",
            "ConjCat(c,d,e): e = c ++ d on conjunctions",
            "distribute",
        );
        s.dist = em.fresh("Dist", "Dist(c,y,z): z = [c ++ d | d in y]", "distribute");
        s.dnf_cat = em.fresh("DCat", "DCat(x,y,z): z = x ++ y on DNFs", "distribute");
        s.normalize = em.fresh(
            "Normalize",
            "Normalize(x,y,z): z is the DNF of x and y",
            "normalize",
        );
        s.var = em.fresh("Var", "query variables", "var_first");
        s.var_first = em.fresh("VarFirst", "the first query variable", "var_first");
        s.next = em.fresh("Next", "Next(x,y): y is the variable after x", "var_next");
        s.term = em.fresh("Term", "ground terms and query variables", "query_typing");
        s.qatom = em.fresh("QAtom", "encodings of query atoms", "query_typing");
        s.bcq = em.fresh(
            "BCQ",
            "encodings of Boolean conjunctive queries",
            "query_typing",
        );
        s.subst = em.fresh(
            "Subst",
            "substitutions as lists of ground terms",
            "instantiate",
        );
        s.var_at = em.fresh(
            "VarAt",
            "VarAt(s,v): v is the variable at the last position of s",
            "instantiate",
        );
        s.lookup = em.fresh("Lookup", "Lookup(s,v,g): s maps v to g", "instantiate");
        s.inst_term = em.fresh("InstT", "InstT(s,t,g): s maps term t to g", "instantiate");
        s.inst_atom = em.fresh(
            "InstP",
            "InstP(s,a,b): s maps query atom a to ground atom b",
            "instantiate",
        );
        s.covers = em.fresh("CI", "CI(s,q,c): every atom of q under s is in c", "match");
        s.matches = em.fresh(
            "Match",
            "Match(x,y): every disjunct of y instantiates query x",
            "match",
        );
        s.ren = em.fresh(
            "Ren",
            "Ren(y,z,x): y becomes z in the copy of query x",
            "rename",
        );
        for (q, _) in self.src.query.iter() {
            let name = em.fresh(
                &format!("Has{q}"),
                &format!("atoms of {q} in an encoded query"),
                "query_atoms",
            );
            s.has.insert(q.to_string(), name);
        }
        Ok(())
    }

    fn typing(&mut self) {
        let s = self.s.clone();
        for (r, k) in self.src.data.iter() {
            if k == 0 {
                continue;
            }
            let xs: Vec<Term> = (1..=k).map(|i| var(&format!("X{i}"))).collect();
            let mut head = Vec::new();
            for x in &xs {
                head.push(a(&s.num, &[x]));
                head.push(a(&s.gt, &[x]));
            }
            self.rule(
                "param_typing",
                &format!("param_typing_{r}"),
                None,
                vec![Atom::new(r, xs)],
                head,
            );
        }
        for (r, flag) in &s.flags {
            let x = var("X");
            self.rule(
                "relation_flag",
                &format!("relation_flag_{r}"),
                None,
                vec![],
                vec![a(flag, &[&x]), a(&s.num, &[&x])],
            );
        }
        for c in self.src.consts() {
            self.rule(
                "constant_typing",
                &format!("constant_typing_{c}"),
                None,
                vec![],
                vec![a(&s.num, &[&c]), a(&s.gt, &[&c])],
            );
        }
        let (x, y, z) = (var("X"), var("Y"), var("Z"));
        self.rule(
            "pair_encoding",
            "pair_encoding",
            None,
            vec![a(&s.num, &[&x]), a(&s.num, &[&y])],
            vec![a(&s.enc, &[&x, &y, &z]), a(&s.num, &[&z])],
        );
        self.rule(
            "disjunction_flag",
            "disjunction_flag",
            None,
            vec![],
            vec![a(&s.flag_d, &[&x]), a(&s.num, &[&x])],
        );
        self.rule(
            "conjunction_flag",
            "conjunction_flag",
            None,
            vec![],
            vec![a(&s.flag_c, &[&x]), a(&s.num, &[&x])],
        );
    }

    fn lists(&mut self) {
        let s = self.s.clone();
        let [x, y, u, v, w, z, f, aa, c] = ["X", "Y", "U", "V", "W", "Z", "F", "A", "C"].map(var);
        // merging
        self.rule(
            "merge_base",
            "merge_base",
            None,
            vec![a(&s.nf, &[&x]), a(&s.flag_d, &[&y])],
            vec![a(&s.mrg, &[&x, &y, &x])],
        );
        self.rule(
            "merge_step",
            "merge_step",
            None,
            vec![
                a(&s.mrg, &[&x, &u, &v]),
                a(&s.enc, &[&u, &w, &y]),
                a(&s.enc, &[&v, &w, &z]),
            ],
            vec![a(&s.mrg, &[&x, &y, &z])],
        );
        // fact typing
        self.rule(
            "fact_typing",
            "fact_typing_base",
            None,
            vec![a(&s.flag_d, &[&x])],
            vec![a(&s.nf, &[&x])],
        );
        self.rule(
            "fact_typing",
            "fact_typing_step",
            None,
            vec![
                a(&s.nf, &[&x]),
                a(&s.enc, &[&x, &aa, &y]),
                a(&s.gatom, &[&aa]),
            ],
            vec![a(&s.nf, &[&y])],
        );
        let schema: Vec<(String, usize)> = self
            .src
            .schema()
            .map(|sc| sc.iter().map(|(r, k)| (r.to_string(), k)).collect())
            .unwrap_or_default();
        for (r, k) in &schema {
            let mut g = Gen::default();
            let xs: Vec<Term> = (0..*k).map(|_| g.next()).collect();
            let (mut body, code) = self.list(&s.flags[r], &xs, &mut g);
            body.extend(xs.iter().map(|x| a(&s.gt, &[x])));
            self.rule(
                "atom_typing",
                &format!("atom_typing_{r}"),
                None,
                body,
                vec![a(&s.gatom, &[&code])],
            );
        }
        // membership, inclusion and extensional equivalence
        self.rule(
            "membership",
            "membership_last",
            None,
            vec![a(&s.enc, &[&u, &aa, &x])],
            vec![a(&s.member, &[&aa, &x])],
        );
        self.rule(
            "membership",
            "membership_earlier",
            None,
            vec![a(&s.member, &[&aa, &u]), a(&s.enc, &[&u, &c, &x])],
            vec![a(&s.member, &[&aa, &x])],
        );
        self.rule(
            "inclusion",
            "inclusion_base",
            None,
            vec![a(&s.flag_d, &[&f]), a(&s.nf, &[&y])],
            vec![a(&s.sub, &[&f, &y])],
        );
        self.rule(
            "inclusion",
            "inclusion_step",
            None,
            vec![
                a(&s.sub, &[&u, &y]),
                a(&s.enc, &[&u, &aa, &x]),
                a(&s.member, &[&aa, &y]),
            ],
            vec![a(&s.sub, &[&x, &y])],
        );
        self.rule(
            "fact_equivalence",
            "fact_equivalence",
            None,
            vec![a(&s.sub, &[&x, &y]), a(&s.sub, &[&y, &x])],
            vec![a(&s.eq, &[&x, &y])],
        );
    }

    fn simulation(&mut self) {
        let s = self.s.clone();
        for (i, sigma) in self.src.rules.iter().enumerate() {
            let mut g = Gen::default();
            let mut body = Vec::new();
            let mut rests = Vec::new();
            for alpha in &sigma.body {
                let (code_atoms, code) = self.atom_code(alpha, &mut g);
                let (u, v) = (g.next(), g.next());
                body.push(a(&s.nf, &[&v]));
                body.extend(code_atoms);
                body.push(a(&s.enc, &[&u, &code, &v]));
                body.push(a(&s.truth, &[&v]));
                rests.push(u);
            }
            let mut acc = g.next();
            body.push(a(&s.flag_d, &[&acc]));
            for u in &rests {
                let next = g.next();
                body.push(a(&s.mrg, &[u, &acc, &next]));
                acc = next;
            }
            let xs = sigma.universal();
            let zs = sigma.existentials();
            let mut t_args = xs.clone();
            t_args.push(acc.clone());
            t_args.extend(zs.iter().cloned());
            let mut head = vec![Atom::new(&s.t_sigma[i], t_args.clone())];
            for z in &zs {
                head.push(a(&s.num, &[z]));
                head.push(a(&s.gt, &[z]));
            }
            self.rule(
                "simulate_body",
                &format!("simulate_body_{i}"),
                Some(i),
                body,
                head,
            );

            // head side: T_σ(x, y, z) ∧ Mrg(y, ⌈head⌉, w) → True(w)
            let mut g = Gen::default();
            let y = g.next();
            let mut t_args = xs.clone();
            t_args.push(y.clone());
            t_args.extend(zs.iter().cloned());
            let mut body = vec![Atom::new(&s.t_sigma[i], t_args)];
            let d0 = g.next();
            body.push(a(&s.flag_d, &[&d0]));
            let mut acc = d0;
            for h in sigma.head_atoms() {
                let atom = h.as_rel().expect("equality-free input");
                let (code_atoms, code) = self.atom_code(atom, &mut g);
                body.extend(code_atoms);
                let next = g.next();
                body.push(a(&s.enc, &[&acc, &code, &next]));
                acc = next;
            }
            let w = g.next();
            body.push(a(&s.mrg, &[&y, &acc, &w]));
            self.rule(
                "simulate_head",
                &format!("simulate_head_{i}"),
                Some(i),
                body,
                vec![a(&s.truth, &[&w])],
            );
        }
        for (r, k) in self.src.data.iter() {
            let mut g = Gen::default();
            let xs: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let atom = Atom::new(r, xs);
            let (code_atoms, code) = self.atom_code(&atom, &mut g);
            let mut body = vec![atom];
            body.extend(code_atoms);
            let (d0, w) = (g.next(), g.next());
            body.push(a(&s.flag_d, &[&d0]));
            body.push(a(&s.enc, &[&d0, &code, &w]));
            self.rule(
                "init_truth",
                &format!("init_truth_{r}"),
                None,
                body,
                vec![a(&s.truth, &[&w])],
            );
        }
        let (x, y) = (var("X"), var("Y"));
        self.rule(
            "equivalent_truth",
            "equivalent_truth",
            None,
            vec![
                a(&s.nf, &[&x]),
                a(&s.nf, &[&y]),
                a(&s.truth, &[&x]),
                a(&s.eq, &[&x, &y]),
            ],
            vec![a(&s.truth, &[&y])],
        );
    }

    fn dnf(&mut self) {
        let s = self.s.clone();
        let [x, y, z, w, aa, c, c0, d, e, f, u, v, x2, y2, d2, e2, z2] = [
            "X", "Y", "Z", "W", "A", "C", "C0", "D", "E", "F", "U", "V", "X2", "Y2", "D2", "E2",
            "Z2",
        ]
        .map(var);
        self.rule(
            "dnf_typing",
            "conj_base",
            None,
            vec![a(&s.flag_c, &[&x])],
            vec![a(&s.conj, &[&x])],
        );
        self.rule(
            "dnf_typing",
            "conj_step",
            None,
            vec![
                a(&s.conj, &[&x]),
                a(&s.enc, &[&x, &aa, &y]),
                a(&s.gatom, &[&aa]),
            ],
            vec![a(&s.conj, &[&y])],
        );
        self.rule(
            "dnf_typing",
            "dnf_base",
            None,
            vec![a(&s.flag_d, &[&x])],
            vec![a(&s.dnf, &[&x])],
        );
        self.rule(
            "dnf_typing",
            "dnf_step",
            None,
            vec![
                a(&s.dnf, &[&x]),
                a(&s.enc, &[&x, &c, &y]),
                a(&s.conj, &[&c]),
            ],
            vec![a(&s.dnf, &[&y])],
        );
        self.rule(
            "lift",
            "lift_base",
            None,
            vec![a(&s.flag_d, &[&x])],
            vec![a(&s.lift, &[&x, &x])],
        );
        self.rule(
            "lift",
            "lift_step",
            None,
            vec![
                a(&s.lift, &[&x, &y]),
                a(&s.enc, &[&x, &aa, &x2]),
                a(&s.gatom, &[&aa]),
                a(&s.flag_c, &[&c0]),
                a(&s.enc, &[&c0, &aa, &c]),
                a(&s.enc, &[&y, &c, &y2]),
            ],
            vec![a(&s.lift, &[&x2, &y2])],
        );
        self.rule(
            "lift",
            "lift_truth",
            None,
            vec![a(&s.truth, &[&x]), a(&s.lift, &[&x, &y])],
            vec![a(&s.truth, &[&y])],
        );
        self.rule(
            "distribute",
            "conj_cat_base",
            None,
            vec![a(&s.conj, &[&c]), a(&s.flag_c, &[&f])],
            vec![a(&s.conj_cat, &[&c, &f, &c])],
        );
        self.rule(
            "distribute",
            "conj_cat_step",
            None,
            vec![
                a(&s.conj_cat, &[&c, &d, &e]),
                a(&s.enc, &[&d, &aa, &d2]),
                a(&s.gatom, &[&aa]),
                a(&s.enc, &[&e, &aa, &e2]),
            ],
            vec![a(&s.conj_cat, &[&c, &d2, &e2])],
        );
        self.rule(
            "distribute",
            "dist_base",
            None,
            vec![a(&s.conj, &[&c]), a(&s.flag_d, &[&f])],
            vec![a(&s.dist, &[&c, &f, &f])],
        );
        self.rule(
            "distribute",
            "dist_step",
            None,
            vec![
                a(&s.dist, &[&c, &y, &z]),
                a(&s.enc, &[&y, &d, &y2]),
                a(&s.conj_cat, &[&c, &d, &e]),
                a(&s.enc, &[&z, &e, &z2]),
            ],
            vec![a(&s.dist, &[&c, &y2, &z2])],
        );
        self.rule(
            "distribute",
            "dnf_cat_base",
            None,
            vec![a(&s.dnf, &[&x]), a(&s.flag_d, &[&f])],
            vec![a(&s.dnf_cat, &[&x, &f, &x])],
        );
        self.rule(
            "distribute",
            "dnf_cat_step",
            None,
            vec![
                a(&s.dnf_cat, &[&x, &u, &v]),
                a(&s.enc, &[&u, &w, &y]),
                a(&s.enc, &[&v, &w, &z]),
            ],
            vec![a(&s.dnf_cat, &[&x, &y, &z])],
        );
        self.rule(
            "normalize",
            "normalize_base",
            None,
            vec![a(&s.flag_d, &[&f]), a(&s.dnf, &[&y])],
            vec![a(&s.normalize, &[&f, &y, &f])],
        );
        self.rule(
            "normalize",
            "normalize_step",
            None,
            vec![
                a(&s.normalize, &[&x, &y, &z]),
                a(&s.enc, &[&x, &c, &x2]),
                a(&s.dist, &[&c, &y, &w]),
                a(&s.dnf_cat, &[&z, &w, &z2]),
            ],
            vec![a(&s.normalize, &[&x2, &y, &z2])],
        );
        self.rule(
            "normalize_truth",
            "normalize_truth",
            None,
            vec![
                a(&s.truth, &[&x]),
                a(&s.truth, &[&y]),
                a(&s.normalize, &[&x, &y, &z]),
            ],
            vec![a(&s.truth, &[&z])],
        );
    }

    fn queries(&mut self) {
        let s = self.s.clone();
        let [x, y, z, aa, b, c, f, g_, h, q, q2, s_, s2, u, v, v2, w] = [
            "X", "Y", "Z", "A", "B", "C", "F", "G", "H", "Q", "Q2", "S", "S2", "U", "V", "V2", "W",
        ]
        .map(var);
        self.rule(
            "var_first",
            "var_first",
            None,
            vec![],
            vec![a(&s.var, &[&x]), a(&s.num, &[&x]), a(&s.var_first, &[&x])],
        );
        self.rule(
            "var_next",
            "var_next",
            None,
            vec![a(&s.var, &[&x])],
            vec![a(&s.next, &[&x, &y]), a(&s.var, &[&y]), a(&s.num, &[&y])],
        );
        self.rule(
            "query_typing",
            "term_ground",
            None,
            vec![a(&s.gt, &[&x])],
            vec![a(&s.term, &[&x])],
        );
        self.rule(
            "query_typing",
            "term_var",
            None,
            vec![a(&s.var, &[&x])],
            vec![a(&s.term, &[&x])],
        );
        for (r, k) in self.src.query.iter() {
            let mut g = Gen::default();
            let xs: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let (mut body, code) = self.list(&s.flags[&**r], &xs, &mut g);
            body.extend(xs.iter().map(|x| a(&s.term, &[x])));
            self.rule(
                "query_typing",
                &format!("query_atom_{r}"),
                None,
                body,
                vec![a(&s.qatom, &[&code])],
            );
        }
        self.rule(
            "query_typing",
            "bcq_base",
            None,
            vec![
                a(&s.flag_c, &[&x]),
                a(&s.enc, &[&x, &aa, &y]),
                a(&s.qatom, &[&aa]),
            ],
            vec![a(&s.bcq, &[&y])],
        );
        self.rule(
            "query_typing",
            "bcq_step",
            None,
            vec![
                a(&s.bcq, &[&x]),
                a(&s.enc, &[&x, &aa, &y]),
                a(&s.qatom, &[&aa]),
            ],
            vec![a(&s.bcq, &[&y])],
        );
        // substitutions and instantiation
        self.rule(
            "instantiate",
            "subst_base",
            None,
            vec![a(&s.flag_c, &[&f])],
            vec![a(&s.subst, &[&f])],
        );
        self.rule(
            "instantiate",
            "subst_step",
            None,
            vec![
                a(&s.subst, &[&s_]),
                a(&s.enc, &[&s_, &g_, &s2]),
                a(&s.gt, &[&g_]),
            ],
            vec![a(&s.subst, &[&s2])],
        );
        self.rule(
            "instantiate",
            "var_at_base",
            None,
            vec![
                a(&s.flag_c, &[&f]),
                a(&s.enc, &[&f, &g_, &s_]),
                a(&s.gt, &[&g_]),
                a(&s.var_first, &[&v]),
            ],
            vec![a(&s.var_at, &[&s_, &v])],
        );
        self.rule(
            "instantiate",
            "var_at_step",
            None,
            vec![
                a(&s.var_at, &[&s_, &v]),
                a(&s.enc, &[&s_, &g_, &s2]),
                a(&s.gt, &[&g_]),
                a(&s.next, &[&v, &v2]),
            ],
            vec![a(&s.var_at, &[&s2, &v2])],
        );
        self.rule(
            "instantiate",
            "lookup_last",
            None,
            vec![a(&s.var_at, &[&s_, &v]), a(&s.enc, &[&u, &g_, &s_])],
            vec![a(&s.lookup, &[&s_, &v, &g_])],
        );
        self.rule(
            "instantiate",
            "lookup_earlier",
            None,
            vec![
                a(&s.lookup, &[&u, &w, &h]),
                a(&s.enc, &[&u, &g_, &s_]),
                a(&s.gt, &[&g_]),
            ],
            vec![a(&s.lookup, &[&s_, &w, &h])],
        );
        self.rule(
            "instantiate",
            "inst_var",
            None,
            vec![a(&s.lookup, &[&s_, &v, &g_])],
            vec![a(&s.inst_term, &[&s_, &v, &g_])],
        );
        self.rule(
            "instantiate",
            "inst_ground",
            None,
            vec![a(&s.subst, &[&s_]), a(&s.gt, &[&c])],
            vec![a(&s.inst_term, &[&s_, &c, &c])],
        );
        for (r, k) in self.src.query.iter() {
            let mut g = Gen::default();
            let sv = g.next();
            let pattern: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let ground: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let (mut body, pcode) = self.list(&s.flags[&**r], &pattern, &mut g);
            let (gbody, gcode) = self.list(&s.flags[&**r], &ground, &mut g);
            // both chains start from the same flag
            let flag_var = body[0].args[0].clone();
            let gflag = gbody[0].args[0].clone();
            for at in gbody.into_iter().skip(1) {
                body.push(at.map_terms(|t| {
                    if *t == gflag {
                        flag_var.clone()
                    } else {
                        t.clone()
                    }
                }));
            }
            let gcode = if gcode == gflag {
                flag_var.clone()
            } else {
                gcode
            };
            for (p, gt) in pattern.iter().zip(&ground) {
                body.push(a(&s.inst_term, &[&sv, p, gt]));
            }
            if k == 0 {
                body.push(a(&s.subst, &[&sv]));
            }
            self.rule(
                "instantiate",
                &format!("inst_atom_{r}"),
                None,
                body,
                vec![a(&s.inst_atom, &[&sv, &pcode, &gcode])],
            );
        }
        // matching
        self.rule(
            "match",
            "covers_base",
            None,
            vec![a(&s.subst, &[&s_]), a(&s.flag_c, &[&f]), a(&s.conj, &[&c])],
            vec![a(&s.covers, &[&s_, &f, &c])],
        );
        self.rule(
            "match",
            "covers_step",
            None,
            vec![
                a(&s.covers, &[&s_, &q, &c]),
                a(&s.enc, &[&q, &aa, &q2]),
                a(&s.inst_atom, &[&s_, &aa, &b]),
                a(&s.member, &[&b, &c]),
            ],
            vec![a(&s.covers, &[&s_, &q2, &c])],
        );
        self.rule(
            "match",
            "match_base",
            None,
            vec![
                a(&s.bcq, &[&x]),
                a(&s.flag_d, &[&f]),
                a(&s.enc, &[&f, &c, &y]),
                a(&s.covers, &[&s_, &x, &c]),
            ],
            vec![a(&s.matches, &[&x, &y])],
        );
        self.rule(
            "match",
            "match_step",
            None,
            vec![
                a(&s.matches, &[&x, &y]),
                a(&s.enc, &[&y, &c, &z]),
                a(&s.covers, &[&s_, &x, &c]),
            ],
            vec![a(&s.matches, &[&x, &z])],
        );
        self.rule(
            "match_truth",
            "match_truth",
            None,
            vec![
                a(&s.bcq, &[&x]),
                a(&s.dnf, &[&y]),
                a(&s.truth, &[&y]),
                a(&s.matches, &[&x, &y]),
            ],
            vec![a(&s.truth, &[&x])],
        );
        // copying into the query schema
        self.rule(
            "rename_var",
            "rename_var",
            None,
            vec![a(&s.bcq, &[&x]), a(&s.var, &[&y])],
            vec![a(&s.ren, &[&y, &z, &x])],
        );
        self.rule(
            "rename_ground",
            "rename_ground",
            None,
            vec![a(&s.bcq, &[&x]), a(&s.gt, &[&y])],
            vec![a(&s.ren, &[&y, &y, &x])],
        );
        for (r, k) in self.src.query.iter() {
            let mut g = Gen::default();
            let ys: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let (code_atoms, code) = self.list(&s.flags[&**r], &ys, &mut g);
            let mut body = vec![a(&s.bcq, &[&x]), a(&s.member, &[&code, &x])];
            body.extend(code_atoms);
            let mut hargs = ys.clone();
            hargs.push(x.clone());
            self.rule(
                "query_atoms",
                &format!("query_atoms_{r}"),
                None,
                body,
                vec![Atom::new(&s.has[&**r], hargs)],
            );

            let mut g = Gen::default();
            let ys: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let zs: Vec<Term> = (0..k).map(|_| g.next()).collect();
            let mut hargs = ys.clone();
            hargs.push(x.clone());
            let mut body = vec![
                a(&s.bcq, &[&x]),
                a(&s.truth, &[&x]),
                Atom::new(&s.has[&**r], hargs),
            ];
            for (yy, zz) in ys.iter().zip(&zs) {
                body.push(a(&s.ren, &[yy, zz, &x]));
            }
            self.rule(
                "copy_query_atom",
                &format!("copy_query_atom_{r}"),
                None,
                body,
                vec![Atom::new(r, zs)],
            );
        }
    }
}

/// Translates canonical DTGDs into TGDs that give the same certain answers to
/// conjunctive queries over the query schema.
pub fn dtgd_to_tgd(src: &RuleSet) -> Result<(TranslationOutput, TgdSymbols), TranslateError> {
    src.validate()?;
    src.require_dialect(Dialect::Dtgd)?;
    src.require_canonical()?;
    let schema = src.schema().map_err(SyntaxError::from)?;
    let mut b = Builder {
        src,
        em: Emitter::new(schema.0.keys().map(|k| k.to_string()).collect()),
        s: TgdSymbols::default(),
    };
    b.symbols()?;
    b.typing();
    b.lists();
    b.simulation();
    b.dnf();
    b.queries();
    let s = b.s.clone();
    Ok((b.em.finish(src)?, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::skolem_chase;
    use crate::model::Instance;
    use crate::syntax::{parse_database, parse_program};

    const THREE: &str =
        "@data: P/1\n@query: Q/1, R/1, S/1\nP(X) -> Q(X) | R(X).\nQ(X) -> S(X).\nR(X) -> S(X).";

    fn translate(src: &str) -> (TranslationOutput, TgdSymbols) {
        dtgd_to_tgd(&parse_program(src).unwrap()).unwrap()
    }

    fn count(inst: &Instance, rel: &str) -> usize {
        inst.iter().filter(|a| &*a.rel == rel).count()
    }

    #[test]
    fn audit_counts() {
        let (out, _) = translate(THREE);
        let c = out.group_counts();
        assert_eq!(c["param_typing"], 1);
        assert_eq!(c["relation_flag"], 4);
        assert!(!c.contains_key("constant_typing"));
        assert_eq!(c["simulate_body"], 3);
        assert_eq!(c["simulate_head"], 3);
        assert_eq!(c["init_truth"], 1);
        assert_eq!(c["atom_typing"], 4);
        assert_eq!(c["copy_query_atom"], 3);
        assert_eq!(c["query_atoms"], 3);
        for g in [
            "pair_encoding",
            "disjunction_flag",
            "conjunction_flag",
            "merge_base",
            "merge_step",
        ] {
            assert_eq!(c[g], 1, "{g}");
        }
        assert_eq!(c["lift"], 3);
        assert_eq!(out.rules.dialect(), Dialect::Tgd);
        assert!(out.rules.rules.iter().all(|r| r.label.is_some()));
        let labels: std::collections::BTreeSet<_> =
            out.rules.rules.iter().map(|r| r.label.clone()).collect();
        assert_eq!(labels.len(), out.rules.len());
    }

    #[test]
    fn output_round_trips_through_the_printer() {
        let (out, _) = translate(THREE);
        let text = out.rules.to_string();
        let back = parse_program(&text).unwrap();
        assert_eq!(back, out.rules);
    }

    #[test]
    fn rejects_non_canonical_and_equality() {
        let p = parse_program("@data: P/1\nP(X) -> Q(X), R(X) | S(X).").unwrap();
        assert!(dtgd_to_tgd(&p).is_err());
        let p = parse_program("@data: R/2\nR(X,Y) -> X = Y.").unwrap();
        assert!(dtgd_to_tgd(&p).is_err());
    }

    #[test]
    fn fresh_names_skip_source_symbols() {
        let (out, s) = translate("@data: Enc/3\n@query: True/1\nEnc(X,Y,Z) -> True(X).");
        assert_eq!(s.enc, "Enc2");
        assert_eq!(s.truth, "True2");
        assert!(out.manifest.contains_key("Enc2"));
    }

    #[test]
    fn pair_encoding_is_functional() {
        let (out, s) = translate(THREE);
        let rules = out.subset(&[
            "relation_flag",
            "disjunction_flag",
            "param_typing",
            "pair_encoding",
        ]);
        let d = parse_database("P(a).").unwrap();
        let inst = skolem_chase(&d, &rules, 2).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for at in inst.iter().filter(|a| *a.rel == *s.enc) {
            assert!(
                seen.insert((at.args[0].clone(), at.args[1].clone())),
                "{at}"
            );
        }
        // round 1 yields Num for a and six flags, so 36 pairs in round 2
        assert_eq!(count(&inst, &s.enc), 36);
    }

    fn list(s: &TgdSymbols, flag: &str, elems: &[&str], d: &mut Vec<Atom>) -> Term {
        let mut cur = Term::constant(flag);
        d.push(Atom::new(&s.flag_d, vec![]).map_terms(|t| t.clone()));
        d.pop();
        for (i, e) in elems.iter().enumerate() {
            let next = Term::constant(&format!("{flag}_{}", elems[..=i].join("_")));
            d.push(Atom::new(
                &s.enc,
                vec![cur, Term::constant(e), next.clone()],
            ));
            cur = next;
        }
        cur
    }

    #[test]
    fn merge_concatenates() {
        let (out, s) = translate(THREE);
        let rules = out.subset(&["merge_base", "merge_step"]);
        let mut atoms = vec![
            Atom::new(&s.flag_d, vec![Term::constant("fd")]),
            Atom::new(&s.nf, vec![Term::constant("fd_x")]),
        ];
        let x = list(&s, "fd", &["x"], &mut atoms);
        let y = list(&s, "fd", &["y", "z"], &mut atoms);
        let xyz = list(&s, "fd", &["x", "y", "z"], &mut atoms);
        let d: Instance = atoms.into_iter().collect();
        let inst = skolem_chase(&d, &rules, 5).unwrap();
        assert!(inst.contains(&Atom::new(&s.mrg, vec![x, y, xyz])));
    }

    #[test]
    fn database_facts_become_true_singletons() {
        let (out, s) = translate(THREE);
        let rules = out.subset(&["init_truth"]);
        let c = |n: &str| Term::constant(n);
        let d: Instance = [
            Atom::parse_args("P", &["a"]),
            Atom::parse_args("P", &["b"]),
            Atom::new(&s.flags["P"], vec![c("fp")]),
            Atom::new(&s.flag_d, vec![c("fd")]),
            Atom::new(&s.enc, vec![c("fp"), c("a"), c("pa")]),
            Atom::new(&s.enc, vec![c("fd"), c("pa"), c("wa")]),
            Atom::new(&s.enc, vec![c("fp"), c("b"), c("pb")]),
            // decoy: an encoding under the wrong flag
            Atom::new(&s.enc, vec![c("fp"), c("pb"), c("wb")]),
        ]
        .into_iter()
        .collect();
        let inst = skolem_chase(&d, &rules, 2).unwrap();
        let truths: Vec<_> = inst.iter().filter(|a| *a.rel == *s.truth).collect();
        assert_eq!(truths, vec![&Atom::new(&s.truth, vec![c("wa")])]);
    }

    #[test]
    fn true_bcq_is_copied() {
        let (out, s) = translate(THREE);
        let rules = out.subset(&[
            "membership",
            "rename_var",
            "rename_ground",
            "query_atoms",
            "copy_query_atom",
        ]);
        let c = |n: &str| Term::constant(n);
        let d: Instance = [
            Atom::new(&s.flags["S"], vec![c("fs")]),
            Atom::new(&s.enc, vec![c("fs"), c("a"), c("sa")]),
            Atom::new(&s.enc, vec![c("fc"), c("sa"), c("q")]),
            Atom::new(&s.enc, vec![c("fs"), c("v"), c("sv")]),
            Atom::new(&s.enc, vec![c("fc"), c("sv"), c("q2")]),
            Atom::new(&s.bcq, vec![c("q")]),
            Atom::new(&s.bcq, vec![c("q2")]),
            Atom::new(&s.truth, vec![c("q")]),
            Atom::new(&s.truth, vec![c("q2")]),
            Atom::new(&s.gt, vec![c("a")]),
            Atom::new(&s.var, vec![c("v")]),
        ]
        .into_iter()
        .collect();
        let inst = skolem_chase(&d, &rules, 4).unwrap();
        let copies: Vec<_> = inst.iter().filter(|a| &*a.rel == "S").collect();
        assert_eq!(copies.len(), 2);
        assert!(inst.contains(&Atom::parse_args("S", &["a"])));
        assert!(copies.iter().any(|a| a.args[0].is_null()));
    }
}
