//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use exrule_core::model::{Atom, Instance, Term};
use exrule_core::syntax::{parse_database, parse_program, RuleSet};
use exrule_core::translate::{
    dtgd_to_tgd, FiringScript, ScriptBuilder, TgdSymbols, TranslationOutput,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn s_of_a_source() -> (RuleSet, Instance) {
    (
        parse_program(&read_fixture("s_of_a.rules")).unwrap(),
        parse_database(&read_fixture("s_of_a.db")).unwrap(),
    )
}

pub fn s_of_a_translation() -> (TranslationOutput, TgdSymbols) {
    dtgd_to_tgd(&s_of_a_source().0).unwrap()
}

struct Sb<'a> {
    b: ScriptBuilder<'a>,
    s: &'a TgdSymbols,
}

impl Sb<'_> {
    fn fire(&mut self, rule: &str, bind: &[(&str, &Term)]) -> usize {
        self.b
            .fire(rule, bind)
            .unwrap_or_else(|e| panic!("step {} ({rule}): {e}", self.b.len()))
    }

    fn null(&mut self, rule: &str, var: &str) -> Term {
        let i = self.fire(rule, &[]);
        self.b.null(i, var)
    }

    fn enc(&mut self, x: &Term, y: &Term) -> Term {
        let known = self
            .b
            .facts()
            .iter()
            .find(|a| *a.rel == *self.s.enc && a.args[0] == *x && a.args[1] == *y)
            .map(|a| a.args[2].clone());
        if let Some(z) = known {
            return z;
        }
        let i = self.fire("pair_encoding", &[("X", x), ("Y", y)]);
        self.b.null(i, "Z")
    }

    fn list(&mut self, flag: &Term, elems: &[&Term]) -> Term {
        let mut cur = flag.clone();
        for e in elems {
            cur = self.enc(&cur, e);
        }
        cur
    }
}

/// A derivation of `S(a)` in the TGD translation of the `s_of_a` fixture:
/// encode `P(a)`, simulate the split into `[Q(a), R(a)]`, resolve each branch
/// to `S(a)`, collapse `[S(a), S(a)]` to `[S(a)]`, then match and copy the BCQ.
pub fn build_s_of_a_script(out: &TranslationOutput, s: &TgdSymbols, d: &Instance) -> FiringScript {
    let mut b = Sb {
        b: ScriptBuilder::new(d, &out.rules).unwrap(),
        s,
    };
    let a = Term::constant("a");
    let fp = b.null("relation_flag_P", "X");
    let fq = b.null("relation_flag_Q", "X");
    let fr = b.null("relation_flag_R", "X");
    let fs = b.null("relation_flag_S", "X");
    let fd = b.null("disjunction_flag", "X");
    let fc = b.null("conjunction_flag", "X");
    b.fire("param_typing_P", &[("X1", &a)]);

    // atoms
    let pa = b.list(&fp, &[&a]);
    let qa = b.list(&fq, &[&a]);
    let ra = b.list(&fr, &[&a]);
    let sa = b.list(&fs, &[&a]);
    for (rel, code) in [("P", &pa), ("Q", &qa), ("R", &ra), ("S", &sa)] {
        b.fire(&format!("atom_typing_{rel}"), &[("_g3", code)]);
    }

    // the database fact [P(a)]
    b.fire("fact_typing_base", &[("X", &fd)]);
    let d_p = b.enc(&fd, &pa);
    b.fire("fact_typing_step", &[("Y", &d_p)]);
    b.fire("init_truth_P", &[("_g5", &d_p)]);
    b.fire("merge_base", &[("X", &fd), ("Y", &fd)]);

    // split: [P(a)] gives [Q(a), R(a)]
    b.fire("simulate_body_0", &[("_g4", &d_p)]);
    let d_q = b.enc(&fd, &qa);
    let d_qr = b.enc(&d_q, &ra);
    b.fire("merge_step", &[("X", &fd), ("Y", &d_q), ("Z", &d_q)]);
    b.fire("merge_step", &[("X", &fd), ("Y", &d_qr), ("Z", &d_qr)]);
    b.fire("simulate_head_0", &[("X", &a)]);
    assert!(b
        .b
        .facts()
        .contains(&Atom::new(&s.truth, vec![d_qr.clone()])));

    // R branch: [Q(a), R(a)] gives [Q(a), S(a)]
    b.fire("fact_typing_step", &[("Y", &d_q)]);
    b.fire("fact_typing_step", &[("Y", &d_qr)]);
    b.fire("merge_base", &[("X", &d_q), ("Y", &fd)]);
    b.fire("simulate_body_2", &[("_g4", &d_qr)]);
    let d_s = b.enc(&fd, &sa);
    let d_qs = b.enc(&d_q, &sa);
    b.fire("merge_step", &[("X", &d_q), ("Y", &d_s), ("Z", &d_qs)]);
    b.fire("simulate_head_2", &[("X", &a)]);

    // reorder to [S(a), Q(a)] so the Q atom is last
    let d_sq = b.enc(&d_s, &qa);
    for y in [&d_s, &d_qs, &d_sq] {
        b.fire("fact_typing_step", &[("Y", y)]);
    }
    b.fire("membership_last", &[("A", &qa), ("X", &d_sq)]);
    b.fire("membership_last", &[("A", &sa), ("X", &d_s)]);
    b.fire("membership_last", &[("A", &sa), ("X", &d_qs)]);
    b.fire("membership_last", &[("A", &qa), ("X", &d_q)]);
    b.fire(
        "membership_earlier",
        &[("A", &sa), ("U", &d_s), ("X", &d_sq)],
    );
    b.fire(
        "membership_earlier",
        &[("A", &qa), ("U", &d_q), ("X", &d_qs)],
    );
    b.fire("inclusion_base", &[("Y", &d_sq)]);
    b.fire("inclusion_base", &[("Y", &d_qs)]);
    b.fire("inclusion_step", &[("X", &d_q), ("Y", &d_sq)]);
    b.fire("inclusion_step", &[("X", &d_qs), ("Y", &d_sq)]);
    b.fire("inclusion_step", &[("X", &d_s), ("Y", &d_qs)]);
    b.fire("inclusion_step", &[("X", &d_sq), ("Y", &d_qs)]);
    b.fire("fact_equivalence", &[("X", &d_qs), ("Y", &d_sq)]);
    b.fire("equivalent_truth", &[("X", &d_qs), ("Y", &d_sq)]);

    // Q branch: [S(a), Q(a)] gives [S(a), S(a)]
    b.fire("merge_base", &[("X", &d_s), ("Y", &fd)]);
    b.fire("simulate_body_1", &[("_g4", &d_sq)]);
    let d_ss = b.enc(&d_s, &sa);
    b.fire("merge_step", &[("X", &d_s), ("Y", &d_s), ("Z", &d_ss)]);
    b.fire("simulate_head_1", &[("X", &a)]);

    // [S(a), S(a)] is the fact [S(a)]
    b.fire("fact_typing_step", &[("Y", &d_ss)]);
    b.fire("membership_last", &[("A", &sa), ("X", &d_ss)]);
    b.fire("inclusion_base", &[("Y", &d_s)]);
    b.fire("inclusion_base", &[("Y", &d_ss)]);
    b.fire("inclusion_step", &[("X", &d_s), ("Y", &d_ss)]);
    b.fire("inclusion_step", &[("X", &d_s), ("Y", &d_s)]);
    b.fire("inclusion_step", &[("X", &d_ss), ("Y", &d_s)]);
    b.fire("fact_equivalence", &[("X", &d_ss), ("Y", &d_s)]);
    b.fire("equivalent_truth", &[("X", &d_ss), ("Y", &d_s)]);

    // lift [S(a)] to the DNF [[S(a)]]
    let c_s = b.enc(&fc, &sa);
    let l = b.enc(&fd, &c_s);
    b.fire("lift_base", &[("X", &fd)]);
    b.fire("lift_step", &[("X2", &d_s), ("Y2", &l)]);
    b.fire("lift_truth", &[("X", &d_s), ("Y", &l)]);
    b.fire("conj_base", &[("X", &fc)]);
    b.fire("conj_step", &[("Y", &c_s)]);
    b.fire("dnf_base", &[("X", &fd)]);
    b.fire("dnf_step", &[("Y", &l)]);

    // the BCQ S(a) and its match against [[S(a)]]
    b.fire("term_ground", &[("X", &a)]);
    b.fire("query_atom_S", &[("_g3", &sa)]);
    b.fire("bcq_base", &[("Y", &c_s)]);
    b.fire("subst_base", &[("F", &fc)]);
    b.fire("inst_ground", &[("S", &fc), ("C", &a)]);
    b.fire("inst_atom_S", &[("_g1", &fc), ("_g5", &sa), ("_g7", &sa)]);
    b.fire("membership_last", &[("A", &sa), ("X", &c_s)]);
    b.fire("covers_base", &[("S", &fc), ("F", &fc), ("C", &c_s)]);
    b.fire("covers_step", &[("S", &fc), ("Q2", &c_s), ("C", &c_s)]);
    b.fire("match_base", &[("X", &c_s), ("Y", &l)]);
    b.fire("match_truth", &[("X", &c_s), ("Y", &l)]);

    // copy into the query schema
    b.fire("rename_ground", &[("X", &c_s), ("Y", &a)]);
    b.fire("query_atoms_S", &[("X", &c_s), ("_g1", &a)]);
    b.fire("copy_query_atom_S", &[("X", &c_s)]);
    b.b.finish(Some(Atom::parse_args("S", &["a"])))
}
