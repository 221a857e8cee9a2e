use super::{Emitter, TranslateError, TranslationOutput};
use crate::model::{Atom, Term};
use crate::syntax::{Dependency, HeadAtom, RuleSet, SyntaxError};

fn v(name: &str) -> Term {
    Term::var(name)
}

/// Eliminates equality: `=` becomes a fresh `Eq` relation axiomatised as an
/// equivalence over a `Dom` predicate and made a congruence for every relation.
pub fn ded_to_dtgd(src: &RuleSet) -> Result<TranslationOutput, TranslateError> {
    src.require_canonical()?;
    let schema = src.schema().map_err(SyntaxError::from)?;
    let mut em = Emitter::new(schema.0.keys().map(|k| k.to_string()).collect());
    let dom = em.fresh("Dom", "terms occurring in some atom", "dom");
    let eq = em.fresh("Eq", "equality as a congruence", "eq_axioms");

    for (rel, k) in schema.iter() {
        let xs: Vec<Term> = (1..=k).map(|i| v(&format!("X{i}"))).collect();
        for (i, x) in xs.iter().enumerate() {
            em.emit(
                "dom",
                None,
                Dependency::tgd(
                    vec![Atom::new(rel, xs.clone())],
                    vec![Atom::new(&dom, vec![x.clone()])],
                )
                .labeled(&format!("dom_{rel}_{}", i + 1)),
            );
        }
    }
    let e = |a: &str, b: &str| Atom::new(&eq, vec![v(a), v(b)]);
    em.emit(
        "eq_axioms",
        None,
        Dependency::tgd(vec![Atom::new(&dom, vec![v("X")])], vec![e("X", "X")]).labeled("eq_refl"),
    );
    em.emit(
        "eq_axioms",
        None,
        Dependency::tgd(vec![e("X", "Y")], vec![e("Y", "X")]).labeled("eq_sym"),
    );
    em.emit(
        "eq_axioms",
        None,
        Dependency::tgd(vec![e("X", "Y"), e("Y", "Z")], vec![e("X", "Z")]).labeled("eq_trans"),
    );
    for (rel, k) in schema.iter() {
        if k == 0 {
            continue;
        }
        let xs: Vec<Term> = (1..=k).map(|i| v(&format!("X{i}"))).collect();
        let ys: Vec<Term> = (1..=k).map(|i| v(&format!("Y{i}"))).collect();
        let mut body: Vec<Atom> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| Atom::new(&eq, vec![x.clone(), y.clone()]))
            .collect();
        body.push(Atom::new(rel, xs.clone()));
        em.emit(
            "congruence",
            None,
            Dependency::tgd(body, vec![Atom::new(rel, ys)]).labeled(&format!("cong_{rel}")),
        );
    }
    for (i, r) in src.rules.iter().enumerate() {
        let head = r
            .head
            .iter()
            .map(|d| {
                d.iter()
                    .map(|h| match h {
                        HeadAtom::Eq(l, r) => {
                            HeadAtom::Rel(Atom::new(&eq, vec![l.clone(), r.clone()]))
                        }
                        rel => rel.clone(),
                    })
                    .collect()
            })
            .collect();
        let label = r.label.clone().unwrap_or_else(|| format!("src_{i}"));
        em.emit(
            "source",
            Some(i),
            Dependency {
                label: Some(label),
                body: r.body.clone(),
                head,
            },
        );
    }
    em.finish(src)
}
