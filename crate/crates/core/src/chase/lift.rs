use std::collections::BTreeSet;

use super::{chase_limited, ChaseError, ChaseLimits, NondetInstance};
use crate::model::{is_homomorphism, Instance, Mapping, Null, Term};
use crate::syntax::RuleSet;

/// Image of a chase term: constants through `tau`, skolem nulls by
/// transporting their frontier.
fn transport(t: &Term, tau: &Mapping) -> Term {
    match t {
        Term::Null(Null::Skolem(s)) => Term::skolem(
            s.rule,
            s.frontier.iter().map(|x| transport(x, tau)).collect(),
            &s.var,
        ),
        other => tau.get(other).cloned().unwrap_or_else(|| other.clone()),
    }
}

/// Extends a C-homomorphism `tau: D → D'` to the chase prefixes of depth `depth`.
///
/// `C` is `fixed` together with the constants of Σ. The returned mapping is
/// checked against the computed prefixes: each fact `F` of `chase(D)` must have
/// some fact `G` of `chase(D')` with `G ⊆ τ'(F)`; when `τ'` is injective on `F`
/// this is the literal `τ'(F) ∈ chase(D')`.
pub fn lift_homomorphism(
    d: &Instance,
    d2: &Instance,
    rules: &RuleSet,
    tau: &Mapping,
    fixed: &BTreeSet<Term>,
    depth: usize,
) -> Result<Mapping, ChaseError> {
    let mut c = fixed.clone();
    c.extend(rules.consts());
    for t in d.adom() {
        if !tau.contains_key(&t) {
            return Err(ChaseError::NotHomomorphism(format!("{t} is unmapped")));
        }
    }
    if !is_homomorphism(tau, d, d2, &c) {
        return Err(ChaseError::NotHomomorphism(format!(
            "does not map {d} into {d2} fixing {}",
            c.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        )));
    }
    let limits = ChaseLimits::default();
    let left = chase_limited(d, rules, depth, limits)?;
    let right = chase_limited(d2, rules, depth, limits)?;
    let mut out = tau.clone();
    for f in &left.facts {
        for a in f.atoms() {
            for t in &a.args {
                if !out.contains_key(t) {
                    out.insert(t.clone(), transport(t, tau));
                }
            }
        }
    }
    if let Some(bad) = first_unmatched(&left, &right, &out) {
        return Err(ChaseError::NotHomomorphism(format!("no image for {bad}")));
    }
    Ok(out)
}

/// First fact of `left` whose image has no subset in `right`.
pub fn first_unmatched(
    left: &NondetInstance,
    right: &NondetInstance,
    h: &Mapping,
) -> Option<String> {
    left.facts.iter().find_map(|f| {
        let img = f.apply(h);
        let hit = right.facts.contains(&img)
            || right.facts.iter().any(|g| g.atoms().is_subset(img.atoms()));
        (!hit).then(|| f.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::chase;
    use crate::syntax::{parse_database, parse_program};

    #[test]
    fn example_one_maps_disjunction() {
        let rules = parse_program("P(X) -> Q(X) | R(X).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let d2 = parse_database("P(b).").unwrap();
        let tau = Mapping::from([(Term::constant("a"), Term::constant("b"))]);
        let h = lift_homomorphism(&d, &d2, &rules, &tau, &BTreeSet::new(), 2).unwrap();
        let left = chase(&d, &rules, 2).unwrap();
        let right = chase(&d2, &rules, 2).unwrap();
        for f in &left.facts {
            assert!(right.facts.contains(&f.apply(&h)));
        }
    }

    #[test]
    fn identity_lifts_to_identity() {
        let rules = parse_program("P(X) -> E(X,Y).\nE(X,Y) -> Q(Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let tau = Mapping::from([(Term::constant("a"), Term::constant("a"))]);
        let h = lift_homomorphism(&d, &d, &rules, &tau, &BTreeSet::new(), 3).unwrap();
        assert!(h.iter().all(|(k, v)| k == v));
    }

    #[test]
    fn skolem_provenance_is_transported() {
        let rules = parse_program("P(X) -> E(X,Y).").unwrap();
        let d = parse_database("P(a).").unwrap();
        let d2 = parse_database("P(b).").unwrap();
        let tau = Mapping::from([(Term::constant("a"), Term::constant("b"))]);
        let h = lift_homomorphism(&d, &d2, &rules, &tau, &BTreeSet::new(), 2).unwrap();
        let na = Term::skolem(0, vec![Term::constant("a")], "Y");
        let nb = Term::skolem(0, vec![Term::constant("b")], "Y");
        assert_eq!(h[&na], nb);
    }

    #[test]
    fn rejects_non_homomorphism() {
        let rules = RuleSet::default();
        let d = parse_database("P(a).").unwrap();
        let d2 = parse_database("Q(b).").unwrap();
        let tau = Mapping::from([(Term::constant("a"), Term::constant("b"))]);
        assert!(matches!(
            lift_homomorphism(&d, &d2, &rules, &tau, &BTreeSet::new(), 1),
            Err(ChaseError::NotHomomorphism(_))
        ));
    }
}
