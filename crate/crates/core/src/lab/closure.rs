//! Query constructivity and closure under database homomorphisms and
//! constant substitutions.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::enumerate::{consts_within, functions};
use super::{
    canonical_bcq, constants, data_schema, enumerate_lab_databases, enumerate_lab_queries,
    query_schema, Call, LabBounds, LabError, Oracle, Verdict,
};
use crate::chase::AnswerVerdict;
use crate::model::{Atom, Bcq, Instance, Mapping, Term, Ucq};
use crate::syntax::{Dialect, RuleSet};
use crate::translate::Decider;

fn require(rules: &RuleSet, allowed: Dialect) -> Result<(), LabError> {
    let found = rules.dialect();
    if found > allowed {
        return Err(LabError::Dialect { found, allowed });
    }
    Ok(())
}

/// Searches bounded `(D, p, q)` with `p ∨ q` entailed but neither `p` nor `q`.
pub fn check_query_constructivity(
    rules: &RuleSet,
    bounds: &LabBounds,
) -> Result<Verdict, LabError> {
    require(rules, Dialect::Dtgd)?;
    let oracle = Oracle::new(rules, bounds.depth)?;
    let consts = constants(bounds.consts);
    let dbs = enumerate_lab_databases(&data_schema(rules), &consts, bounds.facts);
    let qs = enumerate_lab_queries(&query_schema(rules), &consts, bounds.qatoms);
    let results: Vec<(usize, usize, Option<Vec<Call>>)> = dbs
        .par_iter()
        .map(|d| {
            let adom = d.adom();
            let session = oracle.session(d);
            let local: Vec<&Bcq> = qs.iter().filter(|q| consts_within(q, &adom)).collect();
            let single: Vec<AnswerVerdict> = local
                .iter()
                .map(|q| session.decide(&Ucq::from((*q).clone())))
                .collect();
            let (mut checked, mut blocked) = (0, 0);
            for i in 0..local.len() {
                for j in i + 1..local.len() {
                    checked += 1;
                    if single[i].is_entailed() || single[j].is_entailed() {
                        continue;
                    }
                    let pq = Ucq::new([local[i].clone(), local[j].clone()]).expect("two disjuncts");
                    match session.decide(&pq).decided() {
                        Some(false) => {}
                        Some(true)
                            if single[i].decided() == Some(false)
                                && single[j].decided() == Some(false) =>
                        {
                            let calls = vec![
                                Call::new(d, &pq, true),
                                Call::new(d, &Ucq::from(local[i].clone()), false),
                                Call::new(d, &Ucq::from(local[j].clone()), false),
                            ];
                            return (checked, blocked, Some(calls));
                        }
                        _ => blocked += 1,
                    }
                }
            }
            (checked, blocked, None)
        })
        .collect();
    Ok(fold("query-constructivity", bounds, results))
}

fn fold(
    property: &str,
    bounds: &LabBounds,
    results: Vec<(usize, usize, Option<Vec<Call>>)>,
) -> Verdict {
    let checked = results.iter().map(|r| r.0).sum();
    let blocked = results.iter().map(|r| r.1).sum();
    let witness = results.into_iter().find_map(|r| r.2);
    Verdict::from_cases(property, *bounds, checked, blocked, witness)
}

/// Verdict of every query on every database.
fn answer_table(oracle: &Oracle, dbs: &[Instance], qs: &[Bcq]) -> Vec<Vec<AnswerVerdict>> {
    dbs.par_iter()
        .map(|d| {
            let session = oracle.session(d);
            qs.iter()
                .map(|q| session.decide(&Ucq::from(q.clone())))
                .collect()
        })
        .collect()
}

fn query_index(qs: &[Bcq]) -> BTreeMap<Vec<Atom>, usize> {
    qs.iter()
        .enumerate()
        .map(|(i, q)| (q.atoms().iter().cloned().collect(), i))
        .collect()
}

/// Images `(τ, index of D')` of a database among the enumerated ones.
type Targets = dyn Fn(&Instance, &[Instance]) -> Vec<(Mapping, usize)> + Sync;

/// For every `D` and every admissible `(τ, D')`, `(D, q)` entailed must give
/// `(D', τ(q))` entailed.
fn closure_check(
    property: &str,
    rules: &RuleSet,
    oracle: &Oracle,
    bounds: &LabBounds,
    targets: &Targets,
) -> Verdict {
    let consts = constants(bounds.consts);
    let dbs = enumerate_lab_databases(&data_schema(rules), &consts, bounds.facts);
    let qs = enumerate_lab_queries(&query_schema(rules), &consts, bounds.qatoms);
    let table = answer_table(oracle, &dbs, &qs);
    let index = query_index(&qs);
    let results: Vec<(usize, usize, Option<Vec<Call>>)> = (0..dbs.len())
        .into_par_iter()
        .map(|i| {
            let d = &dbs[i];
            let adom = d.adom();
            let (mut checked, mut blocked) = (0, 0);
            for (tau, j) in targets(d, &dbs) {
                for (k, q) in qs.iter().enumerate() {
                    if !consts_within(q, &adom) {
                        continue;
                    }
                    checked += 1;
                    let image = canonical_bcq(&q.apply(&tau));
                    let Some(&k2) = index.get(&image.atoms().iter().cloned().collect::<Vec<_>>())
                    else {
                        blocked += 1;
                        continue;
                    };
                    match (table[i][k].decided(), table[j][k2].decided()) {
                        (Some(false), _) | (_, Some(true)) => {}
                        (Some(true), Some(false)) => {
                            let calls = vec![
                                Call::new(d, &Ucq::from(q.clone()), true),
                                Call::new(&dbs[j], &Ucq::from(image), false),
                            ];
                            return (checked, blocked, Some(calls));
                        }
                        _ => blocked += 1,
                    }
                }
            }
            (checked, blocked, None)
        })
        .collect();
    fold(property, bounds, results)
}

fn fixes(tau: &Mapping, keep: &BTreeSet<Term>) -> bool {
    tau.iter().all(|(x, y)| !keep.contains(x) || x == y)
}

fn db_hom_targets(
    rules: &RuleSet,
) -> impl Fn(&Instance, &[Instance]) -> Vec<(Mapping, usize)> + Sync {
    let keep = rules.consts();
    move |d, dbs| {
        let dom: Vec<Term> = d.adom().into_iter().collect();
        let mut out = Vec::new();
        for (j, d2) in dbs.iter().enumerate() {
            let cod: Vec<Term> = d2.adom().into_iter().collect();
            for tau in functions(&dom, &cod) {
                if fixes(&tau, &keep) && d.apply(&tau).is_subset(d2) {
                    out.push((tau, j));
                }
            }
        }
        out
    }
}

fn const_subst_targets(
    rules: &RuleSet,
    consts: Vec<Term>,
) -> impl Fn(&Instance, &[Instance]) -> Vec<(Mapping, usize)> + Sync {
    let keep = rules.consts();
    move |d, dbs| {
        let dom: Vec<Term> = d.adom().into_iter().collect();
        functions(&dom, &consts)
            .into_iter()
            .filter(|s| fixes(s, &keep))
            .filter_map(|s| {
                let img = d.apply(&s);
                dbs.iter().position(|x| *x == img).map(|j| (s, j))
            })
            .collect()
    }
}

/// Closure under database homomorphisms: `(D, q)` entailed and `τ(D) ⊆ D'`
/// give `(D', τ(q))` entailed. DEDs are run through equality elimination.
pub fn check_db_hom_closure(rules: &RuleSet, bounds: &LabBounds) -> Result<Verdict, LabError> {
    let oracle = Oracle::new(rules, bounds.depth)?;
    Ok(closure_check(
        "db-hom-closure",
        rules,
        &oracle,
        bounds,
        &db_hom_targets(rules),
    ))
}

pub fn check_db_hom_closure_with(
    rules: &RuleSet,
    decider: &dyn Decider,
    bounds: &LabBounds,
) -> Verdict {
    let oracle = Oracle::with_decider(rules, decider, bounds.depth);
    closure_check(
        "db-hom-closure",
        rules,
        &oracle,
        bounds,
        &db_hom_targets(rules),
    )
}

/// Closure under constant substitutions: `(D, q)` entailed gives
/// `(s(D), s(q))` entailed.
pub fn check_const_subst_closure(rules: &RuleSet, bounds: &LabBounds) -> Result<Verdict, LabError> {
    let oracle = Oracle::new(rules, bounds.depth)?;
    let targets = const_subst_targets(rules, constants(bounds.consts));
    Ok(closure_check(
        "const-subst-closure",
        rules,
        &oracle,
        bounds,
        &targets,
    ))
}

pub fn check_const_subst_closure_with(
    rules: &RuleSet,
    decider: &dyn Decider,
    bounds: &LabBounds,
) -> Verdict {
    let oracle = Oracle::with_decider(rules, decider, bounds.depth);
    let targets = const_subst_targets(rules, constants(bounds.consts));
    closure_check("const-subst-closure", rules, &oracle, bounds, &targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{replay_witness, Status};
    use crate::syntax::parse_program;

    fn small() -> LabBounds {
        LabBounds {
            consts: 2,
            facts: 2,
            qatoms: 1,
            depth: 4,
        }
    }

    #[test]
    fn disjunction_breaks_query_constructivity() {
        let rules = parse_program("@data: P/1\n@query: Q/1, R/1\nP(X) -> Q(X) | R(X).").unwrap();
        let v = check_query_constructivity(&rules, &small()).unwrap();
        assert_eq!(v.status, Status::Counterexample);
        let w = v.witness.unwrap();
        assert_eq!(w[0].database, "P(a).");
        assert!(replay_witness(&rules, 4, &w).unwrap());
    }

    #[test]
    fn tgds_and_empty_programs_are_constructive() {
        for src in [
            "@data: P/1\n@query: Q/1\nP(X) -> Q(X).",
            "@data: P/1\n@query: Q/1\n",
        ] {
            let rules = parse_program(src).unwrap();
            let v = check_query_constructivity(&rules, &small()).unwrap();
            assert_eq!(v.status, Status::NoCounterexample, "{src}");
        }
    }

    #[test]
    fn dtgds_are_closed() {
        let rules = parse_program(
            "@data: P/1, E/2\n@query: Q/1, R/1\nP(X) -> Q(X) | R(X).\nE(X,Y), Q(X) -> Q(Y).",
        )
        .unwrap();
        let b = small();
        assert_eq!(
            check_db_hom_closure(&rules, &b).unwrap().status,
            Status::NoCounterexample
        );
        assert_eq!(
            check_const_subst_closure(&rules, &b).unwrap().status,
            Status::NoCounterexample
        );
    }
}
