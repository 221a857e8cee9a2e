//! Universal models built from the entailed queries of bounded size.

use serde::Serialize;

use super::{enumerate_lab_queries, query_schema, LabError};
use crate::chase::{skolem_chase_full, ChaseLimits};
use crate::model::{c_disjoint_union, entails_bcq, Bcq, Instance, Term};
use crate::syntax::{Dialect, RuleSet};

fn saturated_chase(d: &Instance, rules: &RuleSet, depth: usize) -> Result<Instance, LabError> {
    let found = rules.dialect();
    if found > Dialect::Tgd {
        return Err(LabError::Dialect {
            found,
            allowed: Dialect::Tgd,
        });
    }
    let r = skolem_chase_full(d, rules, depth, ChaseLimits::default())?;
    if !r.saturated {
        return Err(LabError::Inconclusive(format!(
            "chase does not saturate within {depth} rounds"
        )));
    }
    Ok(r.instance)
}

fn entailed_queries(
    d: &Instance,
    rules: &RuleSet,
    m: usize,
    depth: usize,
) -> Result<(Vec<Bcq>, Vec<bool>), LabError> {
    let chase = saturated_chase(d, rules, depth)?;
    let consts: Vec<Term> = d.adom().into_iter().collect();
    let qs = enumerate_lab_queries(&query_schema(rules), &consts, m);
    let hits = qs.iter().map(|q| entails_bcq(&chase, q)).collect();
    Ok((qs, hits))
}

/// The `adom(D)`-disjoint union of `[q]` over all entailed query-schema BCQs
/// with at most `m` atoms over `adom(D)` and at most `m` variables.
pub fn universal_model(
    d: &Instance,
    rules: &RuleSet,
    m: usize,
    depth: usize,
) -> Result<Instance, LabError> {
    let (qs, hits) = entailed_queries(d, rules, m, depth)?;
    let parts: Vec<Instance> = qs
        .iter()
        .zip(&hits)
        .filter(|(_, h)| **h)
        .map(|(q, _)| q.frozen())
        .collect();
    Ok(c_disjoint_union(&parts, &d.adom()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma8Report {
    pub queries: usize,
    pub entailed: usize,
    pub model_size: usize,
    /// Queries where `U ⊨ q` and entailment differ.
    pub mismatches: Vec<String>,
}

/// Compares `U ⊨ q` with entailment for every query of the universe.
pub fn lemma8_check(
    d: &Instance,
    rules: &RuleSet,
    m: usize,
    depth: usize,
) -> Result<Lemma8Report, LabError> {
    let (qs, hits) = entailed_queries(d, rules, m, depth)?;
    let u = universal_model(d, rules, m, depth)?;
    let mismatches = qs
        .iter()
        .zip(&hits)
        .filter(|(q, h)| entails_bcq(&u, q) != **h)
        .map(|(q, _)| q.to_string())
        .collect();
    Ok(Lemma8Report {
        queries: qs.len(),
        entailed: hits.iter().filter(|h| **h).count(),
        model_size: u.len(),
        mismatches,
    })
}
