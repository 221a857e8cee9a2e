use std::collections::{BTreeMap, BTreeSet};

use super::{merge_arity, Atom, Bcq, Instance, Mapping, ModelError, Term, Ucq};

/// Finds a C-homomorphism from `source` into `target`: every source term may be
/// mapped, except the terms in `fixed` which must map to themselves.
pub fn hom_search(
    source: &Instance,
    target: &Instance,
    fixed: &BTreeSet<Term>,
) -> Result<Option<Mapping>, ModelError> {
    hom_search_from(source.atoms(), target, fixed, Mapping::new())
}

/// Like [`hom_search`] but extends a partial assignment. Terms bound in `seed`
/// are treated as fixed to their image.
pub fn hom_search_from<'a>(
    source: impl IntoIterator<Item = &'a Atom>,
    target: &Instance,
    fixed: &BTreeSet<Term>,
    seed: Mapping,
) -> Result<Option<Mapping>, ModelError> {
    let mut atoms: Vec<&Atom> = source.into_iter().collect();
    let mut schema = target.schema()?;
    for a in &atoms {
        merge_arity(&mut schema, &a.rel, a.arity())?;
    }
    // big atoms first: they bind the most terms per step
    atoms.sort_by(|a, b| b.arity().cmp(&a.arity()).then_with(|| a.cmp(b)));
    atoms.dedup();

    let mut by_rel: BTreeMap<&str, Vec<&Atom>> = BTreeMap::new();
    for t in target.iter() {
        by_rel.entry(&t.rel).or_default().push(t);
    }
    let mut m = seed;
    for c in fixed {
        if let Some(img) = m.get(c) {
            if img != c {
                return Ok(None);
            }
        }
    }
    Ok(search(&atoms, 0, &by_rel, fixed, &mut m).then_some(m))
}

fn search(
    atoms: &[&Atom],
    i: usize,
    by_rel: &BTreeMap<&str, Vec<&Atom>>,
    fixed: &BTreeSet<Term>,
    m: &mut Mapping,
) -> bool {
    let Some(atom) = atoms.get(i) else {
        return true;
    };
    let Some(candidates) = by_rel.get(&*atom.rel) else {
        return false;
    };
    for cand in candidates {
        let mut added = Vec::new();
        let mut ok = true;
        for (s, t) in atom.args.iter().zip(&cand.args) {
            match m.get(s) {
                Some(img) if img == t => {}
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {
                    if fixed.contains(s) && s != t {
                        ok = false;
                        break;
                    }
                    m.insert(s.clone(), t.clone());
                    added.push(s.clone());
                }
            }
        }
        if ok && search(atoms, i + 1, by_rel, fixed, m) {
            return true;
        }
        for s in added {
            m.remove(&s);
        }
    }
    false
}

/// Checks `h(source) ⊆ target` and `h(c) = c` for `c ∈ fixed`. Terms missing from `h`
/// count as mapped to themselves.
pub fn is_homomorphism(
    h: &Mapping,
    source: &Instance,
    target: &Instance,
    fixed: &BTreeSet<Term>,
) -> bool {
    fixed.iter().all(|c| h.get(c).is_none_or(|img| img == c))
        && source.iter().all(|a| target.contains(&a.apply(h)))
}

/// `I ⊨ q` for a single BCQ: a `const(q)`-homomorphism from `[q]` into `I`.
pub fn entails_bcq(instance: &Instance, q: &Bcq) -> bool {
    let consts = q.consts();
    matches!(
        hom_search_from(q.atoms(), instance, &consts, Mapping::new()),
        Ok(Some(_))
    )
}

/// `I ⊨ q`: some disjunct maps into `I`. Arity clashes between query and
/// instance mean no disjunct can match.
pub fn entails_ucq(instance: &Instance, q: &Ucq) -> bool {
    q.disjuncts().iter().any(|p| entails_bcq(instance, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(atoms: &[(&str, &[&str])]) -> Instance {
        atoms.iter().map(|(r, a)| Atom::parse_args(r, a)).collect()
    }

    fn all_maps(src: &[Term], tgt: &[Term]) -> Vec<Mapping> {
        let mut out = vec![Mapping::new()];
        for s in src {
            let mut next = Vec::new();
            for m in &out {
                for t in tgt {
                    let mut m = m.clone();
                    m.insert(s.clone(), t.clone());
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn finds_collapse_without_fixed_constants() {
        let i = inst(&[("P", &["a"]), ("E", &["a", "b"])]);
        let j = inst(&[("P", &["c"]), ("E", &["c", "c"])]);
        let h = hom_search(&i, &j, &BTreeSet::new()).unwrap().unwrap();
        assert_eq!(h[&Term::constant("a")], Term::constant("c"));
        assert_eq!(h[&Term::constant("b")], Term::constant("c"));

        // the same answer by brute force over all 4 maps
        let src: Vec<Term> = i.terms().into_iter().collect();
        let tgt: Vec<Term> = j.terms().into_iter().chain([Term::constant("a")]).collect();
        let good: Vec<_> = all_maps(&src, &tgt)
            .into_iter()
            .filter(|m| is_homomorphism(m, &i, &j, &BTreeSet::new()))
            .collect();
        assert_eq!(good, vec![h]);
    }

    #[test]
    fn fixed_constant_blocks() {
        let i = inst(&[("P", &["a"]), ("E", &["a", "b"])]);
        let j = inst(&[("P", &["c"]), ("E", &["c", "c"])]);
        let fixed = BTreeSet::from([Term::constant("a")]);
        assert_eq!(hom_search(&i, &j, &fixed).unwrap(), None);
    }

    #[test]
    fn empty_source_maps_trivially() {
        let j = inst(&[("P", &["c"])]);
        assert_eq!(
            hom_search(&Instance::new(), &j, &BTreeSet::new()).unwrap(),
            Some(Mapping::new())
        );
    }

    #[test]
    fn arity_clash_is_error() {
        let i = inst(&[("P", &["a"])]);
        let j = inst(&[("P", &["a", "b"])]);
        assert!(matches!(
            hom_search(&i, &j, &BTreeSet::new()),
            Err(ModelError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn ucq_entailment_cases() {
        let q = Ucq::new([
            Bcq::atom(Atom::parse_args("Q", &["a"])),
            Bcq::atom(Atom::parse_args("R", &["a"])),
        ])
        .unwrap();
        assert!(entails_ucq(&inst(&[("Q", &["a"])]), &q));

        let i = inst(&[("E", &["a", "_n1"]), ("Q", &["_n1"])]);
        let q = Bcq::new([
            Atom::parse_args("E", &["X", "Y"]),
            Atom::parse_args("Q", &["Y"]),
        ])
        .unwrap();
        assert!(entails_ucq(&i, &q.into()));

        let i = inst(&[("E", &["a", "_n1"])]);
        let q = Bcq::atom(Atom::parse_args("E", &["Y", "a"]));
        assert!(!entails_ucq(&i, &q.into()));
    }
}
