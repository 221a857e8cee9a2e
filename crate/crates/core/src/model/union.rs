use std::collections::BTreeSet;

use super::{Instance, Mapping, Null, Term};

fn rename_apart(t: &Term, part: usize) -> Term {
    match t {
        Term::Const(n) => Term::Const(format!("{n}#{part}").into()),
        Term::Var(n) => Term::Var(format!("{n}#{part}").into()),
        Term::Null(n) => Term::Null(Null::Named(format!("{n}#{part}").into())),
    }
}

/// Union of renamed copies of `parts`. Every term outside `shared` gets the
/// suffix `#i` of its part, so copies only meet in `shared`.
pub fn c_disjoint_union(parts: &[Instance], shared: &BTreeSet<Term>) -> Instance {
    let mut out = Instance::new();
    for (i, part) in parts.iter().enumerate() {
        let m: Mapping = part
            .terms()
            .into_iter()
            .filter(|t| !shared.contains(t))
            .map(|t| {
                let r = rename_apart(&t, i);
                (t, r)
            })
            .collect();
        for a in part.iter() {
            out.insert(a.apply(&m));
        }
    }
    out
}
