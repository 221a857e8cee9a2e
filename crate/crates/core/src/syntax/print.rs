use std::fmt;

use super::{Dependency, HeadAtom, RuleSet};

impl fmt::Display for HeadAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadAtom::Rel(a) => write!(f, "{a}"),
            HeadAtom::Eq(l, r) => write!(f, "{l} = {r}"),
        }
    }
}

impl fmt::Debug for HeadAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            write!(f, "[{l}] ")?;
        }
        if self.body.is_empty() {
            f.write_str("true")?;
        } else {
            join(f, &self.body, ", ")?;
        }
        f.write_str(" -> ")?;
        for (i, d) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            join(f, d, ", ")?;
        }
        f.write_str(".")
    }
}

impl fmt::Debug for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "%format {}", crate::FORMAT_TAG)?;
        if self.uses_reserved() {
            writeln!(f, "@generated")?;
        }
        if !self.data.is_empty() {
            writeln!(f, "@data: {}", self.data)?;
        }
        if !self.query.is_empty() {
            writeln!(f, "@query: {}", self.query)?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::parse_program;

    #[test]
    fn round_trip_equality_rule() {
        let p = parse_program("@data: R/2, P/1\nR(X,Y) -> X = Y.").unwrap();
        let text = p.to_string();
        assert!(text.contains("R(X,Y) -> X = Y."));
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn empty_body_prints_true() {
        let p = parse_program("true -> F(X).").unwrap();
        assert_eq!(p.rules[0].to_string(), "true -> F(X).");
    }
}
