use super::lexer::{lex, Spanned, Tok};
use super::{Dependency, HeadAtom, RuleSet, Schema, SyntaxError};
use crate::model::{Atom, Bcq, Instance, Term, Ucq};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Rules { generated: bool },
    Database,
    Query,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: Ctx,
}

impl Parser {
    fn new(src: &str, ctx: Ctx) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            ctx,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let (line, col) = self.here();
        Err(SyntaxError::Parse {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    fn generated(&self) -> bool {
        matches!(self.ctx, Ctx::Rules { generated: true })
    }

    fn relation(&mut self) -> Result<String, SyntaxError> {
        let name = self.ident("relation name")?;
        if name.starts_with('_') && !self.generated() {
            self.pos -= 1;
            return self.fail(format!("`{name}` uses the reserved `_` prefix"));
        }
        Ok(name)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let name = self.ident("term")?;
        let first = name.chars().next().unwrap_or('a');
        let t = match self.ctx {
            Ctx::Rules { generated } => {
                if first == '_' {
                    if !generated {
                        self.pos -= 1;
                        return self.fail(format!("`{name}` uses the reserved `_` prefix"));
                    }
                    Term::var(&name)
                } else if first.is_ascii_uppercase() {
                    Term::var(&name)
                } else {
                    Term::constant(&name)
                }
            }
            Ctx::Database => {
                if first.is_ascii_uppercase() {
                    self.pos -= 1;
                    return self.fail(format!("variable `{name}` in a database"));
                }
                Term::from_token(&name)
            }
            Ctx::Query => {
                if first == '_' {
                    self.pos -= 1;
                    return self.fail(format!("null `{name}` in a query"));
                }
                Term::from_token(&name)
            }
        };
        Ok(t)
    }

    fn atom_after_name(&mut self, rel: String) -> Result<Atom, SyntaxError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.term()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom::new(&rel, args))
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let rel = self.relation()?;
        self.atom_after_name(rel)
    }

    fn head_atom(&mut self) -> Result<HeadAtom, SyntaxError> {
        if self.peek2() == Some(&Tok::Equals) {
            let l = self.term()?;
            self.pos += 1;
            let r = self.term()?;
            return Ok(HeadAtom::Eq(l, r));
        }
        Ok(HeadAtom::Rel(self.atom()?))
    }

    fn schema_list(&mut self) -> Result<Schema, SyntaxError> {
        self.expect(Tok::Colon, "`:`")?;
        let mut s = Schema::new();
        if !matches!(self.peek(), Some(Tok::Ident(_))) {
            return Ok(s);
        }
        loop {
            let rel = self.relation()?;
            self.expect(Tok::Slash, "`/`")?;
            let k = self.ident("arity")?;
            let Ok(k) = k.parse::<usize>() else {
                self.pos -= 1;
                return self.fail("arity must be a number");
            };
            if let Some(old) = s.arity(&rel) {
                if old != k {
                    return Err(crate::model::ModelError::SchemaMismatch {
                        relation: rel,
                        left: old,
                        right: k,
                    }
                    .into());
                }
            }
            s.0.insert(rel.into(), k);
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
        }
        Ok(s)
    }

    fn rule(&mut self, label: Option<String>) -> Result<Dependency, SyntaxError> {
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Ident("true".into())) && self.peek2() == Some(&Tok::Arrow) {
            self.pos += 1;
        } else {
            loop {
                body.push(self.atom()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Arrow, "`->`")?;
        let mut head = Vec::new();
        loop {
            let mut conj = Vec::new();
            loop {
                conj.push(self.head_atom()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            head.push(conj);
            if self.peek() == Some(&Tok::Pipe) {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "`.` at end of rule")?;
        Ok(Dependency { label, body, head })
    }
}

/// Parses a `.rules` file.
pub fn parse_program(src: &str) -> Result<RuleSet, SyntaxError> {
    let mut p = Parser::new(src, Ctx::Rules { generated: false })?;
    let mut data = Schema::new();
    let mut query = Schema::new();
    let mut rules = Vec::new();
    let mut label = None;
    while let Some(tok) = p.peek().cloned() {
        match tok {
            Tok::Directive(d) => {
                p.pos += 1;
                match d.as_str() {
                    "data" => data.0.extend(p.schema_list()?.0),
                    "query" => query.0.extend(p.schema_list()?.0),
                    "generated" => p.ctx = Ctx::Rules { generated: true },
                    other => {
                        p.pos -= 1;
                        return p.fail(format!("unknown directive `@{other}`"));
                    }
                }
            }
            Tok::Label(l) => {
                p.pos += 1;
                label = Some(l);
            }
            _ => rules.push(p.rule(label.take())?),
        }
    }
    RuleSet::new(rules, data, query)
}

/// Parses a `.db` file: ground facts, each terminated by `.`.
pub fn parse_database(src: &str) -> Result<Instance, SyntaxError> {
    let mut p = Parser::new(src, Ctx::Database)?;
    let mut out = Instance::new();
    while p.peek().is_some() {
        let a = p.atom()?;
        p.expect(Tok::Dot, "`.` after fact")?;
        out.insert(a);
    }
    out.schema()?;
    Ok(out)
}

/// Parses a `.query` file: `E(X,Y), Q(Y) ; R(a).`
pub fn parse_query(src: &str) -> Result<Ucq, SyntaxError> {
    let mut p = Parser::new(src, Ctx::Query)?;
    let mut disjuncts = Vec::new();
    loop {
        let mut atoms = Vec::new();
        loop {
            atoms.push(p.atom()?);
            if p.peek() == Some(&Tok::Comma) {
                p.pos += 1;
            } else {
                break;
            }
        }
        disjuncts.push(Bcq::new(atoms)?);
        match p.next() {
            Some(Tok::Semi) => continue,
            Some(Tok::Dot) | None => break,
            Some(_) => {
                p.pos -= 1;
                return p.fail("expected `,`, `;` or `.`");
            }
        }
    }
    if p.peek().is_some() {
        return p.fail("trailing input after query");
    }
    let q = Ucq::new(disjuncts)?;
    let inst: Instance = q
        .disjuncts()
        .iter()
        .flat_map(|d| d.atoms().iter().cloned())
        .collect();
    inst.schema()?;
    Ok(q)
}
