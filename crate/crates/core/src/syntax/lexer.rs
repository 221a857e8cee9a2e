use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Pipe,
    Arrow,
    Equals,
    Semi,
    Colon,
    Slash,
    Directive(String),
    Label(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#'
}

/// Checks an optional `%format` header and returns an error for a foreign version.
pub(crate) fn check_format_header(src: &str) -> Result<(), SyntaxError> {
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix("%format") {
            let v = rest.trim();
            if v != crate::FORMAT_TAG {
                return Err(SyntaxError::Parse {
                    line: i + 1,
                    col: 1,
                    message: format!("unsupported format `{v}`, expected {}", crate::FORMAT_TAG),
                });
            }
        }
        return Ok(());
    }
    Ok(())
}

pub(crate) fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    check_format_header(src)?;
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| SyntaxError::Parse { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let step = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => step(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | ',' | '.' | '|' | '=' | ';' | ':' | '/' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '|' => Tok::Pipe,
                    '=' => Tok::Equals,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    _ => Tok::Slash,
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    col: c0,
                });
                step(1, &mut i, &mut col);
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        line: l0,
                        col: c0,
                    });
                    step(2, &mut i, &mut col);
                } else {
                    return Err(err(l0, c0, "expected `->`".into()));
                }
            }
            '@' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && ident_char(chars[j]) {
                    j += 1;
                }
                let name: String = chars[start..j].iter().collect();
                if name.is_empty() {
                    return Err(err(l0, c0, "empty directive".into()));
                }
                out.push(Spanned {
                    tok: Tok::Directive(name),
                    line: l0,
                    col: c0,
                });
                let n = j - i;
                step(n, &mut i, &mut col);
            }
            '[' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != ']' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&']') {
                    return Err(err(l0, c0, "unterminated label".into()));
                }
                let label: String = chars[i + 1..j].iter().collect();
                out.push(Spanned {
                    tok: Tok::Label(label.trim().to_string()),
                    line: l0,
                    col: c0,
                });
                let n = j + 1 - i;
                step(n, &mut i, &mut col);
            }
            c if ident_char(c) => {
                let mut j = i;
                while j < chars.len() && ident_char(chars[j]) {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: l0,
                    col: c0,
                });
                let n = j - i;
                step(n, &mut i, &mut col);
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("% c\n[r1] P(X) -> Q(X) | X = Y.").unwrap();
        assert_eq!(toks[0].tok, Tok::Label("r1".into()));
        assert_eq!((toks[0].line, toks[0].col), (2, 1));
        assert!(toks.iter().any(|t| t.tok == Tok::Arrow));
        assert!(toks.iter().any(|t| t.tok == Tok::Pipe));
    }

    #[test]
    fn format_header() {
        assert!(lex("%format exrule/1\nP(a).").is_ok());
        assert!(lex("%format exrule/9\nP(a).").is_err());
    }

    #[test]
    fn bad_char_reports_position() {
        match lex("P(a) ?") {
            Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (1, 6)),
            other => panic!("{other:?}"),
        }
    }
}
