//! Lexer and recursive-descent parser.
//!
//! ```text
//! formula := disj ( "=>" formula )?
//! disj    := conj ( "or" conj )*
//! conj    := unary ( "and" unary )*
//! unary   := "not" unary | ("exists" | "forall") ident ":" ident "." formula | atom
//! atom    := "true" | "false" | "(" formula ")"
//!          | ident ( "(" terms? ")" )? ( "=" term )?
//!          | term "=" term
//! term    := ident ( "(" terms? ")" )?
//! ```
//!
//! A quantifier body extends as far right as possible. `#` starts a line comment.

use super::syntax::{Formula, FormulaKind, Span, Term, TermKind};
use super::LangError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Eq,
    Exists,
    Forall,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`not`".into(),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Forall => "`forall`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, LangError> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, ch)) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
            continue;
        }
        if ch == '#' {
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                chars.next();
            }
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '\'' {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            let tok = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "not" => Tok::Not,
                "and" => Tok::And,
                "or" => Tok::Or,
                "exists" => Tok::Exists,
                "forall" => Tok::Forall,
                _ => Tok::Ident(word.to_string()),
            };
            toks.push((tok, Span::new(i, end)));
            continue;
        }
        chars.next();
        let single = |t| Some((t, Span::new(i, i + ch.len_utf8())));
        let tok = match ch {
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            ',' => single(Tok::Comma),
            ':' => single(Tok::Colon),
            '.' => single(Tok::Dot),
            '¬' => single(Tok::Not),
            '∧' => single(Tok::And),
            '∨' => single(Tok::Or),
            '⇒' => single(Tok::Implies),
            '∃' => single(Tok::Exists),
            '∀' => single(Tok::Forall),
            '⊤' => single(Tok::True),
            '⊥' => single(Tok::False),
            '=' => {
                if chars.peek().is_some_and(|&(_, c)| c == '>') {
                    chars.next();
                    Some((Tok::Implies, Span::new(i, i + 2)))
                } else {
                    single(Tok::Eq)
                }
            }
            _ => None,
        };
        match tok {
            Some(t) => toks.push(t),
            None => {
                return Err(syntax_error(
                    text,
                    Span::new(i, i + ch.len_utf8()),
                    &["a token"],
                    format!("character `{ch}`"),
                ))
            }
        }
    }
    toks.push((Tok::Eof, Span::new(text.len(), text.len())));
    Ok(toks)
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn syntax_error(text: &str, span: Span, expected: &[&str], found: String) -> LangError {
    let (line, column) = line_col(text, span.start);
    let mut expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    expected.sort();
    expected.dedup();
    LangError::Syntax {
        line,
        column,
        span,
        expected,
        found,
    }
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

const ATOM_START: &[&str] = &["`true`", "`false`", "`not`", "`exists`", "`forall`", "`(`", "identifier"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> LangError {
        syntax_error(self.text, self.span(), expected, self.peek().describe())
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<Span, LangError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error(&[name]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), LangError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().1;
                Ok((name, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn formula(&mut self) -> Result<Formula, LangError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.formula()?;
            let span = lhs.span.to(rhs.span);
            return Ok(Formula {
                kind: FormulaKind::Implies(Box::new(lhs), Box::new(rhs)),
                span,
            });
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LangError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            let span = lhs.span.to(rhs.span);
            lhs = Formula {
                kind: FormulaKind::Or(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LangError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = Formula {
                kind: FormulaKind::And(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LangError> {
        match self.peek() {
            Tok::Not => {
                let start = self.bump().1;
                let inner = self.unary()?;
                let span = start.to(inner.span);
                Ok(Formula {
                    kind: FormulaKind::Not(Box::new(inner)),
                    span,
                })
            }
            Tok::Exists | Tok::Forall => {
                let (q, start) = self.bump();
                let (var, _) = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let (sort, _) = self.ident()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = Box::new(self.formula()?);
                let span = start.to(body.span);
                let kind = if q == Tok::Exists {
                    FormulaKind::Exists(var, sort, body)
                } else {
                    FormulaKind::Forall(var, sort, body)
                };
                Ok(Formula { kind, span })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LangError> {
        match self.peek().clone() {
            Tok::True => Ok(Formula {
                kind: FormulaKind::True,
                span: self.bump().1,
            }),
            Tok::False => Ok(Formula {
                kind: FormulaKind::False,
                span: self.bump().1,
            }),
            Tok::LParen => {
                let start = self.bump().1;
                let inner = self.formula()?;
                let end = self.expect(Tok::RParen, "`)`")?;
                Ok(Formula {
                    kind: inner.kind,
                    span: start.to(end),
                })
            }
            Tok::Ident(_) => {
                let (name, span, args) = self.application()?;
                if *self.peek() == Tok::Eq {
                    self.bump();
                    let lhs = Term {
                        kind: match args {
                            Some(args) => TermKind::App(name, args),
                            None => TermKind::Var(name),
                        },
                        span,
                    };
                    let rhs = self.term()?;
                    let span = span.to(rhs.span);
                    return Ok(Formula {
                        kind: FormulaKind::Eq(lhs, rhs),
                        span,
                    });
                }
                Ok(Formula {
                    kind: FormulaKind::Rel(name, args.unwrap_or_default()),
                    span,
                })
            }
            _ => Err(self.error(ATOM_START)),
        }
    }

    /// `ident` or `ident(args)`; `None` args for a bare identifier.
    fn application(&mut self) -> Result<(String, Span, Option<Vec<Term>>), LangError> {
        let (name, start) = self.ident()?;
        if *self.peek() != Tok::LParen {
            return Ok((name, start, None));
        }
        self.bump();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => break,
                    _ => return Err(self.error(&["`,`", "`)`"])),
                }
            }
        }
        self.bump();
        Ok((name, start.to(self.prev_span()), Some(args)))
    }

    fn term(&mut self) -> Result<Term, LangError> {
        if !matches!(self.peek(), Tok::Ident(_)) {
            return Err(self.error(&["identifier"]));
        }
        let (name, span, args) = self.application()?;
        Ok(Term {
            kind: match args {
                Some(args) => TermKind::App(name, args),
                None => TermKind::Var(name),
            },
            span,
        })
    }
}

/// Parses a formula.
pub fn parse(text: &str) -> Result<Formula, LangError> {
    let mut p = Parser {
        text,
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        let mut expected = vec!["`and`", "`or`", "`=>`", "end of input"];
        if matches!(f.kind, FormulaKind::Rel(..)) {
            expected.push("`=`");
        }
        return Err(p.error(&expected));
    }
    Ok(f)
}

/// Parses a term.
pub fn parse_term(text: &str) -> Result<Term, LangError> {
    let mut p = Parser {
        text,
        toks: lex(text)?,
        pos: 0,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected_of(e: LangError) -> (usize, usize, Vec<String>, Span) {
        match e {
            LangError::Syntax {
                line,
                column,
                expected,
                span,
                ..
            } => (line, column, expected, span),
            other => panic!("not a syntax error: {other:?}"),
        }
    }

    #[test]
    fn exists_over_equality() {
        let f = parse("exists x:A. f(x) = c").unwrap();
        let expected = Formula::exists(
            "x",
            "A",
            Formula::new(FormulaKind::Eq(
                Term::app("f", vec![Term::var("x")]),
                Term::var("c"),
            )),
        );
        assert_eq!(f, expected);
        assert_eq!(f.span, Span::new(0, 20));
    }

    #[test]
    fn forall_over_implication() {
        let f = parse("forall x:A. (P(x) => Q(x))").unwrap();
        let p = Formula::new(FormulaKind::Rel("P".into(), vec![Term::var("x")]));
        let q = Formula::new(FormulaKind::Rel("Q".into(), vec![Term::var("x")]));
        assert_eq!(f, Formula::forall("x", "A", Formula::implies(p, q)));
    }

    #[test]
    fn missing_body_errors_at_end() {
        let text = "exists x:A";
        let (line, column, expected, span) = expected_of(parse(text).unwrap_err());
        assert_eq!((line, column), (1, 11));
        assert_eq!(span, Span::new(10, 10));
        assert_eq!(expected, vec!["`.`".to_string()]);
        let (_, _, expected, span) = expected_of(parse("exists x:A.").unwrap_err());
        assert_eq!(span.start, 11);
        assert!(expected.contains(&"identifier".to_string()));
    }

    #[test]
    fn precedence() {
        let f = parse("not P and Q or R => S => T").unwrap();
        let atom = |n: &str| Formula::new(FormulaKind::Rel(n.into(), vec![]));
        let expected = Formula::implies(
            Formula::or(Formula::and(Formula::not(atom("P")), atom("Q")), atom("R")),
            Formula::implies(atom("S"), atom("T")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("P and exists x:A. Q or R").unwrap();
        let atom = |n: &str| Formula::new(FormulaKind::Rel(n.into(), vec![]));
        assert_eq!(
            f,
            Formula::and(atom("P"), Formula::exists("x", "A", Formula::or(atom("Q"), atom("R"))))
        );
    }

    #[test]
    fn multiline_error_position() {
        let text = "forall x:A.\n  P(x) and )";
        let (line, column, _, _) = expected_of(parse(text).unwrap_err());
        assert_eq!((line, column), (2, 12));
    }

    #[test]
    fn trailing_garbage() {
        let (_, _, expected, _) = expected_of(parse("true true").unwrap_err());
        assert!(expected.contains(&"end of input".to_string()));
        assert!(matches!(parse("P $ Q"), Err(LangError::Syntax { .. })));
    }

    #[test]
    fn unicode_connectives() {
        assert_eq!(parse("∃x:A. ¬(x = y) ∧ ⊤").unwrap(), parse("exists x:A. not x = y and true").unwrap());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse("# header\ntrue # trailing").unwrap(), Formula::new(FormulaKind::True));
    }
}
