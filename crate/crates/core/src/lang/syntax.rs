use std::collections::BTreeSet;
use std::fmt;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// Terms compare structurally; spans are ignored by `==`.
#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    /// A variable, or a constant when the name is a 0-ary function symbol.
    Var(String),
    App(String, Vec<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Term {}

/// Formulas compare structurally; spans are ignored by `==`.
#[derive(Clone, Debug)]
pub struct Formula {
    pub kind: FormulaKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaKind {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, String, Box<Formula>),
    Forall(String, String, Box<Formula>),
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Formula {}

impl Term {
    pub fn var(name: &str) -> Term {
        Term {
            kind: TermKind::Var(name.to_string()),
            span: Span::default(),
        }
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term {
            kind: TermKind::App(name.to_string(), args),
            span: Span::default(),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            TermKind::Var(x) => {
                out.insert(x.clone());
            }
            TermKind::App(_, args) => args.iter().for_each(|t| t.free_vars(out)),
        }
    }

    fn substitute(&self, var: &str, term: &Term) -> Term {
        match &self.kind {
            TermKind::Var(x) if x == var => term.clone(),
            TermKind::Var(_) => self.clone(),
            TermKind::App(f, args) => Term {
                kind: TermKind::App(f.clone(), args.iter().map(|t| t.substitute(var, term)).collect()),
                span: self.span,
            },
        }
    }
}

impl Formula {
    pub fn new(kind: FormulaKind) -> Formula {
        Formula {
            kind,
            span: Span::default(),
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::new(FormulaKind::Not(Box::new(f)))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::new(FormulaKind::And(Box::new(a), Box::new(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::new(FormulaKind::Or(Box::new(a), Box::new(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::new(FormulaKind::Implies(Box::new(a), Box::new(b)))
    }

    pub fn exists(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::new(FormulaKind::Exists(var.into(), sort.into(), Box::new(body)))
    }

    pub fn forall(var: &str, sort: &str, body: Formula) -> Formula {
        Formula::new(FormulaKind::Forall(var.into(), sort.into(), Box::new(body)))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            FormulaKind::True | FormulaKind::False => {}
            FormulaKind::Rel(_, args) => args.iter().for_each(|t| t.free_vars(out)),
            FormulaKind::Eq(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            FormulaKind::Not(f) => f.collect_free(out),
            FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            FormulaKind::Exists(x, _, body) | FormulaKind::Forall(x, _, body) => {
                let mut inner = body.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    /// Capture-avoiding substitution `self[term/var]`.
    pub fn substitute(&self, var: &str, term: &Term) -> Formula {
        let kind = match &self.kind {
            FormulaKind::True => FormulaKind::True,
            FormulaKind::False => FormulaKind::False,
            FormulaKind::Rel(r, args) => {
                FormulaKind::Rel(r.clone(), args.iter().map(|t| t.substitute(var, term)).collect())
            }
            FormulaKind::Eq(a, b) => FormulaKind::Eq(a.substitute(var, term), b.substitute(var, term)),
            FormulaKind::Not(f) => FormulaKind::Not(Box::new(f.substitute(var, term))),
            FormulaKind::And(a, b) => {
                FormulaKind::And(Box::new(a.substitute(var, term)), Box::new(b.substitute(var, term)))
            }
            FormulaKind::Or(a, b) => {
                FormulaKind::Or(Box::new(a.substitute(var, term)), Box::new(b.substitute(var, term)))
            }
            FormulaKind::Implies(a, b) => {
                FormulaKind::Implies(Box::new(a.substitute(var, term)), Box::new(b.substitute(var, term)))
            }
            FormulaKind::Exists(x, s, body) | FormulaKind::Forall(x, s, body) => {
                let is_exists = matches!(self.kind, FormulaKind::Exists(..));
                let (x, body) = if x == var {
                    (x.clone(), (**body).clone())
                } else {
                    let mut tvars = BTreeSet::new();
                    term.free_vars(&mut tvars);
                    if tvars.contains(x) {
                        let mut avoid = tvars;
                        avoid.extend(body.free_vars());
                        avoid.insert(var.to_string());
                        let fresh = fresh_name(x, &avoid);
                        let renamed = body.substitute(x, &Term::var(&fresh));
                        (fresh, renamed.substitute(var, term))
                    } else {
                        (x.clone(), body.substitute(var, term))
                    }
                };
                if is_exists {
                    FormulaKind::Exists(x, s.clone(), Box::new(body))
                } else {
                    FormulaKind::Forall(x, s.clone(), Box::new(body))
                }
            }
        };
        Formula { kind, span: self.span }
    }

    /// Nesting depth of connectives and quantifiers; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match &self.kind {
            FormulaKind::True | FormulaKind::False | FormulaKind::Rel(..) | FormulaKind::Eq(..) => 0,
            FormulaKind::Not(f) | FormulaKind::Exists(_, _, f) | FormulaKind::Forall(_, _, f) => 1 + f.depth(),
            FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Var(x) => write!(f, "{x}"),
            TermKind::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print(self))
    }
}
