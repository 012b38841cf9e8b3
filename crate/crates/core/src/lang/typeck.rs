use std::collections::BTreeMap;

use super::syntax::{Formula, FormulaKind, Span, Term, TermKind};
use super::LangError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSig {
    pub args: Vec<String>,
    pub result: String,
}

/// Sorts, function symbols (constants are 0-ary) and relation symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<String>,
    functions: BTreeMap<String, FunctionSig>,
    relations: BTreeMap<String, Vec<String>>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn add_sort(&mut self, name: &str) -> Result<(), LangError> {
        if self.sorts.iter().any(|s| s == name) {
            return Err(LangError::DuplicateSymbol { kind: "sort", name: name.into() });
        }
        self.sorts.push(name.into());
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, args: &[&str], result: &str) -> Result<(), LangError> {
        for s in args.iter().chain([&result]) {
            self.check_sort(s)?;
        }
        if self.functions.contains_key(name) {
            return Err(LangError::DuplicateSymbol { kind: "function", name: name.into() });
        }
        self.functions.insert(
            name.into(),
            FunctionSig {
                args: args.iter().map(|s| s.to_string()).collect(),
                result: result.into(),
            },
        );
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, args: &[&str]) -> Result<(), LangError> {
        for s in args {
            self.check_sort(s)?;
        }
        if self.relations.contains_key(name) {
            return Err(LangError::DuplicateSymbol { kind: "relation", name: name.into() });
        }
        self.relations
            .insert(name.into(), args.iter().map(|s| s.to_string()).collect());
        Ok(())
    }

    fn check_sort(&self, s: &str) -> Result<(), LangError> {
        if self.has_sort(s) {
            Ok(())
        } else {
            Err(LangError::UnknownSort { name: s.into(), span: Span::default() })
        }
    }

    pub fn has_sort(&self, s: &str) -> bool {
        self.sorts.iter().any(|x| x == s)
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn functions(&self) -> &BTreeMap<String, FunctionSig> {
        &self.functions
    }

    pub fn relations(&self) -> &BTreeMap<String, Vec<String>> {
        &self.relations
    }
}

/// An ordered list of typed variables; later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Context {
    vars: Vec<(String, String)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Context {
        Context {
            vars: pairs.iter().map(|(x, s)| (x.to_string(), s.to_string())).collect(),
        }
    }

    pub fn extended(&self, var: &str, sort: &str) -> Context {
        let mut vars = self.vars.clone();
        vars.push((var.into(), sort.into()));
        Context { vars }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[(String, String)] {
        &self.vars
    }

    pub fn sorts(&self) -> Vec<String> {
        self.vars.iter().map(|(_, s)| s.clone()).collect()
    }

    /// Position and sort of the innermost binding of `name`.
    pub fn lookup(&self, name: &str) -> Option<(usize, &str)> {
        self.vars
            .iter()
            .enumerate()
            .rev()
            .find(|(_, (x, _))| x == name)
            .map(|(i, (_, s))| (i, s.as_str()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypedTerm {
    /// Position in the context.
    Var { index: usize, sort: String },
    App { symbol: String, args: Vec<TypedTerm>, sort: String },
}

impl TypedTerm {
    pub fn sort(&self) -> &str {
        match self {
            TypedTerm::Var { sort, .. } | TypedTerm::App { sort, .. } => sort,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypedFormula {
    True,
    False,
    Rel { symbol: String, args: Vec<TypedTerm> },
    Eq(TypedTerm, TypedTerm),
    Not(Box<TypedFormula>),
    And(Box<TypedFormula>, Box<TypedFormula>),
    Or(Box<TypedFormula>, Box<TypedFormula>),
    Implies(Box<TypedFormula>, Box<TypedFormula>),
    Exists { var: String, sort: String, body: Box<TypedFormula> },
    Forall { var: String, sort: String, body: Box<TypedFormula> },
}

pub fn typecheck_term(t: &Term, sig: &Signature, ctx: &Context) -> Result<TypedTerm, LangError> {
    match &t.kind {
        TermKind::Var(x) => {
            if let Some((index, sort)) = ctx.lookup(x) {
                return Ok(TypedTerm::Var { index, sort: sort.to_string() });
            }
            match sig.functions.get(x) {
                Some(fs) if fs.args.is_empty() => Ok(TypedTerm::App {
                    symbol: x.clone(),
                    args: vec![],
                    sort: fs.result.clone(),
                }),
                Some(fs) => Err(LangError::ArityMismatch {
                    symbol: x.clone(),
                    expected: fs.args.len(),
                    found: 0,
                    span: t.span,
                }),
                None => Err(LangError::UnboundVariable { name: x.clone(), span: t.span }),
            }
        }
        TermKind::App(f, args) => {
            let fs = sig
                .functions
                .get(f)
                .ok_or_else(|| LangError::UnknownSymbol { name: f.clone(), span: t.span })?;
            let args = check_args(f, &fs.args, args, sig, ctx, t.span)?;
            Ok(TypedTerm::App {
                symbol: f.clone(),
                args,
                sort: fs.result.clone(),
            })
        }
    }
}

fn check_args(
    symbol: &str,
    expected: &[String],
    args: &[Term],
    sig: &Signature,
    ctx: &Context,
    span: Span,
) -> Result<Vec<TypedTerm>, LangError> {
    if expected.len() != args.len() {
        return Err(LangError::ArityMismatch {
            symbol: symbol.into(),
            expected: expected.len(),
            found: args.len(),
            span,
        });
    }
    args.iter()
        .zip(expected)
        .map(|(a, want)| {
            let typed = typecheck_term(a, sig, ctx)?;
            if typed.sort() != want {
                return Err(LangError::SortMismatch {
                    expected: want.clone(),
                    found: typed.sort().to_string(),
                    span: a.span,
                });
            }
            Ok(typed)
        })
        .collect()
}

/// Sort-checks a formula in `ctx`, resolving variables to context positions.
pub fn typecheck(f: &Formula, sig: &Signature, ctx: &Context) -> Result<TypedFormula, LangError> {
    let boxed = |g: &Formula, ctx: &Context| typecheck(g, sig, ctx).map(Box::new);
    Ok(match &f.kind {
        FormulaKind::True => TypedFormula::True,
        FormulaKind::False => TypedFormula::False,
        FormulaKind::Rel(r, args) => {
            let expected = sig
                .relations
                .get(r)
                .ok_or_else(|| LangError::UnknownSymbol { name: r.clone(), span: f.span })?;
            TypedFormula::Rel {
                symbol: r.clone(),
                args: check_args(r, expected, args, sig, ctx, f.span)?,
            }
        }
        FormulaKind::Eq(a, b) => {
            let (ta, tb) = (typecheck_term(a, sig, ctx)?, typecheck_term(b, sig, ctx)?);
            if ta.sort() != tb.sort() {
                return Err(LangError::SortMismatch {
                    expected: ta.sort().to_string(),
                    found: tb.sort().to_string(),
                    span: b.span,
                });
            }
            TypedFormula::Eq(ta, tb)
        }
        FormulaKind::Not(g) => TypedFormula::Not(boxed(g, ctx)?),
        FormulaKind::And(a, b) => TypedFormula::And(boxed(a, ctx)?, boxed(b, ctx)?),
        FormulaKind::Or(a, b) => TypedFormula::Or(boxed(a, ctx)?, boxed(b, ctx)?),
        FormulaKind::Implies(a, b) => TypedFormula::Implies(boxed(a, ctx)?, boxed(b, ctx)?),
        FormulaKind::Exists(x, s, body) | FormulaKind::Forall(x, s, body) => {
            if !sig.has_sort(s) {
                return Err(LangError::UnknownSort { name: s.clone(), span: f.span });
            }
            let body = boxed(body, &ctx.extended(x, s))?;
            let (var, sort) = (x.clone(), s.clone());
            if matches!(f.kind, FormulaKind::Exists(..)) {
                TypedFormula::Exists { var, sort, body }
            } else {
                TypedFormula::Forall { var, sort, body }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, parse_term};

    fn sig() -> Signature {
        let mut s = Signature::new();
        s.add_sort("A").unwrap();
        s.add_sort("B").unwrap();
        s.add_function("f", &["A"], "B").unwrap();
        s.add_function("c", &[], "A").unwrap();
        s.add_relation("P", &["A"]).unwrap();
        s
    }

    #[test]
    fn application_has_result_sort() {
        let t = parse_term("f(x)").unwrap();
        let ctx = Context::from_pairs(&[("x", "A")]);
        assert_eq!(typecheck_term(&t, &sig(), &ctx).unwrap().sort(), "B");
    }

    #[test]
    fn argument_sort_mismatch() {
        let t = parse_term("f(x)").unwrap();
        let ctx = Context::from_pairs(&[("x", "B")]);
        assert_eq!(
            typecheck_term(&t, &sig(), &ctx),
            Err(LangError::SortMismatch {
                expected: "A".into(),
                found: "B".into(),
                span: Span::new(2, 3)
            })
        );
    }

    #[test]
    fn equality_sort_mismatch() {
        let f = parse("x = y").unwrap();
        let ctx = Context::from_pairs(&[("x", "A"), ("y", "B")]);
        assert!(matches!(
            typecheck(&f, &sig(), &ctx),
            Err(LangError::SortMismatch { span: Span { start: 4, end: 5 }, .. })
        ));
    }

    #[test]
    fn unbound_and_arity() {
        let f = parse("P(z)").unwrap();
        assert_eq!(
            typecheck(&f, &sig(), &Context::new()),
            Err(LangError::UnboundVariable { name: "z".into(), span: Span::new(2, 3) })
        );
        let f = parse("exists x:A. P(x, x)").unwrap();
        assert!(matches!(
            typecheck(&f, &sig(), &Context::new()),
            Err(LangError::ArityMismatch { expected: 1, found: 2, span: Span { start: 12, end: 19 }, .. })
        ));
        let f = parse("exists x:Q. true").unwrap();
        assert!(matches!(typecheck(&f, &sig(), &Context::new()), Err(LangError::UnknownSort { .. })));
        let f = parse("exists x:A. R(x)").unwrap();
        assert!(matches!(typecheck(&f, &sig(), &Context::new()), Err(LangError::UnknownSymbol { .. })));
    }

    #[test]
    fn constants_resolve_and_variables_shadow() {
        let f = parse("exists x:A. f(x) = f(c)").unwrap();
        assert!(typecheck(&f, &sig(), &Context::new()).is_ok());
        let f = parse("exists x:B. exists x:A. P(x)").unwrap();
        let t = typecheck(&f, &sig(), &Context::new()).unwrap();
        let TypedFormula::Exists { body, .. } = t else { panic!() };
        let TypedFormula::Exists { body, .. } = *body else { panic!() };
        assert_eq!(
            *body,
            TypedFormula::Rel {
                symbol: "P".into(),
                args: vec![TypedTerm::Var { index: 1, sort: "A".into() }]
            }
        );
    }

    #[test]
    fn duplicate_declarations() {
        let mut s = sig();
        assert!(s.add_sort("A").is_err());
        assert!(s.add_function("f", &["A"], "A").is_err());
        assert!(s.add_relation("P", &["B"]).is_err());
        assert!(s.add_relation("Q", &["Z"]).is_err());
    }
}
