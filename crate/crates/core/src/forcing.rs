//! Kripke–Joyal forcing over a presheaf topos.
//!
//! A [`Stage`] is an object of the site together with elements of the
//! variables' sorts at that object. Clauses for the trivial topology:
//!
//! - `c ⊩ φ ∧ ψ`, `c ⊩ φ ∨ ψ`: stagewise.
//! - `c ⊩ φ ⇒ ψ`: for every `f: d → c`, `d ⊩ φ·f` implies `d ⊩ ψ·f`.
//! - `c ⊩ ∃x:A. φ`: some `a ∈ A(c)` with `c ⊩ φ[a/x]`.
//! - `c ⊩ ∀x:A. φ`: for every `f: d → c` and `a ∈ A(d)`, `d ⊩ φ·f[a/x]`.
//!
//! Under a Grothendieck topology `∃` and `∨` would only need witnesses on a cover.
//! This evaluator reads symbol interpretations element by element and never
//! builds product objects or subobjects, so it is independent of [`crate::lang::interpret_formula`].

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::lang::{Context, LangError, SemanticEnvironment, TypedFormula, TypedTerm};
use crate::site::{MorId, ObjId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ForcingError {
    #[error("variable #{0} is not bound at this stage")]
    UnboundVariable(usize),
    #[error("binding {var} has sort {found} where {expected} is required")]
    SortMismatch {
        var: String,
        expected: String,
        found: String,
    },
    #[error("element {element} is not in the stage of {sort} at {object}")]
    ElementOutOfRange {
        sort: String,
        object: String,
        element: usize,
    },
    #[error(transparent)]
    Lang(#[from] LangError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub var: String,
    pub sort: String,
    pub element: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub object: ObjId,
    pub bindings: Vec<Binding>,
}

impl Stage {
    pub fn closed(object: ObjId) -> Stage {
        Stage {
            object,
            bindings: Vec::new(),
        }
    }

    pub fn context(&self) -> Context {
        let pairs: Vec<(&str, &str)> = self
            .bindings
            .iter()
            .map(|b| (b.var.as_str(), b.sort.as_str()))
            .collect();
        Context::from_pairs(&pairs)
    }
}

type MemoKey = (usize, ObjId, Vec<usize>);

/// Memoizing forcing evaluator for one environment.
pub struct Forcer<'e> {
    env: &'e SemanticEnvironment,
    memo: RefCell<HashMap<MemoKey, bool>>,
    trace: Option<RefCell<Vec<String>>>,
}

impl<'e> Forcer<'e> {
    pub fn new(env: &'e SemanticEnvironment) -> Forcer<'e> {
        Forcer {
            env,
            memo: RefCell::new(HashMap::new()),
            trace: None,
        }
    }

    /// An evaluator that records each clause it applies; memoization is off.
    pub fn with_trace(env: &'e SemanticEnvironment) -> Forcer<'e> {
        Forcer {
            env,
            memo: RefCell::new(HashMap::new()),
            trace: Some(RefCell::new(Vec::new())),
        }
    }

    pub fn take_trace(&self) -> Vec<String> {
        self.trace
            .as_ref()
            .map(|t| std::mem::take(&mut *t.borrow_mut()))
            .unwrap_or_default()
    }

    /// Whether `stage ⊩ φ`, where `φ` was typechecked in `stage.context()`.
    pub fn forces(&self, stage: &Stage, f: &TypedFormula) -> Result<bool, ForcingError> {
        // memo keys are node addresses, valid only for the formula at hand
        self.memo.borrow_mut().clear();
        self.forces_in(stage, f)
    }

    fn forces_in(&self, stage: &Stage, f: &TypedFormula) -> Result<bool, ForcingError> {
        for b in &stage.bindings {
            let p = self.env.sort(&b.sort)?;
            if b.element >= p.stage_size(stage.object) {
                return Err(ForcingError::ElementOutOfRange {
                    sort: b.sort.clone(),
                    object: self.env.site().object_name(stage.object).to_string(),
                    element: b.element,
                });
            }
        }
        let sorts: Vec<&str> = stage.bindings.iter().map(|b| b.sort.as_str()).collect();
        self.check_vars(f, &sorts, &stage.bindings)?;
        let mut elems: Vec<usize> = stage.bindings.iter().map(|b| b.element).collect();
        let mut sorts: Vec<String> = sorts.into_iter().map(String::from).collect();
        self.eval(stage.object, f, &mut sorts, &mut elems, 0)
    }

    fn check_vars(&self, f: &TypedFormula, sorts: &[&str], bindings: &[Binding]) -> Result<(), ForcingError> {
        let check_term = |t: &TypedTerm| check_term_vars(t, sorts, bindings);
        match f {
            TypedFormula::True | TypedFormula::False => Ok(()),
            TypedFormula::Rel { args, .. } => args.iter().try_for_each(check_term),
            TypedFormula::Eq(a, b) => {
                check_term(a)?;
                check_term(b)
            }
            TypedFormula::Not(g) => self.check_vars(g, sorts, bindings),
            TypedFormula::And(a, b) | TypedFormula::Or(a, b) | TypedFormula::Implies(a, b) => {
                self.check_vars(a, sorts, bindings)?;
                self.check_vars(b, sorts, bindings)
            }
            TypedFormula::Exists { var, sort, body } | TypedFormula::Forall { var, sort, body } => {
                let mut s = sorts.to_vec();
                s.push(sort);
                let mut b = bindings.to_vec();
                b.push(Binding {
                    var: var.clone(),
                    sort: sort.clone(),
                    element: 0,
                });
                self.check_vars(body, &s, &b)
            }
        }
    }

    fn log(&self, depth: usize, line: impl FnOnce() -> String) {
        if let Some(t) = &self.trace {
            t.borrow_mut().push(format!("{}{}", "  ".repeat(depth), line()));
        }
    }

    fn restrict(&self, f: MorId, sorts: &[String], elems: &[usize]) -> Result<Vec<usize>, ForcingError> {
        sorts
            .iter()
            .zip(elems)
            .map(|(s, &e)| Ok(self.env.sort(s)?.act(f, e)))
            .collect()
    }

    fn term(&self, c: ObjId, t: &TypedTerm, elems: &[usize]) -> Result<usize, ForcingError> {
        match t {
            TypedTerm::Var { index, .. } => Ok(elems[*index]),
            TypedTerm::App { symbol, args, .. } => {
                let nat = self.env.function(symbol)?;
                let tuple = self.tuple(c, args, elems)?;
                Ok(nat.apply(c, tuple))
            }
        }
    }

    /// Position of an argument tuple in the left-nested product stage.
    fn tuple(&self, c: ObjId, args: &[TypedTerm], elems: &[usize]) -> Result<usize, ForcingError> {
        let mut index = 0;
        for (i, a) in args.iter().enumerate() {
            let e = self.term(c, a, elems)?;
            index = if i == 0 {
                e
            } else {
                index * self.env.sort(a.sort())?.stage_size(c) + e
            };
        }
        Ok(index)
    }

    fn eval(
        &self,
        c: ObjId,
        f: &TypedFormula,
        sorts: &mut Vec<String>,
        elems: &mut Vec<usize>,
        depth: usize,
    ) -> Result<bool, ForcingError> {
        let key = (f as *const TypedFormula as usize, c, elems.clone());
        if self.trace.is_none() {
            if let Some(&v) = self.memo.borrow().get(&key) {
                return Ok(v);
            }
        }
        let site = self.env.site().clone();
        // reserve the clause's line so the derivation reads top-down
        let slot = self.trace.as_ref().map(|t| {
            let mut t = t.borrow_mut();
            t.push(String::new());
            t.len() - 1
        });
        let result = match f {
            TypedFormula::True => true,
            TypedFormula::False => false,
            TypedFormula::Rel { symbol, args } => {
                let r = self.env.relation(symbol)?;
                r.contains(c, self.tuple(c, args, elems)?)
            }
            TypedFormula::Eq(a, b) => self.term(c, a, elems)? == self.term(c, b, elems)?,
            TypedFormula::And(a, b) => {
                self.eval(c, a, sorts, elems, depth + 1)? && self.eval(c, b, sorts, elems, depth + 1)?
            }
            TypedFormula::Or(a, b) => {
                self.eval(c, a, sorts, elems, depth + 1)? || self.eval(c, b, sorts, elems, depth + 1)?
            }
            TypedFormula::Not(_) | TypedFormula::Implies(..) => {
                let (premise, conclusion) = match f {
                    TypedFormula::Not(g) => (&**g, None),
                    TypedFormula::Implies(a, b) => (&**a, Some(&**b)),
                    _ => unreachable!(),
                };
                let mut holds = true;
                for &m in site.morphisms_into(c) {
                    let d = site.src(m);
                    let mut restricted = self.restrict(m, sorts, elems)?;
                    if self.eval(d, premise, sorts, &mut restricted, depth + 1)? {
                        let ok = match conclusion {
                            Some(b) => self.eval(d, b, sorts, &mut restricted, depth + 1)?,
                            None => false,
                        };
                        if !ok {
                            self.log(depth + 1, || format!("refuted along {}", site.morphism_name(m)));
                            holds = false;
                            break;
                        }
                    }
                }
                holds
            }
            TypedFormula::Exists { sort, body, var } => {
                let size = self.env.sort(sort)?.stage_size(c);
                sorts.push(sort.clone());
                let mut found = false;
                for a in 0..size {
                    elems.push(a);
                    let ok = self.eval(c, body, sorts, elems, depth + 1);
                    elems.pop();
                    if ok? {
                        let label = self.env.sort(sort)?.label(c, a).to_string();
                        self.log(depth + 1, || format!("witness {var} = {label}"));
                        found = true;
                        break;
                    }
                }
                sorts.pop();
                found
            }
            TypedFormula::Forall { sort, body, var } => {
                let p = self.env.sort(sort)?.clone();
                let mut holds = true;
                'outer: for &m in site.morphisms_into(c) {
                    let d = site.src(m);
                    let mut restricted = self.restrict(m, sorts, elems)?;
                    sorts.push(sort.clone());
                    for a in 0..p.stage_size(d) {
                        restricted.push(a);
                        let ok = self.eval(d, body, sorts, &mut restricted, depth + 1);
                        restricted.pop();
                        if !ok? {
                            self.log(depth + 1, || {
                                format!(
                                    "counterexample {var} = {} along {}",
                                    p.label(d, a),
                                    site.morphism_name(m)
                                )
                            });
                            holds = false;
                            sorts.pop();
                            break 'outer;
                        }
                    }
                    sorts.pop();
                }
                holds
            }
        };
        if let (Some(i), Some(t)) = (slot, &self.trace) {
            t.borrow_mut()[i] = format!(
                "{}{} ⊩ {} : {result}",
                "  ".repeat(depth),
                site.object_name(c),
                clause_name(f)
            );
        }
        if self.trace.is_none() {
            self.memo.borrow_mut().insert(key, result);
        }
        Ok(result)
    }

    /// True iff every object forces the closed formula `φ`.
    pub fn holds_globally(&self, f: &TypedFormula) -> Result<bool, ForcingError> {
        self.memo.borrow_mut().clear();
        for c in self.env.site().objects() {
            if !self.forces_in(&Stage::closed(c), f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_term_vars(t: &TypedTerm, sorts: &[&str], bindings: &[Binding]) -> Result<(), ForcingError> {
    match t {
        TypedTerm::Var { index, sort } => match sorts.get(*index) {
            None => Err(ForcingError::UnboundVariable(*index)),
            Some(s) if s != sort => Err(ForcingError::SortMismatch {
                var: bindings[*index].var.clone(),
                expected: sort.clone(),
                found: s.to_string(),
            }),
            Some(_) => Ok(()),
        },
        TypedTerm::App { args, .. } => args.iter().try_for_each(|a| check_term_vars(a, sorts, bindings)),
    }
}

fn clause_name(f: &TypedFormula) -> &'static str {
    match f {
        TypedFormula::True => "true",
        TypedFormula::False => "false",
        TypedFormula::Rel { .. } => "relation",
        TypedFormula::Eq(..) => "equality",
        TypedFormula::Not(_) => "not",
        TypedFormula::And(..) => "and",
        TypedFormula::Or(..) => "or",
        TypedFormula::Implies(..) => "=>",
        TypedFormula::Exists { .. } => "exists",
        TypedFormula::Forall { .. } => "forall",
    }
}

/// One-shot `stage ⊩ φ`.
pub fn forces(stage: &Stage, f: &TypedFormula, env: &SemanticEnvironment) -> Result<bool, ForcingError> {
    Forcer::new(env).forces(stage, f)
}

/// One-shot global validity of a closed formula.
pub fn holds_globally(f: &TypedFormula, env: &SemanticEnvironment) -> Result<bool, ForcingError> {
    Forcer::new(env).holds_globally(f)
}
