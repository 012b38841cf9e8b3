//! Formula generators over a signature, used by the cross-semantics tests.
//!
//! Atoms in a context are `true`, `false`, relation symbols applied to
//! variables and constants, and equations between distinct terms of depth at
//! most one (variables, constants, and function symbols applied to those).
//! A formula of depth `d` applies one connective or quantifier to formulas of
//! depth `< d`. Bound variables are named `x0, x1, …` after the context length.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::syntax::{Formula, FormulaKind, Term};
use super::typeck::{Context, Signature};

#[derive(Clone, Copy, Debug)]
pub struct CorpusLimits {
    /// Stop once this many formulas have been produced.
    pub max_formulas: usize,
}

impl Default for CorpusLimits {
    fn default() -> Self {
        CorpusLimits { max_formulas: 200_000 }
    }
}

fn base_terms(sig: &Signature, ctx: &Context, sort: &str) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (x, s) in ctx.vars().iter().rev() {
        if seen.insert(x.clone()) && s == sort {
            out.push(Term::var(x));
        }
    }
    out.reverse();
    for (name, fs) in sig.functions() {
        if fs.args.is_empty() && fs.result == sort && ctx.lookup(name).is_none() {
            out.push(Term::var(name));
        }
    }
    out
}

fn tuples(sorts: &[String], terms: impl Fn(&str) -> Vec<Term>) -> Vec<Vec<Term>> {
    let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
    for s in sorts {
        let choices = terms(s);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    acc
}

fn depth_one_terms(sig: &Signature, ctx: &Context, sort: &str) -> Vec<Term> {
    let mut out = base_terms(sig, ctx, sort);
    for (name, fs) in sig.functions() {
        if fs.args.is_empty() || fs.result != sort {
            continue;
        }
        for args in tuples(&fs.args, |s| base_terms(sig, ctx, s)) {
            out.push(Term::app(name, args));
        }
    }
    out
}

fn atoms(sig: &Signature, ctx: &Context) -> Vec<Formula> {
    let mut out = vec![Formula::new(FormulaKind::True), Formula::new(FormulaKind::False)];
    for (r, args) in sig.relations() {
        for tuple in tuples(args, |s| base_terms(sig, ctx, s)) {
            out.push(Formula::new(FormulaKind::Rel(r.clone(), tuple)));
        }
    }
    for sort in sig.sorts() {
        let terms = depth_one_terms(sig, ctx, sort);
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                out.push(Formula::new(FormulaKind::Eq(terms[i].clone(), terms[j].clone())));
            }
        }
    }
    out
}

/// Every formula of depth at most `depth` in `ctx`, truncated at `limits.max_formulas`.
pub fn exhaustive_corpus(sig: &Signature, ctx: &Context, depth: usize, limits: CorpusLimits) -> Vec<Formula> {
    let mut out = layer(sig, ctx, depth, limits.max_formulas);
    out.truncate(limits.max_formulas);
    out
}

fn layer(sig: &Signature, ctx: &Context, depth: usize, cap: usize) -> Vec<Formula> {
    let mut out = atoms(sig, ctx);
    if depth == 0 {
        return out;
    }
    let below = layer(sig, ctx, depth - 1, cap);
    for f in &below {
        out.push(Formula::not(f.clone()));
    }
    'binary: for a in &below {
        for b in &below {
            if out.len() >= cap {
                break 'binary;
            }
            out.push(Formula::and(a.clone(), b.clone()));
            out.push(Formula::or(a.clone(), b.clone()));
            out.push(Formula::implies(a.clone(), b.clone()));
        }
    }
    let var = format!("x{}", ctx.len());
    for sort in sig.sorts() {
        let inner = layer(sig, &ctx.extended(&var, sort), depth - 1, cap);
        for body in inner {
            if out.len() >= cap {
                return out;
            }
            out.push(Formula::exists(&var, sort, body.clone()));
            out.push(Formula::forall(&var, sort, body));
        }
    }
    out
}

/// A random formula of depth at most `depth` in `ctx`.
pub fn random_formula<R: Rng + ?Sized>(sig: &Signature, ctx: &Context, depth: usize, rng: &mut R) -> Formula {
    if depth == 0 || rng.random_ratio(1, 5) {
        return atoms(sig, ctx).choose(rng).expect("true and false are atoms").clone();
    }
    let d = depth - 1;
    match rng.random_range(0..6) {
        0 => Formula::not(random_formula(sig, ctx, d, rng)),
        1 => Formula::and(random_formula(sig, ctx, d, rng), random_formula(sig, ctx, d, rng)),
        2 => Formula::or(random_formula(sig, ctx, d, rng), random_formula(sig, ctx, d, rng)),
        3 => Formula::implies(random_formula(sig, ctx, d, rng), random_formula(sig, ctx, d, rng)),
        k => {
            let Some(sort) = sig.sorts().choose(rng) else {
                return Formula::new(FormulaKind::True);
            };
            let var = format!("x{}", ctx.len());
            let body = random_formula(sig, &ctx.extended(&var, sort), d, rng);
            if k == 4 {
                Formula::exists(&var, sort, body)
            } else {
                Formula::forall(&var, sort, body)
            }
        }
    }
}
