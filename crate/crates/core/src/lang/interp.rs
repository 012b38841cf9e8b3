//! The interpretation functor: sorts to presheaves, terms to natural
//! transformations, formulas to subobjects of the context object.
//!
//! Contexts and argument tuples are interpreted as left-nested products:
//! `[] ↦ 1`, `[A] ↦ ⟦A⟧`, `[A₁, …, Aₙ] ↦ ⟦A₁, …, Aₙ₋₁⟧ × ⟦Aₙ⟧`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::typeck::{typecheck, Context, Signature, TypedFormula, TypedTerm};
use super::{parse, LangError};
use crate::logic::{exists_along, forall_along, pullback_sub, Subobject};
use crate::presheaf::{self, equalizer_sub, pairing, product, terminal, NatTrans, Presheaf};
use crate::site::FinCat;

/// A site together with interpretations of a signature's symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticEnvironment {
    site: Arc<FinCat>,
    signature: Signature,
    sorts: BTreeMap<String, Presheaf>,
    functions: BTreeMap<String, NatTrans>,
    relations: BTreeMap<String, Subobject>,
}

impl SemanticEnvironment {
    /// Checks that every bound interpretation lives over `site` and matches its
    /// declared arity. Unbound symbols are reported only when used.
    pub fn new(
        site: Arc<FinCat>,
        signature: Signature,
        sorts: BTreeMap<String, Presheaf>,
        functions: BTreeMap<String, NatTrans>,
        relations: BTreeMap<String, Subobject>,
    ) -> Result<SemanticEnvironment, LangError> {
        let env = SemanticEnvironment {
            site,
            signature,
            sorts,
            functions,
            relations,
        };
        for (name, p) in &env.sorts {
            if !env.signature.has_sort(name) {
                return Err(LangError::MissingInterpretation(format!("undeclared sort {name}")));
            }
            if **p.site() != *env.site {
                return Err(mismatch(name, "not over the environment's site"));
            }
        }
        for (name, nat) in &env.functions {
            let fs = env
                .signature
                .functions()
                .get(name)
                .ok_or_else(|| LangError::MissingInterpretation(format!("undeclared function {name}")))?;
            let dom = tuple_object(&env, &fs.args)?;
            let cod = env.sort(&fs.result)?;
            if *nat.src() != dom || nat.tgt() != cod {
                return Err(mismatch(name, "domain or codomain differs from the declared sorts"));
            }
        }
        for (name, sub) in &env.relations {
            let args = env
                .signature
                .relations()
                .get(name)
                .ok_or_else(|| LangError::MissingInterpretation(format!("undeclared relation {name}")))?;
            if *sub.ambient() != tuple_object(&env, args)? {
                return Err(mismatch(name, "ambient differs from the product of argument sorts"));
            }
        }
        Ok(env)
    }

    pub fn site(&self) -> &Arc<FinCat> {
        &self.site
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn sort(&self, name: &str) -> Result<&Presheaf, LangError> {
        self.sorts
            .get(name)
            .ok_or_else(|| LangError::MissingInterpretation(name.to_string()))
    }

    pub fn function(&self, name: &str) -> Result<&NatTrans, LangError> {
        self.functions
            .get(name)
            .ok_or_else(|| LangError::MissingInterpretation(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Result<&Subobject, LangError> {
        self.relations
            .get(name)
            .ok_or_else(|| LangError::MissingInterpretation(name.to_string()))
    }

    pub fn sorts(&self) -> &BTreeMap<String, Presheaf> {
        &self.sorts
    }

    pub fn functions(&self) -> &BTreeMap<String, NatTrans> {
        &self.functions
    }

    pub fn relations(&self) -> &BTreeMap<String, Subobject> {
        &self.relations
    }

    /// Parses and sort-checks `text` in `ctx`.
    pub fn formula(&self, text: &str, ctx: &Context) -> Result<TypedFormula, LangError> {
        typecheck(&parse(text)?, &self.signature, ctx)
    }

    /// Copy of the environment with one sort interpretation replaced.
    pub fn with_sort(&self, name: &str, p: Presheaf) -> Result<SemanticEnvironment, LangError> {
        let mut sorts = self.sorts.clone();
        sorts.insert(name.to_string(), p);
        SemanticEnvironment::new(
            self.site.clone(),
            self.signature.clone(),
            sorts,
            self.functions.clone(),
            self.relations.clone(),
        )
    }

    /// Copy of the environment with one function interpretation replaced.
    pub fn with_function(&self, name: &str, nat: NatTrans) -> Result<SemanticEnvironment, LangError> {
        let mut functions = self.functions.clone();
        functions.insert(name.to_string(), nat);
        SemanticEnvironment::new(
            self.site.clone(),
            self.signature.clone(),
            self.sorts.clone(),
            functions,
            self.relations.clone(),
        )
    }
}

fn mismatch(symbol: &str, detail: &str) -> LangError {
    LangError::InterpretationMismatch {
        symbol: symbol.to_string(),
        detail: detail.to_string(),
    }
}

/// The product object of a context with its per-variable projections and the
/// projection dropping the last variable.
#[derive(Clone, Debug)]
pub struct ContextObject {
    pub object: Presheaf,
    pub projections: Vec<NatTrans>,
    /// `⟦Γ, x:A⟧ → ⟦Γ⟧`; `None` for the empty context.
    pub drop_last: Option<NatTrans>,
}

fn nested(env: &SemanticEnvironment, sorts: &[String]) -> Result<ContextObject, LangError> {
    let Some((last, init)) = sorts.split_last() else {
        return Ok(ContextObject {
            object: terminal(&env.site),
            projections: Vec::new(),
            drop_last: None,
        });
    };
    let a = env.sort(last)?;
    if init.is_empty() {
        return Ok(ContextObject {
            object: a.clone(),
            projections: vec![NatTrans::identity(a)],
            drop_last: Some(NatTrans::to_terminal(a)),
        });
    }
    let prev = nested(env, init)?;
    let (object, p1, p2) = product(&prev.object, a).expect("same site");
    let mut projections: Vec<NatTrans> = prev
        .projections
        .iter()
        .map(|p| presheaf::compose(p, &p1).expect("composable"))
        .collect();
    projections.push(p2);
    Ok(ContextObject {
        object,
        projections,
        drop_last: Some(p1),
    })
}

/// `⟦Γ⟧` with its projections.
pub fn context_object(env: &SemanticEnvironment, ctx: &Context) -> Result<ContextObject, LangError> {
    nested(env, &ctx.sorts())
}

/// The product interpreting an argument tuple.
pub fn tuple_object(env: &SemanticEnvironment, sorts: &[String]) -> Result<Presheaf, LangError> {
    Ok(nested(env, sorts)?.object)
}

/// `⟦t⟧: ⟦Γ⟧ → ⟦sort(t)⟧`.
pub fn interpret_term(env: &SemanticEnvironment, ctx: &Context, t: &TypedTerm) -> Result<NatTrans, LangError> {
    let cobj = context_object(env, ctx)?;
    term_in(env, &cobj, t)
}

fn term_in(env: &SemanticEnvironment, cobj: &ContextObject, t: &TypedTerm) -> Result<NatTrans, LangError> {
    match t {
        TypedTerm::Var { index, .. } => Ok(cobj.projections[*index].clone()),
        TypedTerm::App { symbol, args, .. } => {
            let f = env.function(symbol)?;
            let tuple = tuple_in(env, cobj, args)?;
            Ok(presheaf::compose(f, &tuple).expect("argument tuple matches the symbol's domain"))
        }
    }
}

/// Left-nested pairing of argument interpretations.
fn tuple_in(env: &SemanticEnvironment, cobj: &ContextObject, args: &[TypedTerm]) -> Result<NatTrans, LangError> {
    let Some((last, init)) = args.split_last() else {
        return Ok(NatTrans::to_terminal(&cobj.object));
    };
    let last = term_in(env, cobj, last)?;
    if init.is_empty() {
        return Ok(last);
    }
    let prev = tuple_in(env, cobj, init)?;
    Ok(pairing(&prev, &last).expect("common domain"))
}

/// `⟦φ⟧ ↪ ⟦Γ⟧`.
pub fn interpret_formula(
    env: &SemanticEnvironment,
    ctx: &Context,
    f: &TypedFormula,
) -> Result<Subobject, LangError> {
    let cobj = context_object(env, ctx)?;
    formula_in(env, ctx, &cobj, f)
}

fn formula_in(
    env: &SemanticEnvironment,
    ctx: &Context,
    cobj: &ContextObject,
    f: &TypedFormula,
) -> Result<Subobject, LangError> {
    let ambient = &cobj.object;
    let sub = |g: &TypedFormula| formula_in(env, ctx, cobj, g);
    Ok(match f {
        TypedFormula::True => Subobject::top(ambient),
        TypedFormula::False => Subobject::bottom(ambient),
        TypedFormula::Rel { symbol, args } => {
            let r = env.relation(symbol)?;
            let tuple = tuple_in(env, cobj, args)?;
            pullback_sub(&tuple, r).expect("tuple lands in the relation's ambient")
        }
        TypedFormula::Eq(a, b) => {
            equalizer_sub(&term_in(env, cobj, a)?, &term_in(env, cobj, b)?).expect("parallel maps")
        }
        TypedFormula::Not(g) => sub(g)?.neg(),
        TypedFormula::And(a, b) => sub(a)?.meet(&sub(b)?).expect("same ambient"),
        TypedFormula::Or(a, b) => sub(a)?.join(&sub(b)?).expect("same ambient"),
        TypedFormula::Implies(a, b) => sub(a)?.implies(&sub(b)?).expect("same ambient"),
        TypedFormula::Exists { var, sort, body } | TypedFormula::Forall { var, sort, body } => {
            let inner_ctx = ctx.extended(var, sort);
            let inner = context_object(env, &inner_ctx)?;
            let s = formula_in(env, &inner_ctx, &inner, body)?;
            let proj = inner.drop_last.as_ref().expect("non-empty context");
            if matches!(f, TypedFormula::Exists { .. }) {
                exists_along(proj, &s).expect("typed")
            } else {
                forall_along(proj, &s).expect("typed")
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::builtin;
    use crate::lang::{parse_term, typecheck_term};

    #[test]
    fn variable_is_identity() {
        let env = builtin("set01").unwrap();
        let ctx = Context::from_pairs(&[("x", "A")]);
        let t = typecheck_term(&parse_term("x").unwrap(), env.signature(), &ctx).unwrap();
        let nat = interpret_term(&env, &ctx, &t).unwrap();
        assert_eq!(nat, NatTrans::identity(env.sort("A").unwrap()));
    }

    #[test]
    fn closed_constant_is_a_name() {
        let env = builtin("set01").unwrap();
        let t = typecheck_term(&parse_term("c").unwrap(), env.signature(), &Context::new()).unwrap();
        let nat = interpret_term(&env, &Context::new(), &t).unwrap();
        assert_eq!(*nat.src(), terminal(env.site()));
        assert!(presheaf::global_elements(env.sort("A").unwrap()).contains(&nat));
    }

    #[test]
    fn constant_zero_meaning() {
        let env = builtin("set01").unwrap();
        let ctx = Context::from_pairs(&[("x", "A")]);
        let t = typecheck_term(&parse_term("g(x)").unwrap(), env.signature(), &ctx).unwrap();
        let nat = interpret_term(&env, &ctx, &t).unwrap();
        let c = env.site().objects().next().unwrap();
        assert_eq!(nat.component(c), &[0, 0]);
    }

    #[test]
    fn truth_constants_and_existence() {
        let env = builtin("crown_double_cover").unwrap();
        let ctx = Context::new();
        let t = interpret_formula(&env, &ctx, &TypedFormula::True).unwrap();
        let f = interpret_formula(&env, &ctx, &TypedFormula::False).unwrap();
        assert!(t.is_top() && f.is_bottom());
        let ex = env.formula("exists x:F2. true", &ctx).unwrap();
        let s = interpret_formula(&env, &ctx, &ex).unwrap();
        assert!(s.is_top());
        assert_eq!(*s.ambient(), terminal(env.site()));
    }

    #[test]
    fn distinct_meanings_witnessed() {
        let env = builtin("set01").unwrap();
        let ex = env.formula("exists x:A. not (f(x) = g(x))", &Context::new()).unwrap();
        assert!(interpret_formula(&env, &Context::new(), &ex).unwrap().is_top());
    }

    #[test]
    fn missing_interpretation() {
        let env = builtin("set01").unwrap();
        let mut sig = env.signature().clone();
        sig.add_function("h", &["A"], "A").unwrap();
        let bare = SemanticEnvironment::new(
            env.site().clone(),
            sig,
            env.sorts().clone(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap();
        let f = bare.formula("exists x:A. h(x) = x", &Context::new()).unwrap();
        assert_eq!(
            interpret_formula(&bare, &Context::new(), &f),
            Err(LangError::MissingInterpretation("h".into()))
        );
    }

    #[test]
    fn mismatched_interpretation_rejected() {
        let env = builtin("set01").unwrap();
        let a = env.sort("A").unwrap().clone();
        let one = presheaf::constant(env.site(), &["z"]);
        let bad = NatTrans::new(a, one, vec![vec![0, 0]]).unwrap();
        assert!(matches!(
            env.with_function("f", bad),
            Err(LangError::InterpretationMismatch { .. })
        ));
    }
}
