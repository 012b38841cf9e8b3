mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use topos_core::forcing::{holds_globally, Forcer, Stage};
use topos_core::gallery::{all_builtins, builtin, BUILTINS};
use topos_core::lang::{
    context_object, interpret_formula, interpret_term, parse_term, random_formula, typecheck,
    typecheck_term, Context, SemanticEnvironment, Term,
};
use topos_core::logic::pullback_sub;
use topos_core::presheaf::{global_elements, pairing, NatTrans};

use common::{agreement, context_sizes, decode, stage};

fn env_at(i: usize) -> SemanticEnvironment {
    builtin(BUILTINS[i % BUILTINS.len()].0).unwrap()
}

fn random_context<R: Rng>(env: &SemanticEnvironment, len: usize, rng: &mut R) -> Context {
    let sorts = env.signature().sorts();
    let mut ctx = Context::new();
    for i in 0..len {
        ctx = ctx.extended(&format!("v{i}"), sorts.choose(rng).unwrap());
    }
    ctx
}

/// Terms of depth at most one with a given sort in `ctx`.
fn terms_of_sort(env: &SemanticEnvironment, ctx: &Context, sort: &str) -> Vec<Term> {
    let mut candidates: Vec<String> = ctx.vars().iter().map(|(v, _)| v.clone()).collect();
    let sig = env.signature();
    for (name, fs) in sig.functions() {
        if fs.args.is_empty() {
            candidates.push(name.clone());
        }
    }
    let base = candidates.clone();
    for (name, fs) in sig.functions() {
        if fs.args.len() == 1 {
            for b in &base {
                candidates.push(format!("{name}({b})"));
            }
        }
    }
    candidates
        .iter()
        .filter_map(|text| {
            let t = parse_term(text).ok()?;
            let typed = typecheck_term(&t, sig, ctx).ok()?;
            (typed.sort() == sort).then_some(t)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn forcing_agrees_with_subobjects(seed in any::<u64>(), which in 0usize..6, len in 0usize..3) {
        let env = env_at(which);
        let mut rng = StdRng::seed_from_u64(seed);
        let ctx = random_context(&env, len, &mut rng);
        let f = random_formula(env.signature(), &ctx, 3, &mut rng);
        let typed = typecheck(&f, env.signature(), &ctx).unwrap();
        prop_assert_eq!(agreement(&env, &ctx, &typed), Ok(()), "{}", f);
        if ctx.is_empty() {
            let top = interpret_formula(&env, &ctx, &typed).unwrap().is_top();
            prop_assert_eq!(holds_globally(&typed, &env).unwrap(), top);
        }
    }

    #[test]
    fn forcing_is_monotone(seed in any::<u64>(), which in 0usize..6, len in 0usize..3) {
        let env = env_at(which);
        let mut rng = StdRng::seed_from_u64(seed);
        let ctx = random_context(&env, len, &mut rng);
        let f = random_formula(env.signature(), &ctx, 3, &mut rng);
        let typed = typecheck(&f, env.signature(), &ctx).unwrap();
        let site = env.site().clone();
        let forcer = Forcer::new(&env);
        for c in site.objects() {
            let sizes = context_sizes(&env, &ctx, c);
            for e in 0..sizes.iter().product() {
                let coords = decode(&sizes, e);
                if !forcer.forces(&stage(&ctx, c, &coords), &typed).unwrap() {
                    continue;
                }
                for &m in site.morphisms_into(c) {
                    let d = site.src(m);
                    let restricted: Vec<usize> = ctx
                        .sorts()
                        .iter()
                        .zip(&coords)
                        .map(|(s, &x)| env.sort(s).unwrap().act(m, x))
                        .collect();
                    let down: Stage = stage(&ctx, d, &restricted);
                    prop_assert!(forcer.forces(&down, &typed).unwrap(), "{} along {}", f, site.morphism_name(m));
                }
            }
        }
    }

    #[test]
    fn substitution_lemma(seed in any::<u64>(), which in 0usize..6, len in 0usize..2) {
        let env = env_at(which);
        let mut rng = StdRng::seed_from_u64(seed);
        let gamma = random_context(&env, len, &mut rng);
        let sort = env.signature().sorts().choose(&mut rng).unwrap().clone();
        let terms = terms_of_sort(&env, &gamma, &sort);
        prop_assume!(!terms.is_empty());
        let t = terms.choose(&mut rng).unwrap().clone();
        let extended = gamma.extended("x", &sort);
        let phi = random_formula(env.signature(), &extended, 2, &mut rng);
        let typed_phi = typecheck(&phi, env.signature(), &extended).unwrap();
        let substituted = typecheck(&phi.substitute("x", &t), env.signature(), &gamma).unwrap();
        let lhs = interpret_formula(&env, &gamma, &substituted).unwrap();
        let tt = interpret_term(&env, &gamma, &typecheck_term(&t, env.signature(), &gamma).unwrap()).unwrap();
        let section = if gamma.is_empty() {
            tt
        } else {
            let id = NatTrans::identity(&context_object(&env, &gamma).unwrap().object);
            pairing(&id, &tt).unwrap()
        };
        let rhs = pullback_sub(&section, &interpret_formula(&env, &extended, &typed_phi).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs, "{} with x := {:?}", phi, t);
    }

    #[test]
    fn weakening(seed in any::<u64>(), which in 0usize..6, len in 0usize..2) {
        let env = env_at(which);
        let mut rng = StdRng::seed_from_u64(seed);
        let gamma = random_context(&env, len, &mut rng);
        let sort = env.signature().sorts().choose(&mut rng).unwrap().clone();
        let phi = random_formula(env.signature(), &gamma, 3, &mut rng);
        let extended = gamma.extended("fresh", &sort);
        let small = interpret_formula(&env, &gamma, &typecheck(&phi, env.signature(), &gamma).unwrap()).unwrap();
        let big = interpret_formula(&env, &extended, &typecheck(&phi, env.signature(), &extended).unwrap()).unwrap();
        let drop = context_object(&env, &extended).unwrap().drop_last.unwrap();
        prop_assert_eq!(big, pullback_sub(&drop, &small).unwrap());
    }
}

#[test]
fn existence_without_names() {
    let env = builtin("crown_double_cover").unwrap();
    let f = env.formula("exists x:F2. true", &Context::new()).unwrap();
    assert!(holds_globally(&f, &env).unwrap());
    assert!(global_elements(env.sort("F2").unwrap()).is_empty());
}

#[test]
fn every_gallery_closed_formula_of_depth_one_agrees() {
    use topos_core::lang::{exhaustive_corpus, CorpusLimits};
    for spec in all_builtins() {
        let corpus = exhaustive_corpus(spec.env.signature(), &Context::new(), 1, CorpusLimits::default());
        for f in corpus {
            let typed = typecheck(&f, spec.env.signature(), &Context::new()).unwrap();
            assert_eq!(agreement(&spec.env, &Context::new(), &typed), Ok(()), "{}: {f}", spec.name);
        }
    }
}
