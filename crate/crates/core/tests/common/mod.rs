#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use topos_core::forcing::{Binding, Forcer, Stage};
use topos_core::lang::{interpret_formula, Context, SemanticEnvironment, TypedFormula};
use topos_core::logic::Subobject;
use topos_core::presheaf::Presheaf;
use topos_core::site::{crown, sierpinski, terminal_category, FinCat, ObjId};

pub fn sites() -> Vec<Arc<FinCat>> {
    vec![
        Arc::new(terminal_category()),
        Arc::new(sierpinski()),
        Arc::new(crown()),
    ]
}

/// Splits an index of the left-nested product of stages into coordinates.
pub fn decode(sizes: &[usize], mut e: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (1..sizes.len()).rev() {
        out[k] = e % sizes[k];
        e /= sizes[k];
    }
    if !sizes.is_empty() {
        out[0] = e;
    }
    out
}

pub fn stage(ctx: &Context, c: ObjId, coords: &[usize]) -> Stage {
    Stage {
        object: c,
        bindings: ctx
            .vars()
            .iter()
            .zip(coords)
            .map(|((v, s), &e)| Binding {
                var: v.clone(),
                sort: s.clone(),
                element: e,
            })
            .collect(),
    }
}

pub fn context_sizes(env: &SemanticEnvironment, ctx: &Context, c: ObjId) -> Vec<usize> {
    ctx.sorts()
        .iter()
        .map(|s| env.sort(s).unwrap().stage_size(c))
        .collect()
}

/// Compares forcing with subobject membership at every stage and every
/// element of the context object.
pub fn agreement(env: &SemanticEnvironment, ctx: &Context, f: &TypedFormula) -> Result<(), String> {
    let sub = interpret_formula(env, ctx, f).map_err(|e| e.to_string())?;
    let forcer = Forcer::new(env);
    for c in env.site().objects() {
        let sizes = context_sizes(env, ctx, c);
        let total: usize = sizes.iter().product();
        if sub.ambient().stage_size(c) != total {
            return Err(format!("context object has the wrong size at {c:?}"));
        }
        for e in 0..total {
            let coords = decode(&sizes, e);
            let forced = forcer
                .forces(&stage(ctx, c, &coords), f)
                .map_err(|e| e.to_string())?;
            if forced != sub.contains(c, e) {
                return Err(format!(
                    "disagreement at {} with {coords:?}: forcing {forced}",
                    env.site().object_name(c)
                ));
            }
        }
    }
    Ok(())
}

/// Largest subobject inside a random mask.
pub fn random_sub<R: Rng>(a: &Presheaf, rng: &mut R) -> Subobject {
    let site = a.site();
    let mut parts: Vec<Vec<bool>> = site
        .objects()
        .map(|c| (0..a.stage_size(c)).map(|_| rng.random_bool(0.6)).collect())
        .collect();
    loop {
        let mut changed = false;
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            for x in 0..a.stage_size(d) {
                if parts[d.0][x] && !parts[c.0][a.act(f, x)] {
                    parts[d.0][x] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Subobject::new(a.clone(), parts).expect("closed by construction")
}

/// Every bijection per stage, tried as a natural isomorphism.
pub fn brute_force_isomorphic(a: &Presheaf, b: &Presheaf) -> bool {
    if a.stage_sizes() != b.stage_sizes() {
        return false;
    }
    let site = a.site();
    let perms: Vec<Vec<Vec<usize>>> = a.stage_sizes().iter().map(|&n| permutations(n)).collect();
    let mut choice = vec![0; perms.len()];
    loop {
        let natural = site.morphisms().all(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            let (pc, pd) = (&perms[c.0][choice[c.0]], &perms[d.0][choice[d.0]]);
            (0..a.stage_size(d)).all(|x| b.act(f, pd[x]) == pc[a.act(f, x)])
        });
        if natural {
            return true;
        }
        let mut k = choice.len();
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < perms[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}
