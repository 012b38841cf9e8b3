//! Built-in semantic environments.
//!
//! | name | site | sorts |
//! |------|------|-------|
//! | `set01` | terminal | `A = B = {0,1}`, `f = id`, `g = const 0` |
//! | `sierpinski` | sierpinski | representable `Y`, `Omega` |
//! | `crown_double_cover` | crown | twisted double cover `F2` |
//! | `crown_triple_cover` | crown | twisted triple cover `F3` |
//! | `crown_plus_one` | crown | `F2` and `F2p1 = F2 + 1` |
//! | `crown_constant2` | crown | constant `C2 = {0,1}` and `F2` |

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{SemanticEnvironment, Signature};
use crate::logic::{char_map, omega, sub_from_char, truth, Subobject};
use crate::presheaf::{constant, coproduct, representable, terminal, NatTrans, Presheaf};
use crate::site::{crown, sierpinski, terminal_category, FinCat};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GalleryError {
    #[error("unknown builtin environment {0}")]
    UnknownBuiltin(String),
}

/// A named environment with its documentation.
#[derive(Clone, Debug)]
pub struct EnvironmentSpec {
    pub name: &'static str,
    pub doc: &'static str,
    pub env: SemanticEnvironment,
}

pub const BUILTINS: &[(&str, &str)] = &[
    ("set01", "terminal site; A = B = {0,1}; f = id, g = constant 0; constant c = 0; P = {0}"),
    ("sierpinski", "arrow site bot -> top; Y = Hom(-, top); Omega; S(Y), T(Omega); chi classifies S"),
    ("crown_double_cover", "crown site; F2 the twisted double cover; flip swaps sheets; Z = {0} at W1"),
    ("crown_triple_cover", "crown site; F3 the 3-sheeted cover twisted by a 3-cycle; rot; Z3 = {0} at W1"),
    ("crown_plus_one", "crown site; F2 and F2p1 = F2 + 1; inl: F2 -> F2p1; constant pt = the added point"),
    ("crown_constant2", "crown site; constant C2 = {0,1} and F2; k: F2 -> C2 constant 0; constants a, b; Z = {0}"),
];

/// The `n`-sheeted cover over the crown site.
///
/// Sheets are labelled `u_i`, `v_j` over the arcs and `0..n` over the
/// overlaps. Every restriction is the identity on sheet indices except
/// `V → W2`, which is `j ↦ j+1 mod n` when `twisted`.
///
/// # Panics
/// If `site` lacks the crown's objects or morphisms.
pub fn cover(site: &Arc<FinCat>, n: usize, twisted: bool) -> Presheaf {
    let mut sets = vec![Vec::new(); site.object_count()];
    for (obj, prefix) in [("U", "u"), ("V", "v"), ("W1", ""), ("W2", "")] {
        let c = site.object(obj).expect("crown object");
        sets[c.0] = (0..n).map(|i| format!("{prefix}{i}")).collect();
    }
    let mut actions: Vec<Vec<usize>> = site.morphisms().map(|_| (0..n).collect()).collect();
    if twisted {
        let m = site.morphism("w2V").expect("crown morphism");
        actions[m.0] = (0..n).map(|j| (j + 1) % n).collect();
    }
    Presheaf::new(site.clone(), sets, actions).expect("cover is functorial")
}

/// The environment named `name`.
pub fn builtin(name: &str) -> Result<SemanticEnvironment, GalleryError> {
    let env = match name {
        "set01" => set01(),
        "sierpinski" => sierpinski_env(),
        "crown_double_cover" => double_cover(),
        "crown_triple_cover" => triple_cover(),
        "crown_plus_one" => plus_one(),
        "crown_constant2" => constant2(),
        _ => return Err(GalleryError::UnknownBuiltin(name.to_string())),
    };
    Ok(env)
}

/// Every builtin with its documentation, in listing order.
pub fn all_builtins() -> Vec<EnvironmentSpec> {
    BUILTINS
        .iter()
        .map(|&(name, doc)| EnvironmentSpec {
            name,
            doc,
            env: builtin(name).expect("listed builtin"),
        })
        .collect()
}

struct Builder {
    site: Arc<FinCat>,
    sig: Signature,
    sorts: BTreeMap<String, Presheaf>,
    functions: BTreeMap<String, NatTrans>,
    relations: BTreeMap<String, Subobject>,
}

impl Builder {
    fn new(site: FinCat) -> Builder {
        Builder {
            site: Arc::new(site),
            sig: Signature::new(),
            sorts: BTreeMap::new(),
            functions: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    fn sort(&mut self, name: &str, p: Presheaf) -> &mut Self {
        self.sig.add_sort(name).expect("fresh sort");
        self.sorts.insert(name.into(), p);
        self
    }

    fn function(&mut self, name: &str, args: &[&str], result: &str, nat: NatTrans) -> &mut Self {
        self.sig.add_function(name, args, result).expect("fresh function");
        self.functions.insert(name.into(), nat);
        self
    }

    /// A unary relation given by element indices per stage.
    fn relation(&mut self, name: &str, sort: &str, members: &[(&str, &[usize])]) -> &mut Self {
        let ambient = self.sorts[sort].clone();
        let mut parts: Vec<Vec<bool>> = self
            .site
            .objects()
            .map(|c| vec![false; ambient.stage_size(c)])
            .collect();
        for (obj, elems) in members {
            let c = self.site.object(obj).expect("known object");
            for &e in *elems {
                parts[c.0][e] = true;
            }
        }
        let sub = Subobject::new(ambient, parts).expect("restriction closed");
        self.relation_sub(name, sort, sub)
    }

    fn relation_sub(&mut self, name: &str, sort: &str, sub: Subobject) -> &mut Self {
        self.sig.add_relation(name, &[sort]).expect("fresh relation");
        self.relations.insert(name.into(), sub);
        self
    }

    fn one(&self) -> Presheaf {
        terminal(&self.site)
    }

    fn build(&self) -> SemanticEnvironment {
        SemanticEnvironment::new(
            self.site.clone(),
            self.sig.clone(),
            self.sorts.clone(),
            self.functions.clone(),
            self.relations.clone(),
        )
        .expect("builtin environment is well formed")
    }
}

/// Same table at every stage.
fn uniform(p: &Presheaf, q: &Presheaf, table: impl Fn(usize) -> usize) -> NatTrans {
    let components = p
        .site()
        .objects()
        .map(|c| (0..p.stage_size(c)).map(&table).collect())
        .collect();
    NatTrans::new(p.clone(), q.clone(), components).expect("natural")
}

fn point(b: &Builder, target: &Presheaf, family: &[usize]) -> NatTrans {
    let one = b.one();
    let components = family.iter().map(|&e| vec![e]).collect();
    NatTrans::new(one, target.clone(), components).expect("compatible family")
}

fn set01() -> SemanticEnvironment {
    let mut b = Builder::new(terminal_category());
    let a = constant(&b.site, &["0", "1"]);
    b.sort("A", a.clone()).sort("B", a.clone());
    let f = uniform(&a, &a, |x| x);
    let g = uniform(&a, &a, |_| 0);
    let c = point(&b, &a, &[0]);
    b.function("f", &["A"], "B", f)
        .function("g", &["A"], "B", g)
        .function("c", &[], "A", c)
        .relation("P", "A", &[("*", &[0])]);
    b.build()
}

fn sierpinski_env() -> SemanticEnvironment {
    let mut b = Builder::new(sierpinski());
    let top = b.site.object("top").expect("top");
    let y = representable(&b.site, top);
    let om = omega(&b.site);
    b.sort("Y", y.clone()).sort("Omega", om.clone());
    b.relation("S", "Y", &[("bot", &[0])]);
    let chi = char_map(&b.relations["S"]);
    let t = sub_from_char(&NatTrans::identity(&om)).expect("identity classifies truth");
    let tt = truth(&b.site);
    b.relation_sub("T", "Omega", t)
        .function("chi", &["Y"], "Omega", chi)
        .function("tt", &[], "Omega", tt);
    b.build()
}

fn flip(p: &Presheaf, n: usize) -> NatTrans {
    uniform(p, p, |x| (x + 1) % n)
}

fn double_cover() -> SemanticEnvironment {
    let mut b = Builder::new(crown());
    let f2 = cover(&b.site, 2, true);
    b.sort("F2", f2.clone())
        .function("flip", &["F2"], "F2", flip(&f2, 2))
        .relation("Z", "F2", &[("W1", &[0])]);
    b.build()
}

fn triple_cover() -> SemanticEnvironment {
    let mut b = Builder::new(crown());
    let f3 = cover(&b.site, 3, true);
    b.sort("F3", f3.clone())
        .function("rot", &["F3"], "F3", flip(&f3, 3))
        .relation("Z3", "F3", &[("W1", &[0])]);
    b.build()
}

fn plus_one() -> SemanticEnvironment {
    let mut b = Builder::new(crown());
    let f2 = cover(&b.site, 2, true);
    let (sum, inl, inr) = coproduct(&f2, &b.one()).expect("same site");
    let pt = inr;
    b.sort("F2", f2)
        .sort("F2p1", sum)
        .function("inl", &["F2"], "F2p1", inl)
        .function("pt", &[], "F2p1", pt);
    b.build()
}

fn constant2() -> SemanticEnvironment {
    let mut b = Builder::new(crown());
    let c2 = constant(&b.site, &["0", "1"]);
    let f2 = cover(&b.site, 2, true);
    let k = uniform(&f2, &c2, |_| 0);
    let a = point(&b, &c2, &[0; 4]);
    let bb = point(&b, &c2, &[1; 4]);
    let zero: &[usize] = &[0];
    b.sort("C2", c2)
        .sort("F2", f2)
        .function("k", &["F2"], "C2", k)
        .function("a", &[], "C2", a)
        .function("b", &[], "C2", bb)
        .relation("Z", "C2", &[("U", zero), ("V", zero), ("W1", zero), ("W2", zero)]);
    b.build()
}
