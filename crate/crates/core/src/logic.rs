//! Subobjects, the subobject classifier and the internal Heyting logic.
//!
//! A subobject is stored canonically as a restriction-closed family of
//! membership masks, one per stage. Quantifiers along a map `α: A → B` are the
//! adjoints to [`pullback_sub`]:
//!
//! ```text
//! exists_along(α, S) ≤ T  ⟺  S ≤ pullback_sub(α, T)
//! pullback_sub(α, T) ≤ S  ⟺  T ≤ forall_along(α, S)
//! ```

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::closure::down_closed_sets;
use crate::presheaf::{NatTrans, Presheaf};
use crate::site::{FinCat, MorId, ObjId, Sieve};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("subobjects live in different ambient presheaves")]
    AmbientMismatch,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("part at {object} is not closed under restriction along {morphism}")]
    NotRestrictionClosed { object: String, morphism: String },
    #[error("part table has the wrong shape at {0}")]
    ShapeMismatch(String),
    #[error("map does not land in the subobject classifier")]
    NotClassifying,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subobject {
    ambient: Presheaf,
    parts: Vec<Vec<bool>>,
}

impl Subobject {
    pub fn new(ambient: Presheaf, parts: Vec<Vec<bool>>) -> Result<Subobject, LogicError> {
        let site = ambient.site().clone();
        if parts.len() != site.object_count() {
            return Err(LogicError::ShapeMismatch("*".into()));
        }
        for c in site.objects() {
            if parts[c.0].len() != ambient.stage_size(c) {
                return Err(LogicError::ShapeMismatch(site.object_name(c).to_string()));
            }
        }
        let s = Subobject { ambient, parts };
        if let Some((c, f)) = s.closure_failure() {
            return Err(LogicError::NotRestrictionClosed {
                object: site.object_name(c).to_string(),
                morphism: site.morphism_name(f).to_string(),
            });
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(ambient: Presheaf, parts: Vec<Vec<bool>>) -> Subobject {
        let s = Subobject { ambient, parts };
        debug_assert!(s.closure_failure().is_none());
        s
    }

    /// Builds a subobject from per-object label lists.
    pub fn from_labels(
        ambient: Presheaf,
        parts: &std::collections::BTreeMap<String, Vec<String>>,
    ) -> Result<Subobject, LogicError> {
        let site = ambient.site().clone();
        for name in parts.keys() {
            if site.object(name).is_none() {
                return Err(LogicError::ShapeMismatch(name.clone()));
            }
        }
        let mut masks = Vec::new();
        for c in site.objects() {
            let mut mask = vec![false; ambient.stage_size(c)];
            for label in parts.get(site.object_name(c)).into_iter().flatten() {
                let a = ambient
                    .element(c, label)
                    .ok_or_else(|| LogicError::ShapeMismatch(format!("{}: {label}", site.object_name(c))))?;
                mask[a] = true;
            }
            masks.push(mask);
        }
        Subobject::new(ambient, masks)
    }

    pub fn to_labels(&self) -> std::collections::BTreeMap<String, Vec<String>> {
        let site = self.ambient.site();
        site.objects()
            .map(|c| {
                let labels = self.parts[c.0]
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(a, _)| self.ambient.label(c, a).to_string())
                    .collect();
                (site.object_name(c).to_string(), labels)
            })
            .collect()
    }

    fn closure_failure(&self) -> Option<(ObjId, MorId)> {
        let site = self.ambient.site();
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            for a in 0..self.ambient.stage_size(d) {
                if self.parts[d.0][a] && !self.parts[c.0][self.ambient.act(f, a)] {
                    return Some((c, f));
                }
            }
        }
        None
    }

    pub fn top(ambient: &Presheaf) -> Subobject {
        let parts = ambient
            .site()
            .objects()
            .map(|c| vec![true; ambient.stage_size(c)])
            .collect();
        Subobject::new_unchecked(ambient.clone(), parts)
    }

    pub fn bottom(ambient: &Presheaf) -> Subobject {
        let parts = ambient
            .site()
            .objects()
            .map(|c| vec![false; ambient.stage_size(c)])
            .collect();
        Subobject::new_unchecked(ambient.clone(), parts)
    }

    pub fn ambient(&self) -> &Presheaf {
        &self.ambient
    }

    pub fn parts(&self) -> &[Vec<bool>] {
        &self.parts
    }

    pub fn contains(&self, c: ObjId, a: usize) -> bool {
        self.parts[c.0][a]
    }

    pub fn is_top(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(|&x| x))
    }

    pub fn is_bottom(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(|&x| !x))
    }

    /// Inclusion order; false when the ambients differ.
    pub fn le(&self, other: &Subobject) -> bool {
        self.ambient == other.ambient
            && self
                .parts
                .iter()
                .zip(&other.parts)
                .all(|(p, q)| p.iter().zip(q).all(|(&x, &y)| !x || y))
    }

    /// The subpresheaf itself, with its inclusion into the ambient presheaf.
    pub fn to_presheaf(&self) -> (Presheaf, NatTrans) {
        let amb = &self.ambient;
        let site = amb.site().clone();
        let kept: Vec<Vec<usize>> = self
            .parts
            .iter()
            .map(|p| p.iter().enumerate().filter(|(_, &m)| m).map(|(a, _)| a).collect())
            .collect();
        let sets = site
            .objects()
            .map(|c| kept[c.0].iter().map(|&a| amb.label(c, a).to_string()).collect())
            .collect();
        let actions = site
            .morphisms()
            .map(|f| {
                let (c, d) = (site.src(f), site.tgt(f));
                kept[d.0]
                    .iter()
                    .map(|&a| {
                        let r = amb.act(f, a);
                        kept[c.0].binary_search(&r).expect("restriction-closed")
                    })
                    .collect()
            })
            .collect();
        let sub = Presheaf::new_unchecked(site, sets, actions);
        let incl = NatTrans::new_unchecked(sub.clone(), amb.clone(), kept);
        (sub, incl)
    }

    fn zip_with(&self, other: &Subobject, op: impl Fn(bool, bool) -> bool) -> Result<Subobject, LogicError> {
        if self.ambient != other.ambient {
            return Err(LogicError::AmbientMismatch);
        }
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(p, q)| p.iter().zip(q).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        Ok(Subobject::new_unchecked(self.ambient.clone(), parts))
    }

    pub fn meet(&self, other: &Subobject) -> Result<Subobject, LogicError> {
        self.zip_with(other, |x, y| x && y)
    }

    pub fn join(&self, other: &Subobject) -> Result<Subobject, LogicError> {
        self.zip_with(other, |x, y| x || y)
    }

    /// Heyting implication: `a ∈ (S ⇒ T)(c)` iff every restriction of `a` in `S` is in `T`.
    pub fn implies(&self, other: &Subobject) -> Result<Subobject, LogicError> {
        if self.ambient != other.ambient {
            return Err(LogicError::AmbientMismatch);
        }
        let amb = &self.ambient;
        let site = amb.site();
        let parts = site
            .objects()
            .map(|c| {
                (0..amb.stage_size(c))
                    .map(|a| {
                        site.morphisms_into(c).iter().all(|&f| {
                            let d = site.src(f);
                            let r = amb.act(f, a);
                            !self.parts[d.0][r] || other.parts[d.0][r]
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(Subobject::new_unchecked(amb.clone(), parts))
    }

    pub fn neg(&self) -> Subobject {
        self.implies(&Subobject::bottom(&self.ambient))
            .expect("same ambient")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeytingOp {
    Meet,
    Join,
    Implies,
    Neg,
    Top,
    Bottom,
}

/// Uniform entry point for the Heyting structure on `Sub(A)`; unary and nullary
/// operations ignore `t` (and `s` for the constants, which use `s`'s ambient).
pub fn heyting(op: HeytingOp, s: &Subobject, t: &Subobject) -> Result<Subobject, LogicError> {
    match op {
        HeytingOp::Meet => s.meet(t),
        HeytingOp::Join => s.join(t),
        HeytingOp::Implies => s.implies(t),
        HeytingOp::Neg => Ok(s.neg()),
        HeytingOp::Top => Ok(Subobject::top(s.ambient())),
        HeytingOp::Bottom => Ok(Subobject::bottom(s.ambient())),
    }
}

/// Every subobject of `A`, ordered by the closure enumeration.
pub fn subobjects(a: &Presheaf) -> Vec<Subobject> {
    let site = a.site();
    let mut offset = Vec::new();
    let mut nodes = Vec::new();
    for c in site.objects() {
        offset.push(nodes.len());
        nodes.extend((0..a.stage_size(c)).map(|x| (c, x)));
    }
    let forced: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&(d, x)| {
            site.morphisms_into(d)
                .iter()
                .map(|&f| offset[site.src(f).0] + a.act(f, x))
                .collect()
        })
        .collect();
    down_closed_sets(&forced)
        .into_iter()
        .map(|mask| {
            let parts = site
                .objects()
                .map(|c| mask[offset[c.0]..offset[c.0] + a.stage_size(c)].to_vec())
                .collect();
            Subobject::new_unchecked(a.clone(), parts)
        })
        .collect()
}

/// The subobject classifier: sieves at each stage, acting by pullback.
///
/// Stage labels are the sieve member lists, e.g. `{w1U,w2U}`; the maximal
/// sieve (`true`) is always the last element of its stage.
pub fn omega(site: &Arc<FinCat>) -> Presheaf {
    let table = SieveTable::new(site);
    let sets = site
        .objects()
        .map(|c| table.sieves[c.0].iter().map(|s| site.sieve_label(s)).collect())
        .collect();
    let actions = site
        .morphisms()
        .map(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            table.sieves[d.0]
                .iter()
                .map(|s| table.index(c, &site.pullback_sieve(f, s).expect("typed")))
                .collect()
        })
        .collect();
    Presheaf::new_unchecked(site.clone(), sets, actions)
}

/// `true: 1 → Ω`.
pub fn truth(site: &Arc<FinCat>) -> NatTrans {
    let om = omega(site);
    let family: Vec<usize> = site.objects().map(|c| om.stage_size(c) - 1).collect();
    NatTrans::global_element(&om, &family).expect("maximal sieves are compatible")
}

struct SieveTable {
    sieves: Vec<Vec<Sieve>>,
    lookup: Vec<HashMap<Vec<MorId>, usize>>,
}

impl SieveTable {
    fn new(site: &FinCat) -> SieveTable {
        let sieves: Vec<Vec<Sieve>> = site
            .objects()
            .map(|c| site.sieves_on(c).expect("object of the site"))
            .collect();
        let lookup = sieves
            .iter()
            .map(|ss| ss.iter().enumerate().map(|(i, s)| (s.members.clone(), i)).collect())
            .collect();
        SieveTable { sieves, lookup }
    }

    fn index(&self, c: ObjId, s: &Sieve) -> usize {
        self.lookup[c.0][&s.members]
    }
}

/// `χ_S: A → Ω`, sending `a ∈ A(c)` to the sieve of arrows along which `a` restricts into `S`.
pub fn char_map(s: &Subobject) -> NatTrans {
    let amb = &s.ambient;
    let site = amb.site();
    let table = SieveTable::new(site);
    let components = site
        .objects()
        .map(|c| {
            (0..amb.stage_size(c))
                .map(|a| {
                    let members = site
                        .morphisms_into(c)
                        .iter()
                        .copied()
                        .filter(|&f| s.parts[site.src(f).0][amb.act(f, a)])
                        .collect();
                    table.index(c, &Sieve { target: c, members })
                })
                .collect()
        })
        .collect();
    NatTrans::new_unchecked(amb.clone(), omega(site), components)
}

/// The subobject classified by `χ`: elements sent to the maximal sieve.
pub fn sub_from_char(chi: &NatTrans) -> Result<Subobject, LogicError> {
    let site = chi.src().site();
    let om = omega(site);
    if *chi.tgt() != om {
        return Err(LogicError::NotClassifying);
    }
    let parts = site
        .objects()
        .map(|c| {
            let top = om.stage_size(c) - 1;
            chi.component(c).iter().map(|&x| x == top).collect()
        })
        .collect();
    Ok(Subobject::new_unchecked(chi.src().clone(), parts))
}

/// Inverse image `α*(T)`.
pub fn pullback_sub(alpha: &NatTrans, t: &Subobject) -> Result<Subobject, LogicError> {
    if *alpha.tgt() != t.ambient {
        return Err(LogicError::TypeMismatch("subobject is not over the codomain".into()));
    }
    let site = alpha.src().site();
    let parts = site
        .objects()
        .map(|c| alpha.component(c).iter().map(|&b| t.parts[c.0][b]).collect())
        .collect();
    Ok(Subobject::new_unchecked(alpha.src().clone(), parts))
}

/// Left adjoint to pullback: the pointwise image `α(S)`.
pub fn exists_along(alpha: &NatTrans, s: &Subobject) -> Result<Subobject, LogicError> {
    if *alpha.src() != s.ambient {
        return Err(LogicError::TypeMismatch("subobject is not over the domain".into()));
    }
    let b = alpha.tgt();
    let site = b.site();
    let parts = site
        .objects()
        .map(|c| {
            let mut part = vec![false; b.stage_size(c)];
            for (a, &img) in alpha.component(c).iter().enumerate() {
                if s.parts[c.0][a] {
                    part[img] = true;
                }
            }
            part
        })
        .collect();
    Ok(Subobject::new_unchecked(b.clone(), parts))
}

/// Right adjoint to pullback.
pub fn forall_along(alpha: &NatTrans, s: &Subobject) -> Result<Subobject, LogicError> {
    if *alpha.src() != s.ambient {
        return Err(LogicError::TypeMismatch("subobject is not over the domain".into()));
    }
    let (a, b) = (alpha.src(), alpha.tgt());
    let site = b.site();
    let parts = site
        .objects()
        .map(|c| {
            (0..b.stage_size(c))
                .map(|y| {
                    site.morphisms_into(c).iter().all(|&f| {
                        let d = site.src(f);
                        let restricted = b.act(f, y);
                        (0..a.stage_size(d))
                            .all(|x| alpha.apply(d, x) != restricted || s.parts[d.0][x])
                    })
                })
                .collect()
        })
        .collect();
    Ok(Subobject::new_unchecked(b.clone(), parts))
}
