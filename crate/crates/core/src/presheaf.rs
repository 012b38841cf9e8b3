//! Presheaves over a finite site, natural transformations between them, and
//! the finite limits and coproducts the interpretation needs.
//!
//! Elements of a stage are addressed by their index in the stage's label list.
//! A restriction map for `f: c → d` sends indices of `A(d)` to indices of `A(c)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::logic::Subobject;
use crate::site::{FinCat, MorId, ObjId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("no stage given for object {0}")]
    MissingStage(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("label {label} appears twice at object {object}")]
    DuplicateLabel { object: String, label: String },
    #[error("action of {morphism} is ill-typed: {detail}")]
    ActionTypeError { morphism: String, detail: String },
    #[error("restriction is not functorial at {outer} . {inner}")]
    NonFunctorial { outer: String, inner: String },
    #[error("component at {object} is ill-typed: {detail}")]
    ComponentTypeError { object: String, detail: String },
    #[error("naturality fails along {0}")]
    NotNatural(String),
    #[error("operands live over different sites")]
    SiteMismatch,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// Label-level presheaf description, as read from JSON.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawPresheaf {
    pub sets: BTreeMap<String, Vec<String>>,
    /// Identity actions may be omitted.
    pub actions: BTreeMap<String, BTreeMap<String, String>>,
}

/// A functor `C^op → FinSet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    site: Arc<FinCat>,
    sets: Vec<Vec<String>>,
    actions: Vec<Vec<usize>>,
}

pub fn validate_presheaf(site: &Arc<FinCat>, raw: &RawPresheaf) -> Result<Presheaf, PresheafError> {
    Presheaf::from_raw(site, raw)
}

impl Presheaf {
    /// Builds a presheaf from index tables, checking types and functoriality.
    pub fn new(
        site: Arc<FinCat>,
        sets: Vec<Vec<String>>,
        actions: Vec<Vec<usize>>,
    ) -> Result<Presheaf, PresheafError> {
        if sets.len() != site.object_count() {
            return Err(PresheafError::MissingStage(format!(
                "expected {} stages, got {}",
                site.object_count(),
                sets.len()
            )));
        }
        if actions.len() != site.morphism_count() {
            return Err(PresheafError::ActionTypeError {
                morphism: "*".into(),
                detail: format!(
                    "expected {} action tables, got {}",
                    site.morphism_count(),
                    actions.len()
                ),
            });
        }
        for c in site.objects() {
            let mut seen = HashSet::new();
            for label in &sets[c.0] {
                if !seen.insert(label) {
                    return Err(PresheafError::DuplicateLabel {
                        object: site.object_name(c).to_string(),
                        label: label.clone(),
                    });
                }
            }
        }
        let p = Presheaf { site, sets, actions };
        p.check_functorial()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(
        site: Arc<FinCat>,
        sets: Vec<Vec<String>>,
        actions: Vec<Vec<usize>>,
    ) -> Presheaf {
        let p = Presheaf { site, sets, actions };
        debug_assert!(p.check_functorial().is_ok());
        p
    }

    pub fn from_raw(site: &Arc<FinCat>, raw: &RawPresheaf) -> Result<Presheaf, PresheafError> {
        for name in raw.sets.keys() {
            if site.object(name).is_none() {
                return Err(PresheafError::UnknownObject(name.clone()));
            }
        }
        for name in raw.actions.keys() {
            if site.morphism(name).is_none() {
                return Err(PresheafError::UnknownMorphism(name.clone()));
            }
        }
        let mut sets = Vec::with_capacity(site.object_count());
        for c in site.objects() {
            let name = site.object_name(c);
            let stage = raw
                .sets
                .get(name)
                .ok_or_else(|| PresheafError::MissingStage(name.to_string()))?;
            sets.push(stage.clone());
        }
        let index: Vec<HashMap<&str, usize>> = sets
            .iter()
            .map(|s| s.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect())
            .collect();
        let mut actions = Vec::with_capacity(site.morphism_count());
        for f in site.morphisms() {
            let name = site.morphism_name(f);
            let (c, d) = (site.src(f), site.tgt(f));
            let Some(table) = raw.actions.get(name) else {
                if site.is_identity(f) {
                    actions.push((0..sets[c.0].len()).collect());
                    continue;
                }
                return Err(PresheafError::ActionTypeError {
                    morphism: name.to_string(),
                    detail: "no action table".into(),
                });
            };
            let mut action = Vec::with_capacity(sets[d.0].len());
            for label in &sets[d.0] {
                let image = table.get(label).ok_or_else(|| PresheafError::ActionTypeError {
                    morphism: name.to_string(),
                    detail: format!("no image for {label}"),
                })?;
                let j = index[c.0].get(image.as_str()).ok_or_else(|| {
                    PresheafError::ActionTypeError {
                        morphism: name.to_string(),
                        detail: format!("image {image} is not in the stage at {}", site.object_name(c)),
                    }
                })?;
                action.push(*j);
            }
            if table.len() != sets[d.0].len() {
                return Err(PresheafError::ActionTypeError {
                    morphism: name.to_string(),
                    detail: "table mentions labels outside its domain".into(),
                });
            }
            actions.push(action);
        }
        Presheaf::new(site.clone(), sets, actions)
    }

    pub fn to_raw(&self) -> RawPresheaf {
        let site = &self.site;
        RawPresheaf {
            sets: site
                .objects()
                .map(|c| (site.object_name(c).to_string(), self.sets[c.0].clone()))
                .collect(),
            actions: site
                .morphisms()
                .filter(|&f| !site.is_identity(f))
                .map(|f| {
                    let (c, d) = (site.src(f), site.tgt(f));
                    let table = self.actions[f.0]
                        .iter()
                        .enumerate()
                        .map(|(x, &y)| (self.sets[d.0][x].clone(), self.sets[c.0][y].clone()))
                        .collect();
                    (site.morphism_name(f).to_string(), table)
                })
                .collect(),
        }
    }

    fn check_functorial(&self) -> Result<(), PresheafError> {
        let site = &self.site;
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            let action = &self.actions[f.0];
            if action.len() != self.sets[d.0].len()
                || action.iter().any(|&y| y >= self.sets[c.0].len())
            {
                return Err(PresheafError::ActionTypeError {
                    morphism: site.morphism_name(f).to_string(),
                    detail: "table does not map the codomain stage into the domain stage".into(),
                });
            }
        }
        for c in site.objects() {
            let id = site.identity(c);
            if self.actions[id.0].iter().enumerate().any(|(x, &y)| x != y) {
                let name = site.morphism_name(id).to_string();
                return Err(PresheafError::NonFunctorial {
                    outer: name.clone(),
                    inner: name,
                });
            }
        }
        for g in site.morphisms() {
            for f in site.morphisms() {
                let Some(gf) = site.compose(g, f) else { continue };
                let (ag, af, agf) = (&self.actions[g.0], &self.actions[f.0], &self.actions[gf.0]);
                if (0..ag.len()).any(|x| agf[x] != af[ag[x]]) {
                    return Err(PresheafError::NonFunctorial {
                        outer: site.morphism_name(g).to_string(),
                        inner: site.morphism_name(f).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn site(&self) -> &Arc<FinCat> {
        &self.site
    }

    pub fn stage_size(&self, c: ObjId) -> usize {
        self.sets[c.0].len()
    }

    pub fn stage_sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn labels(&self, c: ObjId) -> &[String] {
        &self.sets[c.0]
    }

    pub fn label(&self, c: ObjId, a: usize) -> &str {
        &self.sets[c.0][a]
    }

    pub fn element(&self, c: ObjId, label: &str) -> Option<usize> {
        self.sets[c.0].iter().position(|l| l == label)
    }

    /// Restriction of `a ∈ A(tgt f)` along `f`.
    pub fn act(&self, f: MorId, a: usize) -> usize {
        self.actions[f.0][a]
    }

    pub fn action(&self, f: MorId) -> &[usize] {
        &self.actions[f.0]
    }

    pub fn same_site(&self, other: &Presheaf) -> bool {
        Arc::ptr_eq(&self.site, &other.site) || self.site == other.site
    }

    /// Same stages and restrictions, ignoring labels.
    pub fn same_shape(&self, other: &Presheaf) -> bool {
        self.same_site(other) && self.stage_sizes() == other.stage_sizes() && self.actions == other.actions
    }

    pub fn total_size(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

/// The terminal presheaf: a singleton at every object.
pub fn terminal(site: &Arc<FinCat>) -> Presheaf {
    constant(site, &["*"])
}

/// The presheaf with no elements anywhere.
pub fn empty(site: &Arc<FinCat>) -> Presheaf {
    constant(site, &[])
}

/// The same set at every stage with identity restrictions.
pub fn constant(site: &Arc<FinCat>, labels: &[&str]) -> Presheaf {
    let sets = vec![labels.iter().map(|s| s.to_string()).collect(); site.object_count()];
    let actions = vec![(0..labels.len()).collect(); site.morphism_count()];
    Presheaf::new_unchecked(site.clone(), sets, actions)
}

/// The representable presheaf `Hom(-, c)`, labelled by morphism ids.
pub fn representable(site: &Arc<FinCat>, c: ObjId) -> Presheaf {
    let homs: Vec<Vec<MorId>> = site.objects().map(|d| site.hom(d, c).collect()).collect();
    let sets = homs
        .iter()
        .map(|hs| hs.iter().map(|&h| site.morphism_name(h).to_string()).collect())
        .collect();
    let actions = site
        .morphisms()
        .map(|f| {
            let (dom, cod) = (site.src(f), site.tgt(f));
            homs[cod.0]
                .iter()
                .map(|&h| {
                    let hf = site.compose(h, f).expect("composable");
                    homs[dom.0].iter().position(|&x| x == hf).expect("in hom set")
                })
                .collect()
        })
        .collect();
    Presheaf::new_unchecked(site.clone(), sets, actions)
}

/// Label-level component tables, as read from JSON.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawNatTrans {
    pub components: BTreeMap<String, BTreeMap<String, String>>,
}

/// A natural transformation between presheaves over the same site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTrans {
    src: Presheaf,
    tgt: Presheaf,
    components: Vec<Vec<usize>>,
}

impl NatTrans {
    /// Checks component types and naturality.
    pub fn new(
        src: Presheaf,
        tgt: Presheaf,
        components: Vec<Vec<usize>>,
    ) -> Result<NatTrans, PresheafError> {
        if !src.same_site(&tgt) {
            return Err(PresheafError::SiteMismatch);
        }
        let site = src.site().clone();
        if components.len() != site.object_count() {
            return Err(PresheafError::ComponentTypeError {
                object: "*".into(),
                detail: format!("expected {} components", site.object_count()),
            });
        }
        for c in site.objects() {
            let comp = &components[c.0];
            if comp.len() != src.stage_size(c) || comp.iter().any(|&b| b >= tgt.stage_size(c)) {
                return Err(PresheafError::ComponentTypeError {
                    object: site.object_name(c).to_string(),
                    detail: "component does not map the source stage into the target stage".into(),
                });
            }
        }
        let nat = NatTrans { src, tgt, components };
        if let Some(f) = nat.naturality_failure() {
            return Err(PresheafError::NotNatural(site.morphism_name(f).to_string()));
        }
        Ok(nat)
    }

    pub(crate) fn new_unchecked(src: Presheaf, tgt: Presheaf, components: Vec<Vec<usize>>) -> NatTrans {
        let nat = NatTrans { src, tgt, components };
        debug_assert!(nat.naturality_failure().is_none());
        nat
    }

    pub fn from_raw(src: Presheaf, tgt: Presheaf, raw: &RawNatTrans) -> Result<NatTrans, PresheafError> {
        if !src.same_site(&tgt) {
            return Err(PresheafError::SiteMismatch);
        }
        let site = src.site().clone();
        for name in raw.components.keys() {
            if site.object(name).is_none() {
                return Err(PresheafError::UnknownObject(name.clone()));
            }
        }
        let mut components = Vec::new();
        for c in site.objects() {
            let name = site.object_name(c);
            let empty = BTreeMap::new();
            let table = match raw.components.get(name) {
                Some(t) => t,
                None if src.stage_size(c) == 0 => &empty,
                None => return Err(PresheafError::MissingStage(name.to_string())),
            };
            if table.len() != src.stage_size(c) {
                return Err(PresheafError::ComponentTypeError {
                    object: name.to_string(),
                    detail: "table does not cover exactly the source stage".into(),
                });
            }
            let mut comp = Vec::new();
            for label in src.labels(c) {
                let image = table.get(label).ok_or_else(|| PresheafError::ComponentTypeError {
                    object: name.to_string(),
                    detail: format!("no image for {label}"),
                })?;
                comp.push(tgt.element(c, image).ok_or_else(|| {
                    PresheafError::ComponentTypeError {
                        object: name.to_string(),
                        detail: format!("{image} is not in the target stage"),
                    }
                })?);
            }
            components.push(comp);
        }
        NatTrans::new(src, tgt, components)
    }

    pub fn to_raw(&self) -> RawNatTrans {
        let site = self.src.site();
        RawNatTrans {
            components: site
                .objects()
                .map(|c| {
                    let table = self.components[c.0]
                        .iter()
                        .enumerate()
                        .map(|(a, &b)| (self.src.label(c, a).to_string(), self.tgt.label(c, b).to_string()))
                        .collect();
                    (site.object_name(c).to_string(), table)
                })
                .collect(),
        }
    }

    fn naturality_failure(&self) -> Option<MorId> {
        let site = self.src.site();
        site.morphisms().find(|&f| {
            let (c, d) = (site.src(f), site.tgt(f));
            (0..self.src.stage_size(d)).any(|a| {
                self.tgt.act(f, self.components[d.0][a]) != self.components[c.0][self.src.act(f, a)]
            })
        })
    }

    pub fn identity(a: &Presheaf) -> NatTrans {
        let components = a.sets.iter().map(|s| (0..s.len()).collect()).collect();
        NatTrans::new_unchecked(a.clone(), a.clone(), components)
    }

    /// The unique map `!_A: A → 1`.
    pub fn to_terminal(a: &Presheaf) -> NatTrans {
        let components = a.sets.iter().map(|s| vec![0; s.len()]).collect();
        NatTrans::new_unchecked(a.clone(), terminal(a.site()), components)
    }

    /// The unique map out of the empty presheaf.
    pub fn from_empty(a: &Presheaf) -> NatTrans {
        let site = a.site();
        NatTrans::new_unchecked(empty(site), a.clone(), vec![Vec::new(); site.object_count()])
    }

    /// The global element picking `family[c] ∈ A(c)` at each object.
    pub fn global_element(a: &Presheaf, family: &[usize]) -> Result<NatTrans, PresheafError> {
        NatTrans::new(
            terminal(a.site()),
            a.clone(),
            family.iter().map(|&x| vec![x]).collect(),
        )
    }

    pub fn src(&self) -> &Presheaf {
        &self.src
    }

    pub fn tgt(&self) -> &Presheaf {
        &self.tgt
    }

    pub fn component(&self, c: ObjId) -> &[usize] {
        &self.components[c.0]
    }

    pub fn apply(&self, c: ObjId, a: usize) -> usize {
        self.components[c.0][a]
    }

    /// Pointwise surjectivity, which is epi in a presheaf topos.
    pub fn is_epi(&self) -> bool {
        let site = self.src.site();
        site.objects().all(|c| {
            let mut hit = vec![false; self.tgt.stage_size(c)];
            for &b in &self.components[c.0] {
                hit[b] = true;
            }
            hit.into_iter().all(|x| x)
        })
    }

    pub fn is_mono(&self) -> bool {
        self.components.iter().all(|comp| {
            let mut seen = HashSet::new();
            comp.iter().all(|b| seen.insert(b))
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono() && self.is_epi()
    }
}

/// `β ∘ α`.
pub fn compose(beta: &NatTrans, alpha: &NatTrans) -> Result<NatTrans, PresheafError> {
    if alpha.tgt != beta.src {
        return Err(PresheafError::TypeMismatch(
            "codomain of the first map is not the domain of the second".into(),
        ));
    }
    let components = alpha
        .components
        .iter()
        .zip(&beta.components)
        .map(|(a, b)| a.iter().map(|&x| b[x]).collect())
        .collect();
    Ok(NatTrans::new_unchecked(alpha.src.clone(), beta.tgt.clone(), components))
}

/// Index of the pair `(i, j)` in a product stage whose right factor has `right_size` elements.
pub fn pair_index(right_size: usize, i: usize, j: usize) -> usize {
    i * right_size + j
}

/// Pointwise product `A × B` with its two projections.
pub fn product(a: &Presheaf, b: &Presheaf) -> Result<(Presheaf, NatTrans, NatTrans), PresheafError> {
    if !a.same_site(b) {
        return Err(PresheafError::SiteMismatch);
    }
    let site = a.site().clone();
    let sets = site
        .objects()
        .map(|c| {
            let mut stage = Vec::with_capacity(a.stage_size(c) * b.stage_size(c));
            for x in a.labels(c) {
                for y in b.labels(c) {
                    stage.push(format!("({x},{y})"));
                }
            }
            stage
        })
        .collect();
    let actions = site
        .morphisms()
        .map(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            let nb_d = b.stage_size(d);
            let nb_c = b.stage_size(c);
            (0..a.stage_size(d) * nb_d)
                .map(|k| pair_index(nb_c, a.act(f, k / nb_d), b.act(f, k % nb_d)))
                .collect()
        })
        .collect();
    let prod = Presheaf::new_unchecked(site.clone(), sets, actions);
    let p1 = site
        .objects()
        .map(|c| {
            let nb = b.stage_size(c);
            (0..a.stage_size(c) * nb).map(|k| k / nb).collect()
        })
        .collect();
    let p2 = site
        .objects()
        .map(|c| {
            let nb = b.stage_size(c);
            (0..a.stage_size(c) * nb).map(|k| k % nb).collect()
        })
        .collect();
    Ok((
        prod.clone(),
        NatTrans::new_unchecked(prod.clone(), a.clone(), p1),
        NatTrans::new_unchecked(prod, b.clone(), p2),
    ))
}

/// `⟨α, β⟩: X → A × B`.
pub fn pairing(alpha: &NatTrans, beta: &NatTrans) -> Result<NatTrans, PresheafError> {
    if alpha.src != beta.src {
        return Err(PresheafError::TypeMismatch("pairing needs a common domain".into()));
    }
    let (prod, _, _) = product(&alpha.tgt, &beta.tgt)?;
    let site = alpha.src.site();
    let components = site
        .objects()
        .map(|c| {
            let nb = beta.tgt.stage_size(c);
            alpha.components[c.0]
                .iter()
                .zip(&beta.components[c.0])
                .map(|(&i, &j)| pair_index(nb, i, j))
                .collect()
        })
        .collect();
    Ok(NatTrans::new_unchecked(alpha.src.clone(), prod, components))
}

/// Pointwise disjoint union `A + B` with its injections; labels are tagged `inl:`/`inr:`.
pub fn coproduct(a: &Presheaf, b: &Presheaf) -> Result<(Presheaf, NatTrans, NatTrans), PresheafError> {
    if !a.same_site(b) {
        return Err(PresheafError::SiteMismatch);
    }
    let site = a.site().clone();
    let sets = site
        .objects()
        .map(|c| {
            a.labels(c)
                .iter()
                .map(|x| format!("inl:{x}"))
                .chain(b.labels(c).iter().map(|y| format!("inr:{y}")))
                .collect()
        })
        .collect();
    let actions = site
        .morphisms()
        .map(|f| {
            let (c, d) = (site.src(f), site.tgt(f));
            let (na_c, na_d) = (a.stage_size(c), a.stage_size(d));
            (0..na_d + b.stage_size(d))
                .map(|k| if k < na_d { a.act(f, k) } else { na_c + b.act(f, k - na_d) })
                .collect()
        })
        .collect();
    let sum = Presheaf::new_unchecked(site.clone(), sets, actions);
    let inl = site.objects().map(|c| (0..a.stage_size(c)).collect()).collect();
    let inr = site
        .objects()
        .map(|c| {
            let off = a.stage_size(c);
            (0..b.stage_size(c)).map(|k| off + k).collect()
        })
        .collect();
    Ok((
        sum.clone(),
        NatTrans::new_unchecked(a.clone(), sum.clone(), inl),
        NatTrans::new_unchecked(b.clone(), sum, inr),
    ))
}

/// The subobject of `A` on which `α` and `β` agree.
pub fn equalizer_sub(alpha: &NatTrans, beta: &NatTrans) -> Result<Subobject, PresheafError> {
    if alpha.src != beta.src || alpha.tgt != beta.tgt {
        return Err(PresheafError::TypeMismatch("equalizer needs parallel maps".into()));
    }
    let parts = alpha
        .components
        .iter()
        .zip(&beta.components)
        .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a == b).collect())
        .collect();
    Ok(Subobject::new_unchecked(alpha.src.clone(), parts))
}

/// Pullback of a cospan `A → C ← B`, built as an equalizer inside `A × B`.
pub fn pullback(alpha: &NatTrans, beta: &NatTrans) -> Result<(Presheaf, NatTrans, NatTrans), PresheafError> {
    if alpha.tgt != beta.tgt {
        return Err(PresheafError::TypeMismatch("pullback needs a shared codomain".into()));
    }
    let (_, p1, p2) = product(&alpha.src, &beta.src)?;
    let sub = equalizer_sub(&compose(alpha, &p1)?, &compose(beta, &p2)?)?;
    let (obj, incl) = sub.to_presheaf();
    Ok((obj, compose(&p1, &incl)?, compose(&p2, &incl)?))
}

/// Compatible families `(a_c ∈ A(c))_c`, in lexicographic order of index tuples.
pub fn global_families(a: &Presheaf) -> Vec<Vec<usize>> {
    let site = a.site();
    let n = site.object_count();
    // constraints checked once both ends of a morphism are assigned
    let mut checks: Vec<Vec<MorId>> = vec![Vec::new(); n];
    for f in site.morphisms() {
        if site.is_identity(f) {
            continue;
        }
        let k = site.src(f).0.max(site.tgt(f).0);
        checks[k].push(f);
    }
    let mut out = Vec::new();
    let mut family = Vec::with_capacity(n);
    fn go(a: &Presheaf, checks: &[Vec<MorId>], family: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = family.len();
        if k == checks.len() {
            out.push(family.clone());
            return;
        }
        let site = a.site();
        for x in 0..a.stage_size(ObjId(k)) {
            family.push(x);
            let ok = checks[k]
                .iter()
                .all(|&f| a.act(f, family[site.tgt(f).0]) == family[site.src(f).0]);
            if ok {
                go(a, checks, family, out);
            }
            family.pop();
        }
    }
    go(a, &checks, &mut family, &mut out);
    out
}

/// Global elements `1 → A`: the names of `A`.
pub fn global_elements(a: &Presheaf) -> Vec<NatTrans> {
    let one = terminal(a.site());
    global_families(a)
        .into_iter()
        .map(|fam| NatTrans::new_unchecked(one.clone(), a.clone(), fam.into_iter().map(|x| vec![x]).collect()))
        .collect()
}

/// `∃a:A.⊤` holds internally, i.e. `!_A` is epi.
pub fn is_inhabited_internally(a: &Presheaf) -> bool {
    NatTrans::to_terminal(a).is_epi()
}
