//! Finite categories given by explicit tables, and sieves on their objects.
//!
//! A [`FinCat`] is the index category of a presheaf topos. Objects and
//! morphisms are addressed by dense indices ([`ObjId`], [`MorId`]) whose order
//! is the lexicographic order of their string ids, so every enumeration in the
//! crate is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closure::down_closed_sets;

/// Index of an object in a [`FinCat`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

/// Index of a morphism in a [`FinCat`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorId(pub usize);

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("object {0} is declared more than once")]
    DuplicateObject(String),
    #[error("morphism {0} is declared more than once")]
    DuplicateMorphism(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("object {object} has no identity morphism ({detail})")]
    MissingIdentity { object: String, detail: String },
    #[error("composite {g} . {f} = {gf} is ill-typed")]
    IllTypedComposite { g: String, f: String, gf: String },
    #[error("composite {g} . {f} is listed with two different results")]
    ConflictingComposite { g: String, f: String },
    #[error("composable pair {g} . {f} has no composite")]
    MissingComposite { g: String, f: String },
    #[error("identity law fails for morphism {0}")]
    IdentityLaw(String),
    #[error("composition is not associative on {h} . {g} . {f}")]
    NonAssociative { h: String, g: String, f: String },
    #[error("sieve has target {found} but morphism {morphism} has codomain {expected}")]
    TargetMismatch {
        morphism: String,
        expected: String,
        found: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMorphism {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// Unvalidated category description.
///
/// `identities` maps each object to the id of its identity morphism, which
/// must also appear in `morphisms`. Composites involving an identity may be
/// omitted from `compose`; they are filled in by the identity laws.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCategory {
    pub objects: Vec<String>,
    pub morphisms: Vec<RawMorphism>,
    pub identities: BTreeMap<String, String>,
    /// Entries `[g, f, g∘f]`.
    pub compose: Vec<[String; 3]>,
}

impl RawCategory {
    /// Adds `id_<object>` identities for every object that lacks one.
    ///
    /// A listed morphism named `id_<object>` is adopted as the identity.
    pub fn with_generated_identities(mut self) -> Self {
        for object in self.objects.clone() {
            if self.identities.contains_key(&object) {
                continue;
            }
            let id = format!("id_{object}");
            if !self.morphisms.iter().any(|m| m.id == id) {
                self.morphisms.push(RawMorphism {
                    id: id.clone(),
                    src: object.clone(),
                    tgt: object.clone(),
                });
            }
            self.identities.insert(object, id);
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub id: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

/// A validated finite category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCat {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    /// `compose[g * n + f]` is `g ∘ f` when defined.
    compose: Vec<Option<MorId>>,
    into: Vec<Vec<MorId>>,
}

/// Checks a raw description against the category axioms.
pub fn validate_category(raw: &RawCategory) -> Result<FinCat, SiteError> {
    FinCat::validate(raw)
}

impl FinCat {
    pub fn validate(raw: &RawCategory) -> Result<FinCat, SiteError> {
        let mut objects = raw.objects.clone();
        objects.sort();
        for pair in objects.windows(2) {
            if pair[0] == pair[1] {
                return Err(SiteError::DuplicateObject(pair[0].clone()));
            }
        }
        let obj_index: HashMap<&str, ObjId> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), ObjId(i)))
            .collect();
        let lookup_obj = |name: &str| {
            obj_index
                .get(name)
                .copied()
                .ok_or_else(|| SiteError::UnknownObject(name.to_string()))
        };

        let mut raw_mors = raw.morphisms.clone();
        raw_mors.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in raw_mors.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(SiteError::DuplicateMorphism(pair[0].id.clone()));
            }
        }
        let mut morphisms = Vec::with_capacity(raw_mors.len());
        for m in &raw_mors {
            morphisms.push(Morphism {
                id: m.id.clone(),
                src: lookup_obj(&m.src)?,
                tgt: lookup_obj(&m.tgt)?,
            });
        }
        let mor_index: HashMap<&str, MorId> = morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.as_str(), MorId(i)))
            .collect();
        let lookup_mor = |name: &str| {
            mor_index
                .get(name)
                .copied()
                .ok_or_else(|| SiteError::UnknownMorphism(name.to_string()))
        };

        for key in raw.identities.keys() {
            lookup_obj(key)?;
        }
        let mut identities = Vec::with_capacity(objects.len());
        for (i, object) in objects.iter().enumerate() {
            let id_name =
                raw.identities
                    .get(object)
                    .ok_or_else(|| SiteError::MissingIdentity {
                        object: object.clone(),
                        detail: "none declared".into(),
                    })?;
            let id = mor_index
                .get(id_name.as_str())
                .copied()
                .ok_or_else(|| SiteError::MissingIdentity {
                    object: object.clone(),
                    detail: format!("{id_name} is not a declared morphism"),
                })?;
            let m = &morphisms[id.0];
            if m.src != ObjId(i) || m.tgt != ObjId(i) {
                return Err(SiteError::MissingIdentity {
                    object: object.clone(),
                    detail: format!("{id_name} is not an endomorphism of {object}"),
                });
            }
            identities.push(id);
        }

        let n = morphisms.len();
        let mut compose: Vec<Option<MorId>> = vec![None; n * n];
        for [g, f, gf] in &raw.compose {
            let (gi, fi, gfi) = (lookup_mor(g)?, lookup_mor(f)?, lookup_mor(gf)?);
            let (mg, mf, mgf) = (&morphisms[gi.0], &morphisms[fi.0], &morphisms[gfi.0]);
            if mf.tgt != mg.src || mgf.src != mf.src || mgf.tgt != mg.tgt {
                return Err(SiteError::IllTypedComposite {
                    g: g.clone(),
                    f: f.clone(),
                    gf: gf.clone(),
                });
            }
            let slot = &mut compose[gi.0 * n + fi.0];
            match slot {
                Some(existing) if *existing != gfi => {
                    return Err(SiteError::ConflictingComposite {
                        g: g.clone(),
                        f: f.clone(),
                    })
                }
                _ => *slot = Some(gfi),
            }
        }
        // identity laws: fill in or check
        for (fi, m) in morphisms.iter().enumerate() {
            let id_t = identities[m.tgt.0];
            let id_s = identities[m.src.0];
            for slot in [id_t.0 * n + fi, fi * n + id_s.0] {
                match compose[slot] {
                    None => compose[slot] = Some(MorId(fi)),
                    Some(r) if r.0 != fi => return Err(SiteError::IdentityLaw(m.id.clone())),
                    Some(_) => {}
                }
            }
        }
        for (gi, mg) in morphisms.iter().enumerate() {
            for (fi, mf) in morphisms.iter().enumerate() {
                if mf.tgt == mg.src && compose[gi * n + fi].is_none() {
                    return Err(SiteError::MissingComposite {
                        g: mg.id.clone(),
                        f: mf.id.clone(),
                    });
                }
            }
        }
        for h in 0..n {
            for g in 0..n {
                let Some(hg) = compose[h * n + g] else { continue };
                for f in 0..n {
                    let Some(gf) = compose[g * n + f] else { continue };
                    if compose[h * n + gf.0] != compose[hg.0 * n + f] {
                        return Err(SiteError::NonAssociative {
                            h: morphisms[h].id.clone(),
                            g: morphisms[g].id.clone(),
                            f: morphisms[f].id.clone(),
                        });
                    }
                }
            }
        }

        let mut into = vec![Vec::new(); objects.len()];
        for (i, m) in morphisms.iter().enumerate() {
            into[m.tgt.0].push(MorId(i));
        }
        Ok(FinCat {
            objects,
            morphisms,
            identities,
            compose,
            into,
        })
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = ObjId> + '_ {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn morphisms(&self) -> impl ExactSizeIterator<Item = MorId> + '_ {
        (0..self.morphisms.len()).map(MorId)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn object_name(&self, c: ObjId) -> &str {
        &self.objects[c.0]
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.morphisms[f.0].id
    }

    pub fn object(&self, name: &str) -> Option<ObjId> {
        self.objects
            .binary_search_by(|o| o.as_str().cmp(name))
            .ok()
            .map(ObjId)
    }

    pub fn morphism(&self, name: &str) -> Option<MorId> {
        self.morphisms
            .binary_search_by(|m| m.id.as_str().cmp(name))
            .ok()
            .map(MorId)
    }

    pub fn src(&self, f: MorId) -> ObjId {
        self.morphisms[f.0].src
    }

    pub fn tgt(&self, f: MorId) -> ObjId {
        self.morphisms[f.0].tgt
    }

    pub fn identity(&self, c: ObjId) -> MorId {
        self.identities[c.0]
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identities[self.src(f).0] == f
    }

    /// `g ∘ f`, defined when `tgt(f) = src(g)`.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose[g.0 * self.morphisms.len() + f.0]
    }

    /// All morphisms with codomain `c`, in id order.
    pub fn morphisms_into(&self, c: ObjId) -> &[MorId] {
        &self.into[c.0]
    }

    pub fn hom(&self, c: ObjId, d: ObjId) -> impl Iterator<Item = MorId> + '_ {
        self.into[d.0].iter().copied().filter(move |&f| self.src(f) == c)
    }

    /// Raw description that validates back to this category.
    pub fn to_raw(&self) -> RawCategory {
        let mut compose = Vec::new();
        for g in self.morphisms() {
            for f in self.morphisms() {
                if self.is_identity(g) || self.is_identity(f) {
                    continue;
                }
                if let Some(gf) = self.compose(g, f) {
                    compose.push([
                        self.morphism_name(g).to_string(),
                        self.morphism_name(f).to_string(),
                        self.morphism_name(gf).to_string(),
                    ]);
                }
            }
        }
        RawCategory {
            objects: self.objects.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|m| RawMorphism {
                    id: m.id.clone(),
                    src: self.objects[m.src.0].clone(),
                    tgt: self.objects[m.tgt.0].clone(),
                })
                .collect(),
            identities: self
                .objects()
                .map(|c| (self.objects[c.0].clone(), self.morphisms[self.identity(c).0].id.clone()))
                .collect(),
            compose,
        }
    }

    /// Every sieve on `c`, ordered by member count then lexicographically.
    pub fn sieves_on(&self, c: ObjId) -> Result<Vec<Sieve>, SiteError> {
        if c.0 >= self.objects.len() {
            return Err(SiteError::UnknownObject(format!("#{}", c.0)));
        }
        let into = self.morphisms_into(c);
        let position: HashMap<MorId, usize> =
            into.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        // f in a sieve forces every f∘g
        let forced: Vec<Vec<usize>> = into
            .iter()
            .map(|&f| {
                self.morphisms_into(self.src(f))
                    .iter()
                    .filter_map(|&g| self.compose(f, g))
                    .map(|fg| position[&fg])
                    .collect()
            })
            .collect();
        let mut sieves: Vec<Sieve> = down_closed_sets(&forced)
            .into_iter()
            .map(|mask| Sieve {
                target: c,
                members: into
                    .iter()
                    .zip(mask)
                    .filter_map(|(&f, keep)| keep.then_some(f))
                    .collect(),
            })
            .collect();
        sieves.sort_by(|a, b| {
            a.members
                .len()
                .cmp(&b.members.len())
                .then_with(|| a.members.cmp(&b.members))
        });
        Ok(sieves)
    }

    /// The sieve `{ g | f ∘ g ∈ s }` on the domain of `f`.
    pub fn pullback_sieve(&self, f: MorId, s: &Sieve) -> Result<Sieve, SiteError> {
        if self.tgt(f) != s.target {
            return Err(SiteError::TargetMismatch {
                morphism: self.morphism_name(f).to_string(),
                expected: self.object_name(self.tgt(f)).to_string(),
                found: self.object_name(s.target).to_string(),
            });
        }
        let c = self.src(f);
        let members = self
            .morphisms_into(c)
            .iter()
            .copied()
            .filter(|&g| self.compose(f, g).is_some_and(|fg| s.contains(fg)))
            .collect();
        Ok(Sieve { target: c, members })
    }

    /// The maximal sieve on `c`.
    pub fn maximal_sieve(&self, c: ObjId) -> Sieve {
        Sieve {
            target: c,
            members: self.morphisms_into(c).to_vec(),
        }
    }

    /// Checks the closure invariant of a candidate sieve.
    pub fn is_sieve(&self, s: &Sieve) -> bool {
        s.members.iter().all(|&f| {
            self.tgt(f) == s.target
                && self
                    .morphisms_into(self.src(f))
                    .iter()
                    .all(|&g| self.compose(f, g).is_some_and(|fg| s.contains(fg)))
        })
    }

    pub fn sieve_label(&self, s: &Sieve) -> String {
        let names: Vec<&str> = s.members.iter().map(|&f| self.morphism_name(f)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Whether every two objects are joined by a zig-zag of morphisms.
    pub fn is_connected(&self) -> bool {
        if self.objects.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::from([ObjId(0)]);
        let mut stack = vec![ObjId(0)];
        while let Some(c) = stack.pop() {
            for m in &self.morphisms {
                let other = if m.src == c {
                    m.tgt
                } else if m.tgt == c {
                    m.src
                } else {
                    continue;
                };
                if seen.insert(other) {
                    stack.push(other);
                }
            }
        }
        seen.len() == self.objects.len()
    }
}

impl fmt::Display for FinCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} objects, {} morphisms",
            self.objects.len(),
            self.morphisms.len()
        )
    }
}

/// A set of morphisms into `target`, closed under precomposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sieve {
    pub target: ObjId,
    /// Sorted by index.
    pub members: Vec<MorId>,
}

impl Sieve {
    pub fn contains(&self, f: MorId) -> bool {
        self.members.binary_search(&f).is_ok()
    }
}

/// The one-object category.
pub fn terminal_category() -> FinCat {
    let raw = RawCategory {
        objects: vec!["*".into()],
        ..Default::default()
    };
    FinCat::validate(&raw.with_generated_identities()).expect("terminal category is valid")
}

/// The arrow category `bot --u--> top`.
pub fn sierpinski() -> FinCat {
    let raw = RawCategory {
        objects: vec!["bot".into(), "top".into()],
        morphisms: vec![mor("u", "bot", "top")],
        ..Default::default()
    };
    FinCat::validate(&raw.with_generated_identities()).expect("sierpinski category is valid")
}

/// Two arcs `U`, `V` covering a circle, meeting in the two overlaps `W1`, `W2`.
pub fn crown() -> FinCat {
    let raw = RawCategory {
        objects: ["U", "V", "W1", "W2"].map(String::from).to_vec(),
        morphisms: vec![
            mor("w1U", "W1", "U"),
            mor("w1V", "W1", "V"),
            mor("w2U", "W2", "U"),
            mor("w2V", "W2", "V"),
        ],
        ..Default::default()
    };
    FinCat::validate(&raw.with_generated_identities()).expect("crown site is valid")
}

/// Builtin site by name: `terminal`, `sierpinski` or `crown`.
pub fn builtin_site(name: &str) -> Option<FinCat> {
    match name {
        "terminal" => Some(terminal_category()),
        "sierpinski" => Some(sierpinski()),
        "crown" => Some(crown()),
        _ => None,
    }
}

fn mor(id: &str, src: &str, tgt: &str) -> RawMorphism {
    RawMorphism {
        id: id.into(),
        src: src.into(),
        tgt: tgt.into(),
    }
}
