//! JSON file formats for sites, presheaves, natural transformations,
//! subobjects and environments.
//!
//! References between files are either builtin names or paths relative to
//! the referencing file. A site reference is a builtin site name (`terminal`,
//! `sierpinski`, `crown`) or a site file; an environment reference is a
//! builtin environment name or an environment file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gallery;
use crate::lang::{tuple_object, LangError, SemanticEnvironment, Signature};
use crate::logic::{LogicError, Subobject};
use crate::presheaf::{NatTrans, Presheaf, PresheafError, RawNatTrans, RawPresheaf};
use crate::site::{builtin_site, FinCat, RawCategory, RawMorphism, SiteError};

#[derive(Error, Debug)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error("malformed JSON in {path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{0} is neither a builtin nor a readable file")]
    UnknownReference(String),
    #[error("{file}: {source}")]
    Site { file: String, source: SiteError },
    #[error("{file}: {source}")]
    Presheaf { file: String, source: PresheafError },
    #[error("{file}: {source}")]
    Logic { file: String, source: LogicError },
    #[error("{file}: {source}")]
    Lang { file: String, source: LangError },
    #[error("{file}: {detail}")]
    Inconsistent { file: String, detail: String },
}

impl IoError {
    /// Whether the error is about well-formed input describing an invalid
    /// structure, rather than unreadable or unparsable input.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            IoError::Read { .. } | IoError::Write { .. } | IoError::Json { .. } | IoError::UnknownReference(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDoc {
    pub objects: Vec<String>,
    #[serde(default)]
    pub morphisms: Vec<RawMorphism>,
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
}

impl SiteDoc {
    pub fn to_raw(&self) -> RawCategory {
        RawCategory {
            objects: self.objects.clone(),
            morphisms: self.morphisms.clone(),
            identities: BTreeMap::new(),
            compose: self.compose.clone(),
        }
        .with_generated_identities()
    }

    pub fn from_site(site: &FinCat) -> SiteDoc {
        let raw = site.to_raw();
        let generated: Vec<&String> = raw
            .identities
            .iter()
            .filter(|(o, id)| **id == format!("id_{o}"))
            .map(|(_, id)| id)
            .collect();
        SiteDoc {
            objects: raw.objects.clone(),
            morphisms: raw
                .morphisms
                .iter()
                .filter(|m| !generated.contains(&&m.id))
                .cloned()
                .collect(),
            compose: raw.compose,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafDoc {
    pub site: String,
    pub sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub actions: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NatDoc {
    pub site: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<String>,
    pub components: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<String>,
    pub parts: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    #[serde(default)]
    pub args: Vec<String>,
    pub result: String,
    pub nat: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub args: Vec<String>,
    pub sub: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvDoc {
    /// Optional; otherwise taken from the sort files, which must agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
    /// Declaration order is kept; it is the signature's sort order.
    pub sorts: IndexMap<String, String>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionDoc>,
    #[serde(default)]
    pub relations: BTreeMap<String, RelationDoc>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| IoError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn resolve(base: &Path, reference: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new("")).join(reference)
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

/// Reads and validates a site file.
pub fn load_site_file(path: &Path) -> Result<Arc<FinCat>, IoError> {
    let doc: SiteDoc = read_json(path)?;
    FinCat::validate(&doc.to_raw())
        .map(Arc::new)
        .map_err(|source| IoError::Site { file: label(path), source })
}

/// A builtin site name or a site file path.
pub fn load_site(reference: &str) -> Result<Arc<FinCat>, IoError> {
    if let Some(site) = builtin_site(reference) {
        return Ok(Arc::new(site));
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(IoError::UnknownReference(reference.to_string()));
    }
    load_site_file(path)
}

fn site_relative(base: &Path, reference: &str) -> Result<Arc<FinCat>, IoError> {
    if let Some(site) = builtin_site(reference) {
        return Ok(Arc::new(site));
    }
    let path = resolve(base, reference);
    if !path.exists() {
        return Err(IoError::UnknownReference(reference.to_string()));
    }
    load_site_file(&path)
}

/// Reads and validates a presheaf file.
pub fn load_presheaf_file(path: &Path) -> Result<Presheaf, IoError> {
    let doc: PresheafDoc = read_json(path)?;
    let site = site_relative(path, &doc.site)?;
    let raw = RawPresheaf {
        sets: doc.sets,
        actions: doc.actions,
    };
    Presheaf::from_raw(&site, &raw).map_err(|source| IoError::Presheaf { file: label(path), source })
}

/// Reads a natural transformation between the given presheaves; `src`/`tgt`
/// named in the file, when present, must match them.
pub fn load_nat_file(path: &Path, src: &Presheaf, tgt: &Presheaf) -> Result<NatTrans, IoError> {
    let doc: NatDoc = read_json(path)?;
    for (which, reference, expected) in [("src", &doc.src, src), ("tgt", &doc.tgt, tgt)] {
        if let Some(r) = reference {
            let p = load_presheaf_file(&resolve(path, r))?;
            if &p != expected {
                return Err(IoError::Inconsistent {
                    file: label(path),
                    detail: format!("{which} {r} differs from the declared sort"),
                });
            }
        }
    }
    let site = site_relative(path, &doc.site)?;
    if *site != **src.site() {
        return Err(IoError::Inconsistent {
            file: label(path),
            detail: "site differs from the environment's".into(),
        });
    }
    let raw = RawNatTrans {
        components: doc.components,
    };
    NatTrans::from_raw(src.clone(), tgt.clone(), &raw)
        .map_err(|source| IoError::Presheaf { file: label(path), source })
}

/// Reads a natural transformation whose file names both `src` and `tgt`.
pub fn load_standalone_nat_file(path: &Path) -> Result<NatTrans, IoError> {
    let doc: NatDoc = read_json(path)?;
    let (Some(s), Some(t)) = (&doc.src, &doc.tgt) else {
        return Err(IoError::Inconsistent {
            file: label(path),
            detail: "a standalone natural transformation needs src and tgt".into(),
        });
    };
    let src = load_presheaf_file(&resolve(path, s))?;
    let tgt = load_presheaf_file(&resolve(path, t))?;
    load_nat_file(path, &src, &tgt)
}

/// Reads a subobject of `ambient`.
pub fn load_sub_file(path: &Path, ambient: &Presheaf) -> Result<Subobject, IoError> {
    let doc: SubDoc = read_json(path)?;
    if let Some(r) = &doc.ambient {
        let p = load_presheaf_file(&resolve(path, r))?;
        if &p != ambient {
            return Err(IoError::Inconsistent {
                file: label(path),
                detail: format!("ambient {r} differs from the declared argument sorts"),
            });
        }
    }
    Subobject::from_labels(ambient.clone(), &doc.parts)
        .map_err(|source| IoError::Logic { file: label(path), source })
}

/// Reads and validates an environment file.
pub fn load_env_file(path: &Path) -> Result<SemanticEnvironment, IoError> {
    let doc: EnvDoc = read_json(path)?;
    let file = label(path);
    let lang = |source| IoError::Lang { file: file.clone(), source };
    let mut sig = Signature::new();
    let mut sorts = BTreeMap::new();
    let mut site = doc.site.as_deref().map(|r| site_relative(path, r)).transpose()?;
    for (name, reference) in &doc.sorts {
        sig.add_sort(name).map_err(lang)?;
        let p = load_presheaf_file(&resolve(path, reference))?;
        match &site {
            Some(s) if **s != **p.site() => {
                return Err(IoError::Inconsistent {
                    file: label(path),
                    detail: format!("sort {name} lives over a different site"),
                })
            }
            Some(_) => {}
            None => site = Some(p.site().clone()),
        }
        sorts.insert(name.clone(), p);
    }
    let site = site.ok_or_else(|| IoError::Inconsistent {
        file: label(path),
        detail: "no site: declare one or at least one sort".into(),
    })?;
    // rebuild every sort over the one shared site value
    let sorts: BTreeMap<String, Presheaf> = sorts
        .into_iter()
        .map(|(n, p)| {
            let q = Presheaf::from_raw(&site, &p.to_raw()).expect("same site by value");
            (n, q)
        })
        .collect();
    for (name, f) in &doc.functions {
        let args: Vec<&str> = f.args.iter().map(String::as_str).collect();
        sig.add_function(name, &args, &f.result).map_err(lang)?;
    }
    for (name, r) in &doc.relations {
        let args: Vec<&str> = r.args.iter().map(String::as_str).collect();
        sig.add_relation(name, &args).map_err(lang)?;
    }
    let bare = SemanticEnvironment::new(site.clone(), sig.clone(), sorts.clone(), BTreeMap::new(), BTreeMap::new())
        .map_err(lang)?;
    let mut functions = BTreeMap::new();
    for (name, f) in &doc.functions {
        let src = tuple_object(&bare, &f.args).map_err(lang)?;
        let tgt = bare.sort(&f.result).map_err(lang)?;
        functions.insert(name.clone(), load_nat_file(&resolve(path, &f.nat), &src, tgt)?);
    }
    let mut relations = BTreeMap::new();
    for (name, r) in &doc.relations {
        let ambient = tuple_object(&bare, &r.args).map_err(lang)?;
        relations.insert(name.clone(), load_sub_file(&resolve(path, &r.sub), &ambient)?);
    }
    SemanticEnvironment::new(site, sig, sorts, functions, relations).map_err(lang)
}

/// A builtin environment name or an environment file path.
pub fn load_env(reference: &str) -> Result<SemanticEnvironment, IoError> {
    if let Ok(env) = gallery::builtin(reference) {
        return Ok(env);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(IoError::UnknownReference(reference.to_string()));
    }
    load_env_file(path)
}

/// Writes `env` as a directory of files loadable with [`load_env_file`] on
/// `dir/env.json`. Returns the written paths.
pub fn export_env(env: &SemanticEnvironment, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::Write {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    let mut put = |name: String, value: &dyn erased::Json| -> Result<String, IoError> {
        let path = dir.join(&name);
        value.write(&path)?;
        written.push(path);
        Ok(name)
    };
    let site_file = put("site.json".into(), &SiteDoc::from_site(env.site()))?;
    let mut sorts = IndexMap::new();
    for name in env.signature().sorts() {
        let p = env.sort(name).map_err(|source| IoError::Lang { file: "env".into(), source })?;
        let raw = p.to_raw();
        let doc = PresheafDoc {
            site: site_file.clone(),
            sets: raw.sets,
            actions: raw.actions,
        };
        sorts.insert(name.clone(), put(format!("{name}.presheaf.json"), &doc)?);
    }
    let mut functions = BTreeMap::new();
    for (name, fs) in env.signature().functions() {
        let Ok(nat) = env.function(name) else { continue };
        let doc = NatDoc {
            site: site_file.clone(),
            src: None,
            tgt: sorts.get(&fs.result).cloned(),
            components: nat.to_raw().components,
        };
        let nat = put(format!("{name}.nat.json"), &doc)?;
        functions.insert(
            name.clone(),
            FunctionDoc {
                args: fs.args.clone(),
                result: fs.result.clone(),
                nat,
            },
        );
    }
    let mut relations = BTreeMap::new();
    for (name, args) in env.signature().relations() {
        let Ok(sub) = env.relation(name) else { continue };
        let ambient = match args.as_slice() {
            [single] => sorts.get(single).cloned(),
            _ => None,
        };
        let doc = SubDoc {
            ambient,
            parts: sub.to_labels(),
        };
        let sub = put(format!("{name}.sub.json"), &doc)?;
        relations.insert(
            name.clone(),
            RelationDoc {
                args: args.clone(),
                sub,
            },
        );
    }
    let doc = EnvDoc {
        site: Some(site_file),
        sorts,
        functions,
        relations,
    };
    put("env.json".into(), &doc)?;
    Ok(written)
}

/// Writes a presheaf file referring to `site_ref`.
pub fn write_presheaf(path: &Path, p: &Presheaf, site_ref: &str) -> Result<(), IoError> {
    let raw = p.to_raw();
    write_json(
        path,
        &PresheafDoc {
            site: site_ref.to_string(),
            sets: raw.sets,
            actions: raw.actions,
        },
    )
}

/// Writes a site file.
pub fn write_site(path: &Path, site: &FinCat) -> Result<(), IoError> {
    write_json(path, &SiteDoc::from_site(site))
}

mod erased {
    use super::*;

    pub trait Json {
        fn write(&self, path: &Path) -> Result<(), IoError>;
    }

    impl<T: Serialize> Json for T {
        fn write(&self, path: &Path) -> Result<(), IoError> {
            write_json(path, self)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_doc_round_trip() {
        for name in ["terminal", "sierpinski", "crown"] {
            let site = builtin_site(name).unwrap();
            let doc = SiteDoc::from_site(&site);
            let text = serde_json::to_string(&doc).unwrap();
            let back: SiteDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(FinCat::validate(&back.to_raw()).unwrap(), site);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"objects": ["a"], "arrows": []}"#;
        assert!(serde_json::from_str::<SiteDoc>(text).is_err());
    }

    #[test]
    fn builtin_refs_resolve_first() {
        assert_eq!(*load_site("crown").unwrap(), crate::site::crown());
        assert!(load_env("set01").is_ok());
        assert!(matches!(load_env("no/such/env.json"), Err(IoError::UnknownReference(_))));
    }
}
