//! Finite presheaf toposes and their internal logic.
//!
//! A [`site::FinCat`] is a finite category; presheaves over it are the
//! objects of the topos. [`logic`] provides subobjects, the subobject
//! classifier and the quantifiers, [`lang`] a typed first-order language
//! interpreted in the topos, and [`forcing`] an independent Kripke–Joyal
//! evaluator for the same language. [`gallery`] holds ready-made
//! environments and [`witness`] brute-force searches for presheaves with
//! prescribed properties.

mod closure;

pub mod forcing;
pub mod gallery;
pub mod io;
pub mod iso;
pub mod lang;
pub mod logic;
pub mod presheaf;
pub mod site;
pub mod witness;

use thiserror::Error;

/// Any error raised by this crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error(transparent)]
    Site(#[from] site::SiteError),
    #[error(transparent)]
    Presheaf(#[from] presheaf::PresheafError),
    #[error(transparent)]
    Logic(#[from] logic::LogicError),
    #[error(transparent)]
    Lang(#[from] lang::LangError),
    #[error(transparent)]
    Forcing(#[from] forcing::ForcingError),
    #[error(transparent)]
    Gallery(#[from] gallery::GalleryError),
    #[error(transparent)]
    Search(#[from] witness::SearchError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}
