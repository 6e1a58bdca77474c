//! Cache files, JSON eigenform documents, a rayon executor and the
//! `siegel` command-line interface on top of `siegel-core`.

pub mod app;
pub mod cache;
pub mod form_doc;
pub mod parallel;
