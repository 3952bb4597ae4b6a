//! Literate programming for constraint logic programs.
//!
//! A `.lw` document interleaves prose with relation definitions, each
//! holding one or more packets of Prolog clauses. This crate reads and
//! writes such documents, names and resolves program versions along their
//! reference chains, builds the cross reference, versions and word indexes,
//! computes projections, tangles runnable programs for an external
//! interpreter, and weaves the document into ASCII, LaTeX and HTML.

pub mod cli;
pub mod diag;
pub mod error;
pub mod export;
pub mod indexes;
pub mod markup;
pub mod model;
pub mod projections;
pub mod testrun;
pub mod versions;

pub use diag::{Code, Diagnostic, Position, Severity};
pub use error::{Error, Result};
pub use model::{
    Block, Clause, ClausePacket, Document, Goal, Location, PacketId, Paragraph,
    PredicateIndicator, RelId, RelationDefinition, RelationKey, Section, SectionNumber,
    VersionBinding,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/markup.md")]
    mod markup {}
    #[doc = include_str!("../../../book/src/versions.md")]
    mod versions {}
    #[doc = include_str!("../../../book/src/indexes.md")]
    mod indexes {}
    #[doc = include_str!("../../../book/src/export.md")]
    mod export {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
