//! Weaving: ASCII, LaTeX and HTML output for a whole document or a scope
//! of it.
//!
//! Every format shares the same anchors, which double as HTML ids and
//! LaTeX labels: `rel-<REL_ID>`, `pkt-<PKT_ID>`, `ver-<name>`,
//! `loc-<section>-<ordinal>` and `sec-<section>`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::indexes::{self, CrossRefEntry, VersionIndexEntry, WordIndexEntry};
use crate::model::{ClausePacket, Document, RelationDefinition};
use crate::projections::{self, Criterion, Highlight, IndexKind, Projected, Projection, Unresolved};

mod ascii;
mod html;
mod latex;

pub use ascii::export_ascii;
pub use html::{export_html, HtmlSite};
pub use latex::{escape as latex_escape, export_latex};

/// What part of a document to weave.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Whole,
    Version(String),
    Packet(String),
    Index(IndexKind),
    Projection(Projection),
}

impl FromStr for Scope {
    type Err = Error;

    /// `whole`, `version:NAME`, `packet:ID` or `index:KIND`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "whole" {
            return Ok(Scope::Whole);
        }
        match s.split_once(':') {
            Some(("version", n)) if !n.is_empty() => Ok(Scope::Version(n.to_owned())),
            Some(("packet", id)) if !id.is_empty() => Ok(Scope::Packet(id.to_owned())),
            Some(("index", k)) => Ok(Scope::Index(k.parse()?)),
            _ => Err(Error::UnresolvableScope(format!("cannot read scope `{s}`"))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Whole => f.write_str("whole"),
            Scope::Version(n) => write!(f, "version:{n}"),
            Scope::Packet(id) => write!(f, "packet:{id}"),
            Scope::Index(k) => write!(f, "index:{k}"),
            Scope::Projection(p) => f.write_str(&describe(&p.criterion)),
        }
    }
}

fn describe(c: &Criterion) -> String {
    match c {
        Criterion::Manual { ids } => format!("Selection: {}", ids.join(", ")),
        Criterion::Regex { pattern } => format!("Matches of {pattern}"),
        Criterion::Recursive { relations } => {
            let r: Vec<&str> = relations.iter().map(|r| r.as_str()).collect();
            format!("Chain of {}", r.join(", "))
        }
        Criterion::Version { name } => format!("Version {name}"),
        Criterion::Index { index, key } => format!("Index {index}: {key}"),
    }
}

/// The three indexes of a document.
pub(crate) struct Indexes {
    pub crossref: Vec<CrossRefEntry>,
    pub versions: Vec<VersionIndexEntry>,
    pub words: Vec<WordIndexEntry>,
}

impl Indexes {
    pub fn build(doc: &Document) -> Self {
        Indexes {
            crossref: indexes::cross_reference_index(doc),
            versions: indexes::versions_index(doc),
            words: indexes::word_index(doc),
        }
    }
}

/// A scope resolved against its document.
pub(crate) enum View<'d> {
    Whole(Indexes),
    Items {
        heading: String,
        blocks: Vec<Projected>,
        highlights: Vec<Highlight>,
        unresolved: Vec<Unresolved>,
    },
    Packet {
        relation: &'d RelationDefinition,
        packet: &'d ClausePacket,
    },
    Index(IndexKind, Indexes),
}

fn unresolvable(e: Error) -> Error {
    match e {
        Error::UnresolvableScope(_) => e,
        e => Error::UnresolvableScope(format!("{}: {e}", e.code())),
    }
}

pub(crate) fn resolve<'d>(doc: &'d Document, scope: &Scope) -> Result<View<'d>> {
    let items = |p: Projection| View::Items {
        heading: describe(&p.criterion),
        blocks: p.blocks,
        highlights: p.highlights,
        unresolved: p.unresolved,
    };
    Ok(match scope {
        Scope::Whole => View::Whole(Indexes::build(doc)),
        Scope::Version(n) => items(projections::project_version(doc, n).map_err(unresolvable)?),
        Scope::Packet(id) => {
            let (relation, packet) = doc
                .packet(id)
                .ok_or_else(|| Error::UnresolvableScope(format!("no packet `{id}`")))?;
            View::Packet { relation, packet }
        }
        Scope::Index(k) => View::Index(*k, Indexes::build(doc)),
        Scope::Projection(p) => items(p.clone()),
    })
}

/// The packet's code without definition references or surrounding blank
/// lines.
pub(crate) fn code(p: &ClausePacket) -> String {
    p.code().trim_matches('\n').to_owned()
}

/// The whole words a regex projection matched inside element `id`.
pub(crate) fn matched_words(doc: &Document, highlights: &[Highlight], id: &str) -> Vec<String> {
    let blocks = doc.blocks();
    let mut text = None;
    let mut cuts: Vec<std::ops::Range<usize>> = Vec::new();
    for b in &blocks {
        match b.block {
            crate::model::Block::Paragraph(p) if p.id == id => text = Some(p.text.as_str()),
            crate::model::Block::Relation(r) => {
                if let Some(p) = r.packet(id) {
                    text = Some(p.raw_text.as_str());
                    cuts = p.goals().filter_map(|g| g.def_ref_span.clone()).collect();
                }
            }
            _ => {}
        }
    }
    let Some(text) = text else { return Vec::new() };
    highlights
        .iter()
        .filter(|h| h.id == id)
        .filter_map(|h| {
            text.get(h.span.clone())?;
            // Definition references are not part of the displayed code.
            let mut word = String::new();
            let mut at = h.span.start;
            let mut inside: Vec<_> = cuts
                .iter()
                .filter(|c| c.start < h.span.end && c.end > h.span.start)
                .collect();
            inside.sort_by_key(|c| c.start);
            for c in inside {
                if c.start > at {
                    word.push_str(&text[at..c.start]);
                }
                at = at.max(c.end);
            }
            if at < h.span.end {
                word.push_str(&text[at..h.span.end]);
            }
            Some(crate::indexes::strip_marks(&word))
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Version names that bind a relation, for title badges.
pub(crate) fn badges(doc: &Document, r: &RelationDefinition) -> Vec<String> {
    doc.versions_of(&r.id).into_iter().map(|v| v.name.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_syntax() {
        for s in ["whole", "version:V1", "packet:P", "index:crossref"] {
            assert_eq!(s.parse::<Scope>().unwrap().to_string(), s);
        }
        assert!("version:".parse::<Scope>().is_err());
        assert!("index:nope".parse::<Scope>().is_err());
        assert!("elsewhere".parse::<Scope>().is_err());
    }
}
