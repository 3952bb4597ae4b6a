//! Projections: filtered views of a document.
//!
//! A projection is data, not a live view. Each selected block keeps its
//! source [`Location`] so a woven projection can link back into the full
//! document.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use regex::Regex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indexes;
use crate::model::{packet_location, Block, BlockRef, Document, Locator, Location, PacketId, PredicateIndicator, RelId, RelationKey};
use crate::versions;

/// Which index an index-based projection or export reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Crossref,
    Versions,
    Words,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::Crossref => "crossref",
            IndexKind::Versions => "versions",
            IndexKind::Words => "words",
        })
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crossref" => Ok(IndexKind::Crossref),
            "versions" => Ok(IndexKind::Versions),
            "words" => Ok(IndexKind::Words),
            _ => Err(Error::UnresolvableScope(format!("unknown index `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Criterion {
    Manual { ids: Vec<String> },
    Regex { pattern: String },
    Recursive { relations: Vec<RelId> },
    Version { name: String },
    Index { index: IndexKind, key: String },
}

/// What a projected block shows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Item {
    Paragraph { id: String },
    Relation { id: RelId },
    /// A single packet shown under its relation's title.
    Packet { relation: RelId, packet: PacketId },
}

impl Item {
    /// Element id of the selected block.
    pub fn id(&self) -> &str {
        match self {
            Item::Paragraph { id } => id,
            Item::Relation { id } => id.as_str(),
            Item::Packet { packet, .. } => packet.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Projected {
    pub location: Location,
    pub item: Item,
}

/// A regex match widened to whole words, as a byte span inside the text of
/// the element `id` (paragraph text or packet source).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Highlight {
    pub location: Location,
    pub id: String,
    pub span: Range<usize>,
}

/// A goal with no definition reference that is not a direct recursive call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unresolved {
    pub relation: RelId,
    pub packet: PacketId,
    pub indicator: PredicateIndicator,
    pub span: Range<usize>,
}

impl fmt::Display for Unresolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UNRESOLVED {} in {} ({})", self.indicator, self.packet, self.relation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Projection {
    pub criterion: Criterion,
    pub blocks: Vec<Projected>,
    pub highlights: Vec<Highlight>,
    pub unresolved: Vec<Unresolved>,
}

impl Projection {
    fn new(criterion: Criterion, blocks: Vec<Projected>) -> Self {
        Projection {
            criterion,
            blocks,
            highlights: Vec::new(),
            unresolved: Vec::new(),
        }
    }

    /// Ids of the selected blocks, in order.
    pub fn ids(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.item.id()).collect()
    }
}

fn whole(b: &BlockRef<'_>) -> Projected {
    let item = match b.block {
        Block::Paragraph(p) => Item::Paragraph { id: p.id.clone() },
        Block::Relation(r) => Item::Relation { id: r.id.clone() },
    };
    Projected {
        location: b.location(),
        item,
    }
}

fn packet_item(locator: &Locator, relation: &RelId, packet: &PacketId) -> Projected {
    Projected {
        location: locator.expect(packet.as_str()),
        item: Item::Packet {
            relation: relation.clone(),
            packet: packet.clone(),
        },
    }
}

/// The paragraphs and relation definitions enclosing `ids`, once each, in
/// document order. Clause ids (`PACKET#n`) and packet ids select their whole
/// relation definition.
pub fn project_manual(doc: &Document, ids: &[&str]) -> Result<Projection> {
    let locator = Locator::new(doc);
    let blocks = doc.blocks();
    let by_pos: HashMap<(&crate::model::SectionNumber, usize), &BlockRef<'_>> =
        blocks.iter().map(|b| ((&b.section.number, b.ordinal), b)).collect();
    let mut picked = BTreeSet::new();
    for id in ids {
        let loc = locator
            .get(id)
            .ok_or_else(|| Error::UnknownElement((*id).to_owned()))?;
        picked.insert((loc.section.clone(), loc.ordinal));
    }
    let selected = picked
        .iter()
        .map(|(s, o)| whole(by_pos[&(s, *o)]))
        .collect();
    Ok(Projection::new(
        Criterion::Manual {
            ids: ids.iter().map(|s| (*s).to_owned()).collect(),
        },
        selected,
    ))
}

fn widen(text: &str, m: Range<usize>) -> Range<usize> {
    let start = text[..m.start]
        .rfind(char::is_whitespace)
        .map_or(0, |i| i + text[i..].chars().next().map_or(1, char::len_utf8));
    let end = text[m.end..]
        .find(char::is_whitespace)
        .map_or(text.len(), |i| m.end + i);
    start..end
}

/// Every paragraph and packet containing a non-empty match of `pattern`.
/// Highlights cover the whole whitespace-delimited words around each match.
pub fn project_regex(doc: &Document, pattern: &str) -> Result<Projection> {
    let re = Regex::new(pattern).map_err(|e| Error::BadPattern(e.to_string()))?;
    let mut blocks = Vec::new();
    let mut highlights = Vec::new();
    let mut scan = |location: Location, item: Item, text: &str| {
        let mut hit = false;
        let mut last: Option<Range<usize>> = None;
        for m in re.find_iter(text) {
            if m.is_empty() {
                continue;
            }
            hit = true;
            let w = widen(text, m.range());
            if last.as_ref() == Some(&w) {
                continue;
            }
            last = Some(w.clone());
            highlights.push(Highlight {
                location: location.clone(),
                id: item.id().to_owned(),
                span: w,
            });
        }
        if hit {
            blocks.push(Projected { location, item });
        }
    };
    for b in doc.blocks() {
        match b.block {
            Block::Paragraph(p) => scan(b.location(), Item::Paragraph { id: p.id.clone() }, &p.text),
            Block::Relation(r) => {
                let at = b.location();
                for (i, p) in r.packets.iter().enumerate() {
                    let item = Item::Packet {
                        relation: r.id.clone(),
                        packet: p.id.clone(),
                    };
                    scan(packet_location(&at, i, &p.id), item, &p.raw_text);
                }
            }
        }
    }
    Ok(Projection {
        criterion: Criterion::Regex {
            pattern: pattern.to_owned(),
        },
        blocks,
        highlights,
        unresolved: Vec::new(),
    })
}

pub(crate) fn unresolved_in(doc: &Document, relation: &RelId, packet: &PacketId) -> Vec<Unresolved> {
    let Some((r, p)) = doc.packet(packet.as_str()) else {
        return Vec::new();
    };
    let key = r.key();
    p.goals()
        .filter(|g| g.def_ref.is_none() && !key.matches(&g.indicator))
        .map(|g| Unresolved {
            relation: relation.clone(),
            packet: packet.clone(),
            indicator: g.indicator.clone(),
            span: g.span.clone(),
        })
        .collect()
}

/// The packets on the reference chains of `relations`, in chain order,
/// with the goals that still lack a definition reference.
pub fn project_recursive(doc: &Document, relations: &[&str]) -> Result<Projection> {
    let locator = Locator::new(doc);
    let mut seen = HashSet::new();
    let mut blocks = Vec::new();
    let mut unresolved = Vec::new();
    for r in relations {
        for step in versions::chain(doc, r, None)? {
            if seen.insert(step.packet.clone()) {
                unresolved.extend(unresolved_in(doc, &step.relation, &step.packet));
                blocks.push(packet_item(&locator, &step.relation, &step.packet));
            }
        }
    }
    Ok(Projection {
        criterion: Criterion::Recursive {
            relations: relations.iter().map(|r| RelId::from(*r)).collect(),
        },
        blocks,
        highlights: Vec::new(),
        unresolved,
    })
}

/// The packets of a named version, in chain order.
pub fn project_version(doc: &Document, name: &str) -> Result<Projection> {
    let locator = Locator::new(doc);
    let blocks = versions::resolve(doc, name)?
        .into_iter()
        .map(|(r, p)| packet_item(&locator, &r.id, &p.id))
        .collect();
    Ok(Projection::new(
        Criterion::Version {
            name: name.to_owned(),
        },
        blocks,
    ))
}

/// The blocks one index entry points at: the relations of a version, the
/// relation definitions sharing an indicator, or the blocks marking a word.
pub fn project_index(doc: &Document, index: IndexKind, key: &str) -> Result<Projection> {
    let unknown = || Error::UnknownEntry(format!("{index} `{key}`"));
    let wanted: HashSet<String> = match index {
        IndexKind::Versions => {
            if doc.version(key).is_none() {
                return Err(unknown());
            }
            versions::resolve(doc, key)?
                .into_iter()
                .map(|(r, _)| r.id.to_string())
                .collect()
        }
        IndexKind::Crossref => {
            let Ok(k) = key.parse::<RelationKey>();
            let ids: HashSet<String> = doc
                .relations()
                .filter(|r| r.key() == k)
                .map(|r| r.id.to_string())
                .collect();
            if ids.is_empty() {
                return Err(unknown());
            }
            ids
        }
        IndexKind::Words => {
            let entry = indexes::word_index(doc)
                .into_iter()
                .find(|e| e.word == key)
                .ok_or_else(unknown)?;
            let locs: HashSet<_> = entry.locs.iter().map(|l| (&l.section, l.ordinal)).collect();
            doc.blocks()
                .iter()
                .filter(|b| locs.contains(&(&b.section.number, b.ordinal)))
                .map(|b| b.block.id().to_owned())
                .collect()
        }
    };
    let blocks = doc
        .blocks()
        .iter()
        .filter(|b| wanted.contains(b.block.id()))
        .map(whole)
        .collect();
    Ok(Projection::new(
        Criterion::Index {
            index,
            key: key.to_owned(),
        },
        blocks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widen_to_word() {
        let t = "foo bar(baz) qux";
        assert_eq!(widen(t, 5..7), 4..12);
        assert_eq!(widen(t, 0..1), 0..3);
        assert_eq!(widen(t, 14..16), 13..16);
    }

    #[test]
    fn index_kind_names() {
        for k in [IndexKind::Crossref, IndexKind::Versions, IndexKind::Words] {
            assert_eq!(k.to_string().parse::<IndexKind>().unwrap(), k);
        }
        assert!("nope".parse::<IndexKind>().is_err());
    }
}
