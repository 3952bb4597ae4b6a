//! In-memory document representation.
//!
//! A [`Document`] is a report: front matter, a tree of numbered sections, and
//! within them paragraphs and relation definitions. Relation definitions own
//! one or more packets of clauses; the packet designated by the relation's
//! current predicate reference (`cpr`) is its current definition.
//!
//! Documents are values. Editing operations return a new document.

mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;

use serde::Serialize;

pub use validate::validate;

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

id_type!(
    /// Author-supplied relation id. Usable as a `^REL_ID` goal suffix, so
    /// restricted to `[A-Za-z_][A-Za-z0-9_]*`.
    RelId
);
id_type!(
    /// Author-supplied packet id.
    PacketId
);

/// Dotted section number, e.g. `1.2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SectionNumber(pub Vec<u32>);

impl SectionNumber {
    pub fn child(&self, k: u32) -> SectionNumber {
        let mut v = self.0.clone();
        v.push(k);
        SectionNumber(v)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for SectionNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SectionNumber {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split('.')
            .map(str::parse)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SectionNumber)
    }
}

impl Serialize for SectionNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Stable document coordinate.
///
/// `section` and `ordinal` identify the enclosing block; `part` orders the
/// packets inside a relation definition (0 for the block itself); `anchor`
/// is the exporter anchor of the most specific element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Location {
    pub section: SectionNumber,
    pub ordinal: usize,
    #[serde(skip)]
    pub part: usize,
    pub anchor: String,
}

impl Location {
    /// Anchor of the enclosing block, `loc-<section>-<ordinal>`.
    pub fn block_anchor(&self) -> String {
        format!("loc-{}-{}", self.section, self.ordinal)
    }

    /// The display form, followed by the packet id for packet locations,
    /// so the packets of one relation stay distinguishable in indexes.
    pub fn label(&self) -> String {
        match self.anchor.strip_prefix("pkt-") {
            Some(p) => format!("{self} ({p})"),
            None => self.to_string(),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "§{}#{}", self.section, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PredicateIndicator {
    pub name: String,
    pub arity: u32,
}

impl PredicateIndicator {
    pub fn new(name: impl Into<String>, arity: u32) -> Self {
        PredicateIndicator {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredicateIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A relation title: a predicate indicator, or a bare name for goal and
/// directive packets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RelationKey {
    pub name: String,
    pub arity: Option<u32>,
}

impl RelationKey {
    pub fn matches(&self, pi: &PredicateIndicator) -> bool {
        self.arity == Some(pi.arity) && self.name == pi.name
    }
}

impl fmt::Display for RelationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arity {
            Some(n) => write!(f, "{}/{n}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

impl std::str::FromStr for RelationKey {
    type Err = std::convert::Infallible;

    /// `name/arity` or a bare `name`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Some((name, arity)) = s.rsplit_once('/') {
            if let Ok(n) = arity.parse() {
                if !name.is_empty() {
                    return Ok(RelationKey {
                        name: name.to_owned(),
                        arity: Some(n),
                    });
                }
            }
        }
        Ok(RelationKey {
            name: s.to_owned(),
            arity: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub indicator: PredicateIndicator,
    pub def_ref: Option<RelId>,
    /// Byte range of the goal term within the packet's raw text.
    pub span: Range<usize>,
    /// Byte range of the `^REL_ID` suffix, when present.
    pub def_ref_span: Option<Range<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// Absent for directives.
    pub head: Option<PredicateIndicator>,
    pub body: Vec<Goal>,
    pub raw_text: String,
    /// Byte range of `raw_text` within the packet's raw text.
    pub span: Range<usize>,
}

impl Clause {
    pub fn is_directive(&self) -> bool {
        self.head.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClausePacket {
    pub id: PacketId,
    pub raw_text: String,
    pub clauses: Vec<Clause>,
}

impl ClausePacket {
    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.clauses.iter().flat_map(|c| c.body.iter())
    }

    /// The packet text with every `^REL_ID` suffix removed.
    pub fn code(&self) -> String {
        let mut cuts: Vec<&Range<usize>> =
            self.goals().filter_map(|g| g.def_ref_span.as_ref()).collect();
        cuts.sort_by_key(|r| r.start);
        let mut out = String::with_capacity(self.raw_text.len());
        let mut at = 0;
        for cut in cuts {
            out.push_str(&self.raw_text[at..cut.start]);
            at = cut.end;
        }
        out.push_str(&self.raw_text[at..]);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDefinition {
    pub id: RelId,
    pub name: String,
    pub arity: Option<u32>,
    pub comment: Option<String>,
    /// Stored and rendered verbatim; never interpreted.
    pub assertions: Option<String>,
    pub packets: Vec<ClausePacket>,
    pub cpr: PacketId,
}

impl RelationDefinition {
    pub fn key(&self) -> RelationKey {
        RelationKey {
            name: self.name.clone(),
            arity: self.arity,
        }
    }

    pub fn packet(&self, id: &str) -> Option<&ClausePacket> {
        self.packets.iter().find(|p| p.id == id)
    }

    /// The current predicate definition.
    pub fn cpd(&self) -> Option<&ClausePacket> {
        self.packet(self.cpr.as_str())
    }

    /// True when `goal` is an unlinked call to this relation itself.
    pub fn is_direct_recursion(&self, goal: &Goal) -> bool {
        goal.def_ref.is_none() && self.key().matches(&goal.indicator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub id: String,
    /// Prose, possibly containing inline `@ix{word}` marks.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Paragraph(Paragraph),
    Relation(RelationDefinition),
}

impl Block {
    pub fn id(&self) -> &str {
        match self {
            Block::Paragraph(p) => &p.id,
            Block::Relation(r) => r.id.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub number: SectionNumber,
    pub heading: String,
    pub blocks: Vec<Block>,
    pub children: Vec<Section>,
}

/// A named program version: a snapshot of one packet per reachable relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionBinding {
    pub name: String,
    pub root: RelId,
    pub bindings: BTreeMap<RelId, PacketId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub title: String,
    pub date: Option<String>,
    pub authors: Vec<String>,
    pub keywords: Vec<String>,
    pub sections: Vec<Section>,
    /// Opaque bibliography blocks.
    pub bibliography: Vec<String>,
    pub version_table: Vec<VersionBinding>,
}

/// A block together with its coordinates, as yielded by [`Document::blocks`].
#[derive(Debug, Clone, Copy)]
pub struct BlockRef<'a> {
    pub section: &'a Section,
    /// 1-based position within the section.
    pub ordinal: usize,
    pub block: &'a Block,
}

impl<'a> BlockRef<'a> {
    pub fn location(&self) -> Location {
        let anchor = match self.block {
            Block::Paragraph(_) => format!("loc-{}-{}", self.section.number, self.ordinal),
            Block::Relation(r) => format!("rel-{}", r.id),
        };
        Location {
            section: self.section.number.clone(),
            ordinal: self.ordinal,
            part: 0,
            anchor,
        }
    }

    pub fn relation(&self) -> Option<&'a RelationDefinition> {
        match self.block {
            Block::Relation(r) => Some(r),
            Block::Paragraph(_) => None,
        }
    }
}

/// Location of the `index`-th packet (0-based) of the relation at `block`.
pub(crate) fn packet_location(block: &Location, index: usize, id: &PacketId) -> Location {
    Location {
        section: block.section.clone(),
        ordinal: block.ordinal,
        part: index + 1,
        anchor: format!("pkt-{id}"),
    }
}

/// Element id of the `n`-th clause (1-based) of a packet.
pub fn clause_id(packet: &PacketId, n: usize) -> String {
    format!("{packet}#{n}")
}

fn relation_mut<'d>(sections: &'d mut [Section], rel: &str) -> Option<&'d mut RelationDefinition> {
    for s in sections {
        for b in &mut s.blocks {
            if let Block::Relation(r) = b {
                if r.id == rel {
                    return Some(r);
                }
            }
        }
        if let Some(r) = relation_mut(&mut s.children, rel) {
            return Some(r);
        }
    }
    None
}

fn walk<'a>(sections: &'a [Section], out: &mut Vec<BlockRef<'a>>) {
    for s in sections {
        for (i, b) in s.blocks.iter().enumerate() {
            out.push(BlockRef {
                section: s,
                ordinal: i + 1,
                block: b,
            });
        }
        walk(&s.children, out);
    }
}

fn walk_sections<'a>(sections: &'a [Section], out: &mut Vec<&'a Section>) {
    for s in sections {
        out.push(s);
        walk_sections(&s.children, out);
    }
}

impl Document {
    /// Every block in document order.
    pub fn blocks(&self) -> Vec<BlockRef<'_>> {
        let mut out = Vec::new();
        walk(&self.sections, &mut out);
        out
    }

    /// Every section in document (pre-)order.
    pub fn all_sections(&self) -> Vec<&Section> {
        let mut out = Vec::new();
        walk_sections(&self.sections, &mut out);
        out
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationDefinition> {
        self.blocks().into_iter().filter_map(|b| b.relation())
    }

    pub fn relation(&self, id: &str) -> Option<&RelationDefinition> {
        self.relations().find(|r| r.id == id)
    }

    /// The packet with `id` and the relation owning it.
    pub fn packet(&self, id: &str) -> Option<(&RelationDefinition, &ClausePacket)> {
        self.relations()
            .find_map(|r| r.packet(id).map(|p| (r, p)))
    }

    pub fn version(&self, name: &str) -> Option<&VersionBinding> {
        self.version_table.iter().find(|v| v.name == name)
    }

    /// Location of the block enclosing `id`.
    ///
    /// Accepts paragraph, relation, packet and clause (`PKT#n`) ids.
    pub fn locate(&self, id: &str) -> Result<Location> {
        Locator::new(self)
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownElement(id.to_owned()))
    }

    /// All relations titled `name` (and `arity`, when given), in document
    /// order.
    pub fn find_relation(&self, name: &str, arity: Option<u32>) -> Vec<&RelationDefinition> {
        self.relations()
            .filter(|r| r.name == name && arity.map_or(true, |n| r.arity == Some(n)))
            .collect()
    }

    /// Versions whose bindings include `rel`, in table order.
    pub fn versions_of(&self, rel: &RelId) -> Vec<&VersionBinding> {
        self.version_table
            .iter()
            .filter(|v| v.bindings.contains_key(rel))
            .collect()
    }

    fn map_relation(
        &self,
        rel: &str,
        f: impl FnOnce(&mut RelationDefinition) -> Result<()>,
    ) -> Result<Document> {
        let mut doc = self.clone();
        let r = relation_mut(&mut doc.sections, rel)
            .ok_or_else(|| Error::UnknownRelation(rel.to_owned()))?;
        f(r)?;
        Ok(doc)
    }

    /// Points the current predicate reference of `rel` at `packet`.
    pub fn with_cpr(&self, rel: &str, packet: &str) -> Result<Document> {
        self.map_relation(rel, |r| {
            if r.packet(packet).is_none() {
                return Err(Error::ForeignPacket {
                    relation: rel.to_owned(),
                    packet: packet.to_owned(),
                });
            }
            r.cpr = PacketId::from(packet);
            Ok(())
        })
    }

    /// Appends a packet to `rel`.
    pub fn with_packet(&self, rel: &str, packet: ClausePacket) -> Result<Document> {
        self.map_relation(rel, |r| {
            r.packets.push(packet);
            Ok(())
        })
    }

    /// Removes the packet `id` from whichever relation owns it. Version
    /// bindings are left alone, so they may go stale.
    pub fn without_packet(&self, id: &str) -> Result<Document> {
        let (rel, _) = self
            .packet(id)
            .ok_or_else(|| Error::UnknownElement(id.to_owned()))?;
        let rel = rel.id.clone();
        self.map_relation(rel.as_str(), |r| {
            r.packets.retain(|p| p.id != id);
            Ok(())
        })
    }
}

/// Precomputed element-id → Location table.
#[derive(Debug, Clone, Default)]
pub struct Locator {
    map: HashMap<String, Location>,
}

impl Locator {
    pub fn new(doc: &Document) -> Self {
        let mut map = HashMap::new();
        for b in doc.blocks() {
            let loc = b.location();
            if let Block::Relation(r) = b.block {
                for (i, p) in r.packets.iter().enumerate() {
                    let ploc = packet_location(&loc, i, &p.id);
                    for n in 1..=p.clauses.len() {
                        map.entry(clause_id(&p.id, n)).or_insert_with(|| ploc.clone());
                    }
                    map.entry(p.id.0.clone()).or_insert(ploc);
                }
            }
            map.entry(b.block.id().to_owned()).or_insert(loc);
        }
        Locator { map }
    }

    pub fn get(&self, id: &str) -> Option<&Location> {
        self.map.get(id)
    }

    pub fn expect(&self, id: &str) -> Location {
        self.map
            .get(id)
            .cloned()
            .unwrap_or_else(|| panic!("element `{id}` has no location"))
    }
}

/// True if `s` is a valid relation id.
pub fn is_rel_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "root"
}

/// True if `s` is a valid packet, paragraph or version id.
pub fn is_element_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_number_order_is_document_order() {
        let n = |s: &str| s.parse::<SectionNumber>().unwrap();
        let mut v = vec![n("2"), n("1.2"), n("1"), n("1.1"), n("1.10"), n("1.2.1")];
        v.sort();
        let shown: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["1", "1.1", "1.2", "1.2.1", "1.10", "2"]);
    }

    #[test]
    fn relation_key_parses_bare_names() {
        let k: RelationKey = "a/1".parse().unwrap();
        assert_eq!(k.arity, Some(1));
        let k: RelationKey = "main".parse().unwrap();
        assert_eq!((k.name.as_str(), k.arity), ("main", None));
        let k: RelationKey = "=../2".parse().unwrap();
        assert_eq!((k.name.as_str(), k.arity), ("=..", Some(2)));
    }

    #[test]
    fn ids() {
        assert!(is_rel_id("R_a11"));
        assert!(!is_rel_id("R-a"));
        assert!(!is_rel_id("root"));
        assert!(!is_rel_id("1x"));
        assert!(is_element_id("P1.v2"));
        assert!(!is_element_id("P1#2"));
        assert!(!is_element_id(""));
    }
}
