//! Cross reference, versions and word indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Display;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Serialize, Serializer};

use crate::diag::{Code, Diagnostic};
use crate::error::Error;
use crate::model::{packet_location, Block, Document, Location, RelId, RelationKey};
use crate::versions;

/// Typographic role of a location in the cross reference index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// A relation title.
    Definition,
    /// The packet a current predicate reference designates.
    Current,
    /// A linked goal, or a direct recursive call.
    Use,
}

impl Style {
    /// Tag used by plain-text output.
    pub fn tag(self) -> &'static str {
        match self {
            Style::Definition => "[def]",
            Style::Current => "[cpd]",
            Style::Use => "[use]",
        }
    }
}

fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossRefEntry {
    #[serde(serialize_with = "display")]
    pub indicator: RelationKey,
    pub relation_locs: Vec<Location>,
    pub cpd_locs: Vec<Location>,
    pub use_locs: Vec<Location>,
}

impl CrossRefEntry {
    /// Every location with its style, definitions first.
    pub fn styled(&self) -> impl Iterator<Item = (Style, &Location)> {
        let tag = |st: Style| move |l| (st, l);
        self.relation_locs
            .iter()
            .map(tag(Style::Definition))
            .chain(self.cpd_locs.iter().map(tag(Style::Current)))
            .chain(self.use_locs.iter().map(tag(Style::Use)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionIndexEntry {
    pub version_name: String,
    /// Location of the root relation's bound packet.
    pub first_defined: Option<Location>,
    /// Relations of the version in chain order.
    pub members: Vec<(RelId, Location)>,
    /// Why the version no longer resolves, if it does not.
    pub problems: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordIndexEntry {
    pub word: String,
    pub locs: Vec<Location>,
}

/// The Cross Reference Index: every relation title, current predicate
/// definition and linked use, grouped by indicator regardless of version.
pub fn cross_reference_index(doc: &Document) -> Vec<CrossRefEntry> {
    #[derive(Default)]
    struct Acc {
        defs: BTreeSet<Location>,
        cpds: BTreeSet<Location>,
        uses: BTreeSet<Location>,
    }
    let mut by_key: BTreeMap<RelationKey, Acc> = BTreeMap::new();
    let keys: HashMap<&str, RelationKey> = doc.relations().map(|r| (r.id.as_str(), r.key())).collect();

    for b in doc.blocks() {
        let Some(r) = b.relation() else { continue };
        let at = b.location();
        let key = r.key();
        for (i, p) in r.packets.iter().enumerate() {
            let ploc = packet_location(&at, i, &p.id);
            if p.id == r.cpr {
                by_key.entry(key.clone()).or_default().cpds.insert(ploc.clone());
            }
            for g in p.goals() {
                let target = match &g.def_ref {
                    Some(t) => keys.get(t.as_str()).cloned(),
                    None if r.is_direct_recursion(g) => Some(key.clone()),
                    None => None,
                };
                if let Some(t) = target {
                    by_key.entry(t).or_default().uses.insert(ploc.clone());
                }
            }
        }
        by_key.entry(key).or_default().defs.insert(at);
    }

    by_key
        .into_iter()
        .map(|(indicator, a)| CrossRefEntry {
            indicator,
            relation_locs: a.defs.into_iter().collect(),
            cpd_locs: a.cpds.into_iter().collect(),
            use_locs: a.uses.into_iter().collect(),
        })
        .collect()
}

fn problem(version: &str, e: &Error) -> Diagnostic {
    let code = match e {
        Error::DanglingDef { .. } => Code::DanglingDef,
        Error::UnknownRelation(_) => Code::BadVersion,
        _ => Code::StaleBinding,
    };
    Diagnostic::new(code, format!("version `{version}` does not resolve: {e}"))
}

/// The Versions Index: for each named version, where it was first defined
/// and the relations that make it up.
pub fn versions_index(doc: &Document) -> Vec<VersionIndexEntry> {
    let locator = crate::model::Locator::new(doc);
    let mut out: Vec<VersionIndexEntry> = doc
        .version_table
        .iter()
        .map(|v| {
            let first_defined = v
                .bindings
                .get(&v.root)
                .and_then(|p| locator.get(p.as_str()))
                .or_else(|| locator.get(v.root.as_str()))
                .cloned();
            match versions::resolve(doc, &v.name) {
                Ok(pairs) => VersionIndexEntry {
                    version_name: v.name.clone(),
                    first_defined,
                    members: pairs
                        .into_iter()
                        .map(|(r, _)| (r.id.clone(), locator.expect(r.id.as_str())))
                        .collect(),
                    problems: Vec::new(),
                },
                Err(e) => VersionIndexEntry {
                    version_name: v.name.clone(),
                    first_defined,
                    members: Vec::new(),
                    problems: vec![problem(&v.name, &e)],
                },
            }
        })
        .collect();
    out.sort_by(|a, b| a.version_name.cmp(&b.version_name));
    out
}

pub(crate) fn ix_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@ix\{([^{}]*)\}").expect("static pattern"))
}

/// Replaces each `@ix{word}` mark by its word.
pub fn strip_marks(text: &str) -> String {
    ix_regex().replace_all(text, "$1").into_owned()
}

/// The word index built from `@ix{word}` marks in paragraphs, relation
/// comments and assertions.
pub fn word_index(doc: &Document) -> Vec<WordIndexEntry> {
    let mut words: BTreeMap<String, BTreeSet<Location>> = BTreeMap::new();
    for b in doc.blocks() {
        let texts: Vec<&str> = match b.block {
            Block::Paragraph(p) => vec![p.text.as_str()],
            Block::Relation(r) => r
                .comment
                .iter()
                .chain(r.assertions.iter())
                .map(String::as_str)
                .collect(),
        };
        for t in texts {
            for m in ix_regex().captures_iter(t) {
                let w = m[1].trim();
                if !w.is_empty() {
                    words.entry(w.to_owned()).or_default().insert(b.location());
                }
            }
        }
    }
    words
        .into_iter()
        .map(|(word, locs)| WordIndexEntry {
            word,
            locs: locs.into_iter().collect(),
        })
        .collect()
}

/// One JSON object per line.
pub fn to_json_lines<T: Serialize>(entries: &[T]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("index entries serialize"));
        out.push('\n');
    }
    out
}
