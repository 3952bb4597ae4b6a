//! Shared fixtures, a random document generator and independent oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use litweave::markup;
use litweave::model::{Block, Document, Location, RelationKey, Section, SectionNumber};
use litweave::export::HtmlSite;
use proptest::prelude::*;
use regex::Regex;

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fig2() -> Document {
    markup::parse(&fixture_text("fig2.lw")).unwrap().document
}

/// The fixture with V1 named at a/1 of 1.1 and V2 at a/1 of 1.2.
pub fn fig2_named() -> Document {
    let d = litweave::versions::name_version(&fig2(), "V1", "R_a11").unwrap();
    litweave::versions::name_version(&d, "V2", "R_a12").unwrap()
}

pub fn stub_interp() -> String {
    format!("sh {}/stub/stub-interp.sh {{file}}", env!("CARGO_MANIFEST_DIR"))
}

// ---------------------------------------------------------------------------
// Random documents

#[derive(Debug, Clone)]
pub enum GenGoal {
    /// Call relation `n` with a definition reference.
    Linked(usize),
    /// Unlinked call to the enclosing relation.
    SelfCall,
    /// Call to a predicate the document does not define.
    Foreign(u8),
    Builtin,
}

#[derive(Debug, Clone)]
pub struct GenRel {
    pub name: &'static str,
    pub arity: u32,
    /// Packets, each a list of clauses, each a list of body goals.
    pub packets: Vec<Vec<Vec<GenGoal>>>,
    pub cpr: usize,
    /// 0..3: top-level section; 3: the subsection of section 1.
    pub slot: usize,
    pub comment: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GenDoc {
    pub rels: Vec<GenRel>,
    /// Paragraph slots and whether each carries an index mark.
    pub paras: Vec<(usize, Option<&'static str>)>,
    pub tops: usize,
    /// Roots of versions to name, as relation indexes.
    pub versions: Vec<usize>,
}

impl GenDoc {
    pub fn rel_id(i: usize) -> String {
        format!("R{i}")
    }

    pub fn packet_id(i: usize, k: usize) -> String {
        format!("R{i}_p{k}")
    }

    fn args(n: u32) -> String {
        if n == 0 {
            String::new()
        } else {
            let v: Vec<String> = (0..n).map(|k| format!("X{k}")).collect();
            format!("({})", v.join(", "))
        }
    }

    fn goal(&self, own: usize, g: &GenGoal) -> String {
        match g {
            GenGoal::Linked(j) => {
                let r = &self.rels[*j];
                format!("{}{}^{}", r.name, Self::args(r.arity), Self::rel_id(*j))
            }
            GenGoal::SelfCall => {
                let r = &self.rels[own];
                format!("{}{}", r.name, Self::args(r.arity))
            }
            GenGoal::Foreign(k) => format!("ext_{k}(X0)"),
            GenGoal::Builtin => "true".into(),
        }
    }

    fn packet_text(&self, i: usize, clauses: &[Vec<GenGoal>]) -> String {
        let r = &self.rels[i];
        let head = format!("{}{}", r.name, Self::args(r.arity));
        let lines: Vec<String> = clauses
            .iter()
            .map(|body| {
                if body.is_empty() {
                    format!("{head}.")
                } else {
                    let goals: Vec<String> = body.iter().map(|g| self.goal(i, g)).collect();
                    format!("{head} :- {}.", goals.join(", "))
                }
            })
            .collect();
        lines.join("\n")
    }

    fn slot_blocks(&self, slot: usize, out: &mut String) {
        for (n, (s, mark)) in self.paras.iter().enumerate() {
            if *s == slot {
                out.push_str(&format!("@para P{n}\nParagraph {n}"));
                if let Some(w) = mark {
                    out.push_str(&format!(" about @ix{{{w}}}"));
                }
                out.push_str(".\n@endpara\n");
            }
        }
        for (i, r) in self.rels.iter().enumerate() {
            if r.slot != slot {
                continue;
            }
            out.push_str(&format!("@relation {} {}/{}\n", Self::rel_id(i), r.name, r.arity));
            if let Some(c) = &r.comment {
                out.push_str(&format!("@comment\n{c}\n@endcomment\n"));
            }
            for (k, p) in r.packets.iter().enumerate() {
                out.push_str(&format!("@packet {}\n{}\n@endpacket\n", Self::packet_id(i, k), self.packet_text(i, p)));
            }
            out.push_str(&format!("@cpr {}\n@endrelation\n", Self::packet_id(i, r.cpr)));
        }
    }

    /// The document's `.lw` source, without versions.
    pub fn source(&self) -> String {
        let mut out = String::from("@title Random document\n@author Gen\n");
        for t in 0..self.tops {
            out.push_str(&format!("@section Top {t}\n"));
            self.slot_blocks(t, &mut out);
            if t == 0 {
                out.push_str("@section Sub\n");
                self.slot_blocks(3, &mut out);
                out.push_str("@endsection\n");
            }
            out.push_str("@endsection\n");
        }
        out
    }

    /// The parsed document with its versions named.
    pub fn document(&self) -> Document {
        let mut doc = markup::parse(&self.source())
            .unwrap_or_else(|d| panic!("generated document is invalid: {d:?}\n{}", self.source()))
            .document;
        for (n, root) in self.versions.iter().enumerate() {
            doc = litweave::versions::name_version(&doc, &format!("V{n}"), &Self::rel_id(*root)).unwrap();
        }
        doc
    }
}

const NAMES: [&str; 4] = ["p", "q", "r", "s"];
const WORDS: [&str; 3] = ["alpha", "beta", "gamma"];

/// Documents with 1 to 12 relations, up to three packets each.
pub fn arb_doc() -> impl Strategy<Value = GenDoc> {
    (1usize..=12, 1usize..=3).prop_flat_map(|(n, tops)| {
        let slot = prop_oneof![0..tops, Just(3usize)];
        let goal = prop_oneof![
            3 => (0..n).prop_map(GenGoal::Linked),
            1 => Just(GenGoal::SelfCall),
            1 => (0u8..3).prop_map(GenGoal::Foreign),
            1 => Just(GenGoal::Builtin),
        ];
        let clause = prop::collection::vec(goal, 0..4);
        let packet = prop::collection::vec(clause, 1..4);
        let rel = (
            prop::sample::select(&NAMES[..]),
            0u32..3,
            prop::collection::vec(packet, 1..4),
            any::<prop::sample::Index>(),
            slot.clone(),
            prop::option::of(Just("A comment.".to_owned())),
        )
            .prop_map(|(name, arity, packets, cpr, slot, comment)| GenRel {
                name,
                arity,
                cpr: cpr.index(packets.len()),
                packets,
                slot,
                comment,
            });
        let para = (slot, prop::option::of(prop::sample::select(&WORDS[..])));
        (
            prop::collection::vec(rel, n..=n),
            prop::collection::vec(para, 0..4),
            prop::collection::vec(0..n, 0..3),
        )
            .prop_map(move |(rels, paras, versions)| GenDoc {
                rels,
                paras,
                tops,
                versions,
            })
    })
}

/// A document together with random packet overrides.
pub fn arb_doc_with_overrides() -> impl Strategy<Value = (GenDoc, BTreeMap<String, String>, usize)> {
    arb_doc().prop_flat_map(|g| {
        let n = g.rels.len();
        let choices: Vec<_> = g
            .rels
            .iter()
            .map(|r| prop::option::of(0..r.packets.len()))
            .collect();
        (Just(g), choices, 0..n).prop_map(|(g, picks, start)| {
            let overrides = picks
                .into_iter()
                .enumerate()
                .filter_map(|(i, k)| k.map(|k| (GenDoc::rel_id(i), GenDoc::packet_id(i, k))))
                .collect();
            (g, overrides, start)
        })
    })
}

// ---------------------------------------------------------------------------
// Oracles

/// Relations reachable from `start` over the definition-reference graph,
/// by fixpoint iteration on the source description.
pub fn reachable(g: &GenDoc, start: usize, overrides: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let selected = |i: usize| -> usize {
        match overrides.get(&GenDoc::rel_id(i)) {
            Some(p) => p.rsplit('p').next().unwrap().parse().unwrap(),
            None => g.rels[i].cpr,
        }
    };
    let mut set: BTreeSet<usize> = [start].into();
    loop {
        let mut next = set.clone();
        for &i in &set {
            for clause in &g.rels[i].packets[selected(i)] {
                for goal in clause {
                    if let GenGoal::Linked(j) = goal {
                        next.insert(*j);
                    }
                }
            }
        }
        if next == set {
            break;
        }
        set = next;
    }
    set.into_iter()
        .map(|i| (GenDoc::rel_id(i), GenDoc::packet_id(i, selected(i))))
        .collect()
}

/// Locations of every block, packet and relation, found by walking the
/// section tree directly.
pub struct Places {
    pub rel: HashMap<String, Location>,
    pub pkt: HashMap<String, Location>,
}

pub fn places(doc: &Document) -> Places {
    fn walk(s: &Section, out: &mut Places) {
        for (i, b) in s.blocks.iter().enumerate() {
            if let Block::Relation(r) = b {
                let at = |anchor: String, part: usize| Location {
                    section: s.number.clone(),
                    ordinal: i + 1,
                    part,
                    anchor,
                };
                out.rel.insert(r.id.to_string(), at(format!("rel-{}", r.id), 0));
                for (k, p) in r.packets.iter().enumerate() {
                    out.pkt.insert(p.id.to_string(), at(format!("pkt-{}", p.id), k + 1));
                }
            }
        }
        for c in &s.children {
            walk(c, out);
        }
    }
    let mut out = Places {
        rel: HashMap::new(),
        pkt: HashMap::new(),
    };
    for s in &doc.sections {
        walk(s, &mut out);
    }
    out
}

/// Expected cross reference entries from an exhaustive scan of every
/// relation, packet and goal.
pub fn crossref_oracle(doc: &Document) -> BTreeMap<String, [BTreeSet<Location>; 3]> {
    let pl = places(doc);
    let rels: Vec<_> = doc.relations().collect();
    let key_of: HashMap<String, RelationKey> = rels.iter().map(|r| (r.id.to_string(), r.key())).collect();
    let mut out: BTreeMap<String, [BTreeSet<Location>; 3]> = BTreeMap::new();
    for r in &rels {
        let k = r.key().to_string();
        out.entry(k.clone()).or_default()[0].insert(pl.rel[r.id.as_str()].clone());
        out.entry(k.clone()).or_default()[1].insert(pl.pkt[r.cpr.as_str()].clone());
        for p in &r.packets {
            for c in &p.clauses {
                for g in &c.body {
                    let target = match &g.def_ref {
                        Some(t) => Some(key_of[t.as_str()].to_string()),
                        None if g.indicator.name == r.name && Some(g.indicator.arity) == r.arity => Some(k.clone()),
                        None => None,
                    };
                    if let Some(t) = target {
                        out.entry(t).or_default()[2].insert(pl.pkt[p.id.as_str()].clone());
                    }
                }
            }
        }
    }
    out
}

/// Word marks found by scanning the source text line by line, as
/// word → set of (section, ordinal).
pub fn word_scan(source: &str) -> BTreeMap<String, BTreeSet<(String, usize)>> {
    let ix = Regex::new(r"@ix\{([^{}]*)\}").unwrap();
    let mut numbers: Vec<u32> = Vec::new();
    let mut children: Vec<u32> = vec![0];
    let mut ordinals: Vec<usize> = Vec::new();
    let mut current: Option<(String, usize)> = None;
    let mut out: BTreeMap<String, BTreeSet<(String, usize)>> = BTreeMap::new();
    for line in source.lines() {
        if line.starts_with("@section") {
            let k = children.last_mut().unwrap();
            *k += 1;
            numbers.push(*k);
            children.push(0);
            ordinals.push(0);
            continue;
        }
        if line.starts_with("@endsection") {
            numbers.pop();
            children.pop();
            ordinals.pop();
            continue;
        }
        if line.starts_with("@para") || line.starts_with("@relation") {
            let o = ordinals.last_mut().unwrap();
            *o += 1;
            let sec: Vec<String> = numbers.iter().map(u32::to_string).collect();
            current = Some((sec.join("."), *o));
            continue;
        }
        if line.starts_with("@endpara") || line.starts_with("@endrelation") {
            current = None;
            continue;
        }
        if let Some(at) = &current {
            for m in ix.captures_iter(line) {
                out.entry(m[1].to_owned()).or_default().insert(at.clone());
            }
        }
    }
    out
}

/// Every href of every HTML file that does not resolve to an emitted
/// anchor or file.
pub fn dangling_links(site: &HtmlSite) -> Vec<String> {
    let id_re = Regex::new(r#"\bid="([^"]*)""#).unwrap();
    let href_re = Regex::new(r#"\bhref="([^"]*)""#).unwrap();
    let ids: HashMap<&str, HashSet<&str>> = site
        .files
        .iter()
        .map(|(name, text)| (name.as_str(), id_re.captures_iter(text).map(|c| c.get(1).unwrap().as_str()).collect()))
        .collect();
    let mut bad = Vec::new();
    for (name, text) in &site.files {
        for c in href_re.captures_iter(text) {
            let h = c.get(1).unwrap().as_str();
            let (file, frag) = match h.split_once('#') {
                Some((f, a)) => (if f.is_empty() { name.as_str() } else { f }, Some(a)),
                None => (h, None),
            };
            let ok = match (ids.get(file), frag) {
                (Some(set), Some(a)) => set.contains(a),
                (Some(_), None) => true,
                (None, _) => false,
            };
            if !ok {
                bad.push(format!("{name}: {h}"));
            }
        }
    }
    bad
}

/// Invokes the command line in-process.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("litweave").chain(args.iter().copied());
    let code = litweave::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn sn(s: &str) -> SectionNumber {
    s.parse().unwrap()
}
