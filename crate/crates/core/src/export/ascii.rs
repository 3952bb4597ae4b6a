use super::{badges, code, matched_words, resolve, Indexes, Scope, View};
use crate::error::Result;
use crate::indexes::strip_marks;
use crate::model::{Block, ClausePacket, Document, Location, RelationDefinition, Section};
use crate::projections::{IndexKind, Item};

const RULE: &str = "----";

fn heading(out: &mut String, text: &str, ch: char) {
    out.push_str(text);
    out.push('\n');
    out.extend(std::iter::repeat(ch).take(text.chars().count()));
    out.push_str("\n\n");
}

fn section_char(depth: usize) -> char {
    match depth {
        1 => '=',
        2 => '-',
        _ => '~',
    }
}

fn prose(out: &mut String, text: &str) {
    let t = strip_marks(text);
    let t = t.trim_matches('\n');
    if !t.is_empty() {
        out.push_str(t);
        out.push_str("\n\n");
    }
}

fn packet(out: &mut String, r: &RelationDefinition, p: &ClausePacket) {
    let current = if p.id == r.cpr { " [current]" } else { "" };
    out.push_str(&format!("Packet {}{current}\n{RULE}\n", p.id));
    out.push_str(&code(p));
    out.push_str(&format!("\n{RULE}\n\n"));
}

fn relation_head(out: &mut String, doc: &Document, r: &RelationDefinition) {
    let mut title = format!("Relation {} ({})", r.key(), r.id);
    let vs = badges(doc, r);
    if !vs.is_empty() {
        title.push_str(&format!(" [{}]", vs.join(", ")));
    }
    heading(out, &title, '.');
    if let Some(c) = &r.comment {
        prose(out, c);
    }
    if let Some(a) = &r.assertions {
        out.push_str("Assertions:\n");
        prose(out, a);
    }
}

fn relation(out: &mut String, doc: &Document, r: &RelationDefinition) {
    relation_head(out, doc, r);
    for p in &r.packets {
        packet(out, r, p);
    }
}

fn section(out: &mut String, doc: &Document, s: &Section) {
    heading(out, &format!("{} {}", s.number, s.heading), section_char(s.number.depth()));
    for b in &s.blocks {
        match b {
            Block::Paragraph(p) => prose(out, &p.text),
            Block::Relation(r) => relation(out, doc, r),
        }
    }
    for c in &s.children {
        section(out, doc, c);
    }
}

fn locs(ls: &[Location]) -> String {
    ls.iter().map(Location::label).collect::<Vec<_>>().join(", ")
}

fn index(out: &mut String, kind: IndexKind, ix: &Indexes) {
    match kind {
        IndexKind::Crossref => {
            heading(out, "Cross Reference Index", '=');
            for e in &ix.crossref {
                let mut line = e.indicator.to_string();
                for (tag, ls) in [("[def]", &e.relation_locs), ("[cpd]", &e.cpd_locs), ("[use]", &e.use_locs)] {
                    if !ls.is_empty() {
                        line.push_str(&format!("  {tag} {}", locs(ls)));
                    }
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
        IndexKind::Versions => {
            heading(out, "Versions Index", '=');
            for e in &ix.versions {
                let first = e.first_defined.as_ref().map_or_else(|| "?".to_owned(), Location::label);
                let members: Vec<String> = e.members.iter().map(|(r, l)| format!("{r} {l}")).collect();
                out.push_str(&format!("{}  first defined {first}: {}\n", e.version_name, members.join(", ")));
                for d in &e.problems {
                    out.push_str(&format!("  {d}\n"));
                }
            }
        }
        IndexKind::Words => {
            heading(out, "Word Index", '=');
            for e in &ix.words {
                out.push_str(&format!("{}  {}\n", e.word, locs(&e.locs)));
            }
        }
    }
    out.push('\n');
}

fn front(out: &mut String, doc: &Document) {
    heading(out, &doc.title, '#');
    let mut by = Vec::new();
    if !doc.authors.is_empty() {
        by.push(doc.authors.join(", "));
    }
    if let Some(d) = &doc.date {
        by.push(d.clone());
    }
    if !by.is_empty() {
        out.push_str(&by.join(". "));
        out.push('\n');
    }
    if !doc.keywords.is_empty() {
        out.push_str(&format!("Keywords: {}\n", doc.keywords.join(", ")));
    }
    if !by.is_empty() || !doc.keywords.is_empty() {
        out.push('\n');
    }
}

/// Plain text. Section headings are underlined, index styles appear as
/// `[def]`, `[cpd]` and `[use]` tags, and packet code is written unindented
/// between `----` lines. A packet scope yields exactly the packet's code.
pub fn export_ascii(doc: &Document, scope: &Scope) -> Result<String> {
    let mut out = String::new();
    match resolve(doc, scope)? {
        View::Packet { packet, .. } => {
            out.push_str(&code(packet));
            out.push('\n');
        }
        View::Whole(ix) => {
            front(&mut out, doc);
            out.push_str("Contents\n");
            for s in doc.all_sections() {
                let indent = "  ".repeat(s.number.depth());
                out.push_str(&format!("{indent}{} {}\n", s.number, s.heading));
            }
            out.push('\n');
            for s in &doc.sections {
                section(&mut out, doc, s);
            }
            if !doc.bibliography.is_empty() {
                heading(&mut out, "References", '=');
                for b in &doc.bibliography {
                    prose(&mut out, b);
                }
            }
            for k in [IndexKind::Crossref, IndexKind::Versions, IndexKind::Words] {
                index(&mut out, k, &ix);
            }
        }
        View::Index(k, ix) => index(&mut out, k, &ix),
        View::Items {
            heading: h,
            blocks,
            highlights,
            unresolved,
        } => {
            heading(&mut out, &h, '#');
            for b in &blocks {
                out.push_str(&format!("[{}]\n", b.location));
                match &b.item {
                    Item::Paragraph { id } => {
                        if let Some(Block::Paragraph(p)) = doc.blocks().iter().map(|b| b.block).find(|x| x.id() == id) {
                            prose(&mut out, &p.text);
                        }
                    }
                    Item::Relation { id } => {
                        if let Some(r) = doc.relation(id.as_str()) {
                            relation(&mut out, doc, r);
                        }
                    }
                    Item::Packet { relation: rid, packet: pid } => {
                        if let Some(r) = doc.relation(rid.as_str()) {
                            relation_head(&mut out, doc, r);
                            if let Some(p) = r.packet(pid.as_str()) {
                                packet(&mut out, r, p);
                            }
                        }
                    }
                }
                let words = matched_words(doc, &highlights, b.item.id());
                if !words.is_empty() {
                    out.push_str(&format!("Matches: {}\n\n", words.join(", ")));
                }
            }
            if !unresolved.is_empty() {
                heading(&mut out, "Unresolved goals", '=');
                for u in &unresolved {
                    out.push_str(&format!("{u}\n"));
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}
