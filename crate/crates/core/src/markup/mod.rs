//! The `.lw` plain-text document format.
//!
//! Directives start with `@` in column 1:
//!
//! ```text
//! @title Sorting by insertion
//! @author A. Writer
//! @date 2001
//! @keywords CLP, sorting
//!
//! @section Introduction
//! @para intro
//! Prose with an @ix{index} mark.
//! @endpara
//! @relation R_sort isort/2
//! @comment
//! Sorts a list.
//! @endcomment
//! @packet P_sort
//! isort([], []).
//! isort([X|Xs], S) :- isort(Xs, S0), insert(X, S0, S)^R_ins.
//! @endpacket
//! @cpr P_sort
//! @endrelation
//! @endsection
//!
//! @version V1 root=R_sort R_sort=P_sort R_ins=P_ins
//! ```
//!
//! Sections nest; a section's blocks precede its subsections. Packet bodies
//! are Prolog text, kept verbatim.

mod clause;
mod lexer;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

pub use clause::{line_col, parse_clauses};

use crate::diag::{has_errors, Code, Diagnostic, Position};
use crate::error::{Error, Result};
use crate::model::{
    validate, Block, ClausePacket, Document, PacketId, Paragraph, RelId, RelationDefinition,
    RelationKey, Section, SectionNumber, VersionBinding,
};

/// A UTF-8 source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        SourceFile {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
        })?;
        Ok(SourceFile::new(path, text))
    }
}

/// Where elements were found in the source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    /// Directive line of each element, in order of appearance.
    elements: HashMap<String, Vec<usize>>,
    /// First body line of packets, paragraphs.
    bodies: HashMap<String, usize>,
    versions: HashMap<String, usize>,
    /// `@cpr` line of each relation.
    cprs: HashMap<String, usize>,
    title: Option<usize>,
    last_line: usize,
}

impl SourceMap {
    /// Best source position for a diagnostic produced from the document.
    pub fn position(&self, doc: &Document, d: &Diagnostic) -> Position {
        let fallback = Position {
            line: self.title.unwrap_or(1),
            column: 1,
        };
        let Some(el) = d.element.as_deref() else {
            return fallback;
        };
        if let (Some(offset), Some(&body)) = (d.offset, self.bodies.get(el)) {
            let text = doc
                .packet(el)
                .map(|(_, p)| p.raw_text.as_str())
                .or_else(|| {
                    doc.blocks().into_iter().find_map(|b| match b.block {
                        Block::Paragraph(p) if p.id == el => Some(p.text.as_str()),
                        _ => None,
                    })
                });
            if let Some(text) = text {
                let (line, column) = line_col(text, offset);
                return Position {
                    line: body + line - 1,
                    column,
                };
            }
        }
        if d.code == Code::DanglingCpr {
            if let Some(&line) = self.cprs.get(el) {
                return Position { line, column: 1 };
            }
        }
        if let Some(lines) = self.elements.get(el) {
            let line = if d.code == Code::DupId {
                *lines.last().unwrap()
            } else {
                lines[0]
            };
            return Position { line, column: 1 };
        }
        if let Some(&line) = self.versions.get(el) {
            return Position { line, column: 1 };
        }
        fallback
    }
}

/// A document together with its source map.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub document: Document,
    pub source_map: SourceMap,
}

struct Line<'s> {
    no: usize,
    text: &'s str,
}

struct Directive<'s> {
    name: &'s str,
    rest: &'s str,
}

fn directive<'s>(text: &'s str) -> Option<Directive<'s>> {
    let body = text.strip_prefix('@')?;
    if body.starts_with("ix{") {
        return None;
    }
    let (name, rest) = match body.find(char::is_whitespace) {
        Some(i) => (&body[..i], body[i..].trim()),
        None => (body, ""),
    };
    Some(Directive { name, rest })
}

struct Reader<'s> {
    lines: Vec<Line<'s>>,
    i: usize,
    diags: Vec<Diagnostic>,
    map: SourceMap,
    doc: Document,
}

impl<'s> Reader<'s> {
    fn new(text: &'s str) -> Self {
        let lines: Vec<Line<'s>> = text
            .lines()
            .enumerate()
            .map(|(i, text)| Line { no: i + 1, text })
            .collect();
        let map = SourceMap {
            last_line: lines.len().max(1),
            ..SourceMap::default()
        };
        Reader {
            lines,
            i: 0,
            diags: Vec::new(),
            map,
            doc: Document::default(),
        }
    }

    fn err(&mut self, line: usize, code: Code, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, msg).at(line, 1));
    }

    fn note(&mut self, id: &str, line: usize) {
        self.map.elements.entry(id.to_owned()).or_default().push(line);
    }

    /// Collects lines up to `@<end>`. Returns the text and its first line.
    fn text_block(&mut self, end: &str, opened: usize) -> (String, usize) {
        let first = self.i + 1;
        let mut body: Vec<&str> = Vec::new();
        while self.i < self.lines.len() {
            let line = &self.lines[self.i];
            if let Some(d) = directive(line.text) {
                if d.name == end {
                    self.i += 1;
                    return (body.join("\n"), first);
                }
                let (no, name) = (line.no, d.name.to_owned());
                self.err(no, Code::UnterminatedBlock, format!("`@{name}` inside a block; expected `@{end}`"));
                return (body.join("\n"), first);
            }
            body.push(line.text);
            self.i += 1;
        }
        self.err(opened, Code::UnterminatedBlock, format!("block is never closed with `@{end}`"));
        (body.join("\n"), first)
    }

    /// Handles directives that may appear anywhere outside a text block.
    /// Returns false if `d` is not one of them.
    fn document_directive(&mut self, d: &Directive<'_>, no: usize) -> bool {
        match d.name {
            "title" => {
                if self.map.title.is_some() {
                    self.err(no, Code::Syntax, "duplicate `@title`");
                }
                self.doc.title = d.rest.to_owned();
                self.map.title = Some(no);
            }
            "author" => self.doc.authors.push(d.rest.to_owned()),
            "date" => {
                if self.doc.date.is_some() {
                    self.err(no, Code::Syntax, "duplicate `@date`");
                }
                self.doc.date = Some(d.rest.to_owned());
            }
            "keywords" => self.doc.keywords.extend(
                d.rest
                    .split(',')
                    .map(str::trim)
                    .filter(|k| !k.is_empty())
                    .map(str::to_owned),
            ),
            "bib" => {
                self.i += 1;
                let (text, _) = self.text_block("endbib", no);
                self.doc.bibliography.push(text);
                return true;
            }
            "version" => self.version(d.rest, no),
            _ => return false,
        }
        self.i += 1;
        true
    }

    fn version(&mut self, rest: &str, no: usize) {
        let mut words = rest.split_whitespace();
        let Some(name) = words.next() else {
            self.err(no, Code::BadVersion, "`@version` needs a name");
            return;
        };
        let mut root = None;
        let mut bindings = BTreeMap::new();
        for w in words {
            let Some((k, v)) = w.split_once('=') else {
                self.err(no, Code::BadVersion, format!("expected `REL=PACKET`, found `{w}`"));
                return;
            };
            if k == "root" {
                root = Some(RelId::from(v));
            } else if bindings.insert(RelId::from(k), PacketId::from(v)).is_some() {
                self.err(no, Code::BadVersion, format!("relation `{k}` is bound twice"));
            }
        }
        let Some(root) = root else {
            self.err(no, Code::BadVersion, format!("version `{name}` has no `root=`"));
            return;
        };
        self.map.versions.entry(name.to_owned()).or_insert(no);
        self.doc.version_table.push(VersionBinding {
            name: name.to_owned(),
            root,
            bindings,
        });
    }

    fn document(&mut self) {
        while self.i < self.lines.len() {
            let (no, text) = (self.lines[self.i].no, self.lines[self.i].text);
            let Some(d) = directive(text) else {
                if !text.trim().is_empty() {
                    self.err(no, Code::StrayText, "text outside any block");
                }
                self.i += 1;
                continue;
            };
            if self.document_directive(&d, no) {
                continue;
            }
            self.i += 1;
            match d.name {
                "section" => {
                    let number = SectionNumber(vec![self.doc.sections.len() as u32 + 1]);
                    let s = self.section(number, d.rest, no);
                    self.doc.sections.push(s);
                }
                "para" | "relation" => {
                    self.err(no, Code::Syntax, format!("`@{}` must be inside a section", d.name))
                }
                n if KNOWN.contains(&n) => {
                    self.err(no, Code::Syntax, format!("unexpected `@{n}`"))
                }
                n => self.err(no, Code::UnknownDirective, format!("unknown directive `@{n}`")),
            }
        }
    }

    fn section(&mut self, number: SectionNumber, heading: &str, opened: usize) -> Section {
        let mut s = Section {
            number,
            heading: heading.to_owned(),
            blocks: Vec::new(),
            children: Vec::new(),
        };
        while self.i < self.lines.len() {
            let (no, text) = (self.lines[self.i].no, self.lines[self.i].text);
            let Some(d) = directive(text) else {
                if !text.trim().is_empty() {
                    self.err(no, Code::StrayText, "text outside any block");
                }
                self.i += 1;
                continue;
            };
            if self.document_directive(&d, no) {
                continue;
            }
            self.i += 1;
            match d.name {
                "endsection" => return s,
                "section" => {
                    let number = s.number.child(s.children.len() as u32 + 1);
                    let child = self.section(number, d.rest, no);
                    s.children.push(child);
                }
                "para" | "relation" => {
                    if !s.children.is_empty() {
                        self.err(
                            no,
                            Code::Syntax,
                            "blocks of a section must come before its subsections",
                        );
                    }
                    let block = if d.name == "para" {
                        let ordinal = s.blocks.len() + 1;
                        let id = if d.rest.is_empty() {
                            format!("para-{}-{ordinal}", s.number)
                        } else {
                            d.rest.to_owned()
                        };
                        let (text, first) = self.text_block("endpara", no);
                        self.note(&id, no);
                        self.map.bodies.insert(id.clone(), first);
                        Block::Paragraph(Paragraph { id, text })
                    } else {
                        match self.relation(d.rest, no) {
                            Some(r) => Block::Relation(r),
                            None => continue,
                        }
                    };
                    s.blocks.push(block);
                }
                n if KNOWN.contains(&n) => {
                    self.err(no, Code::Syntax, format!("unexpected `@{n}` in a section"))
                }
                n => self.err(no, Code::UnknownDirective, format!("unknown directive `@{n}`")),
            }
        }
        self.err(opened, Code::UnterminatedBlock, "section is never closed with `@endsection`");
        s
    }

    fn relation(&mut self, header: &str, opened: usize) -> Option<RelationDefinition> {
        let (id, title) = match header.split_once(char::is_whitespace) {
            Some((id, title)) => (id, title.trim()),
            None => (header, ""),
        };
        let ok = !id.is_empty() && !title.is_empty();
        if !ok {
            self.err(opened, Code::Syntax, "expected `@relation <REL_ID> <name>[/<arity>]`");
        }
        let Ok(key) = title.parse::<RelationKey>();
        let mut r = RelationDefinition {
            id: RelId::from(id),
            name: key.name,
            arity: key.arity,
            comment: None,
            assertions: None,
            packets: Vec::new(),
            cpr: PacketId::default(),
        };
        self.note(id, opened);
        let mut cpr_seen = false;
        while self.i < self.lines.len() {
            let (no, text) = (self.lines[self.i].no, self.lines[self.i].text);
            let Some(d) = directive(text) else {
                if !text.trim().is_empty() {
                    self.err(no, Code::StrayText, "text outside any block");
                }
                self.i += 1;
                continue;
            };
            self.i += 1;
            match d.name {
                "endrelation" => return ok.then_some(r),
                "comment" | "assert" => {
                    let end = if d.name == "comment" { "endcomment" } else { "endassert" };
                    let (text, _) = self.text_block(end, no);
                    let slot = if d.name == "comment" { &mut r.comment } else { &mut r.assertions };
                    if slot.is_some() {
                        self.err(no, Code::Syntax, format!("duplicate `@{}`", d.name));
                    }
                    *slot = Some(text);
                }
                "packet" => {
                    if d.rest.is_empty() || d.rest.contains(char::is_whitespace) {
                        self.err(no, Code::Syntax, "expected `@packet <PKT_ID>`");
                    }
                    let (raw, first) = self.text_block("endpacket", no);
                    self.note(d.rest, no);
                    self.map.bodies.insert(d.rest.to_owned(), first);
                    let clauses = match parse_clauses(&raw) {
                        Ok(cs) => cs,
                        Err(ds) => {
                            for mut diag in ds {
                                if let Some(p) = diag.position.as_mut() {
                                    p.line += first - 1;
                                }
                                self.diags.push(diag.element(d.rest));
                            }
                            Vec::new()
                        }
                    };
                    r.packets.push(ClausePacket {
                        id: PacketId::from(d.rest),
                        raw_text: raw,
                        clauses,
                    });
                }
                "cpr" => {
                    if cpr_seen {
                        self.err(no, Code::Syntax, "duplicate `@cpr`");
                    }
                    cpr_seen = true;
                    r.cpr = PacketId::from(d.rest);
                    self.map.cprs.insert(r.id.to_string(), no);
                }
                n if KNOWN.contains(&n) => {
                    self.err(no, Code::Syntax, format!("`@{n}` is not allowed inside a relation"))
                }
                n => self.err(no, Code::UnknownDirective, format!("unknown directive `@{n}`")),
            }
        }
        self.err(opened, Code::UnterminatedBlock, "relation is never closed with `@endrelation`");
        ok.then_some(r)
    }
}

const KNOWN: &[&str] = &[
    "title", "author", "date", "keywords", "bib", "endbib", "version", "section", "endsection",
    "para", "endpara", "relation", "endrelation", "comment", "endcomment", "assert", "endassert",
    "packet", "endpacket", "cpr",
];

/// Reads `text` without checking document invariants.
///
/// Fails only on syntax errors; structural problems are left for
/// [`validate`].
pub fn parse_lenient(text: &str) -> std::result::Result<Parsed, Vec<Diagnostic>> {
    let mut r = Reader::new(text);
    r.document();
    if r.diags.is_empty() {
        Ok(Parsed {
            document: r.doc,
            source_map: r.map,
        })
    } else {
        Err(r.diags)
    }
}

fn positioned(parsed: &Parsed, diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    diags
        .into_iter()
        .map(|mut d| {
            if d.position.is_none() {
                d.position = Some(parsed.source_map.position(&parsed.document, &d));
            }
            d
        })
        .collect()
}

/// Reads a document. Fails on syntax errors and on any error-severity
/// validation diagnostic; warnings do not prevent success.
pub fn parse(text: &str) -> std::result::Result<Parsed, Vec<Diagnostic>> {
    let parsed = parse_lenient(text)?;
    let diags = validate(&parsed.document);
    if has_errors(&diags) {
        let errors = diags.into_iter().filter(Diagnostic::is_error).collect();
        return Err(positioned(&parsed, errors));
    }
    Ok(parsed)
}

/// Syntax verification: all parse and validation diagnostics, with source
/// positions. Empty means the document is well-formed.
pub fn check(text: &str) -> Vec<Diagnostic> {
    match parse_lenient(text) {
        Err(diags) => diags,
        Ok(parsed) => {
            let diags = validate(&parsed.document);
            positioned(&parsed, diags)
        }
    }
}

/// Reads and parses a file, turning diagnostics into [`Error::Invalid`].
pub fn load(path: impl AsRef<Path>) -> Result<(SourceFile, Parsed)> {
    let src = SourceFile::read(path)?;
    let parsed = parse(&src.text).map_err(Error::Invalid)?;
    Ok((src, parsed))
}

fn text_lines(out: &mut String, text: &str) {
    if !text.is_empty() {
        out.push_str(text);
        out.push('\n');
    }
}

/// Renders a version binding as its `@version` line (without newline).
pub fn render_version(v: &VersionBinding) -> String {
    let mut line = format!("@version {} root={}", v.name, v.root);
    for (rel, pkt) in &v.bindings {
        line.push_str(&format!(" {rel}={pkt}"));
    }
    line
}

fn render_section(out: &mut String, s: &Section) {
    out.push_str(&format!("@section {}\n", s.heading));
    for b in &s.blocks {
        match b {
            Block::Paragraph(p) => {
                out.push_str(&format!("@para {}\n", p.id));
                text_lines(out, &p.text);
                out.push_str("@endpara\n");
            }
            Block::Relation(r) => {
                out.push_str(&format!("@relation {} {}\n", r.id, r.key()));
                if let Some(c) = &r.comment {
                    out.push_str("@comment\n");
                    text_lines(out, c);
                    out.push_str("@endcomment\n");
                }
                if let Some(a) = &r.assertions {
                    out.push_str("@assert\n");
                    text_lines(out, a);
                    out.push_str("@endassert\n");
                }
                for p in &r.packets {
                    out.push_str(&format!("@packet {}\n", p.id));
                    text_lines(out, &p.raw_text);
                    out.push_str("@endpacket\n");
                }
                out.push_str(&format!("@cpr {}\n", r.cpr));
                out.push_str("@endrelation\n");
            }
        }
    }
    for c in &s.children {
        render_section(out, c);
    }
    out.push_str("@endsection\n");
}

/// Writes `doc` in the `.lw` format. `parse(render(doc))` reproduces `doc`.
pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    out.push_str(&format!("@title {}\n", doc.title));
    for a in &doc.authors {
        out.push_str(&format!("@author {a}\n"));
    }
    if let Some(d) = &doc.date {
        out.push_str(&format!("@date {d}\n"));
    }
    if !doc.keywords.is_empty() {
        out.push_str(&format!("@keywords {}\n", doc.keywords.join(", ")));
    }
    for s in &doc.sections {
        out.push('\n');
        render_section(&mut out, s);
    }
    for b in &doc.bibliography {
        out.push_str("\n@bib\n");
        text_lines(&mut out, b);
        out.push_str("@endbib\n");
    }
    if !doc.version_table.is_empty() {
        out.push('\n');
    }
    for v in &doc.version_table {
        out.push_str(&render_version(v));
        out.push('\n');
    }
    out
}

/// Replaces the `@version` lines of `source` with `doc`'s version table,
/// leaving every other line untouched. New lines go where the first old one
/// was, or at the end of the file.
pub fn rewrite_versions(source: &str, doc: &Document) -> String {
    let rendered: Vec<String> = doc.version_table.iter().map(render_version).collect();
    let mut out = String::with_capacity(source.len());
    let mut placed = false;
    for line in source.lines() {
        if directive(line).is_some_and(|d| d.name == "version") {
            if !placed {
                for v in &rendered {
                    out.push_str(v);
                    out.push('\n');
                }
                placed = true;
            }
            continue;
        }
        out.push_str(line);
        out.push('\n');
    }
    if !placed && !rendered.is_empty() {
        if !out.ends_with("\n\n") && !out.is_empty() {
            out.push('\n');
        }
        for v in &rendered {
            out.push_str(v);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "@title T\n@section S\n@para\nsome @ix{text}\n@endpara\n@relation R p/0\n@packet P\np.\n@endpacket\n@cpr P\n@endrelation\n@endsection\n";

    #[test]
    fn reads_small_document() {
        let p = parse(SMALL).unwrap();
        let doc = p.document;
        assert_eq!(doc.title, "T");
        let blocks = doc.blocks();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].block.id(), "para-1-1");
        assert_eq!(doc.relation("R").unwrap().cpd().unwrap().clauses.len(), 1);
    }

    #[test]
    fn empty_file_lacks_title() {
        let d = check("");
        assert!(d.iter().any(|d| d.code == Code::MissingTitle));
        assert!(d.iter().all(|d| d.position.unwrap().line == 1));
    }

    #[test]
    fn title_without_relation() {
        let d = check("@title T\n@section S\n@endsection\n");
        let codes: Vec<Code> = d.iter().map(|d| d.code).collect();
        assert_eq!(codes, [Code::NoRelation]);
    }

    #[test]
    fn unterminated_blocks() {
        let d = check("@title T\n@section S\n@para\ntext\n");
        assert!(d.iter().any(|d| d.code == Code::UnterminatedBlock));
        let d = check("@title T\n@section S\n@para\ntext\n@relation R p\n");
        assert_eq!(d[0].code, Code::UnterminatedBlock);
        assert_eq!(d[0].position.unwrap().line, 5);
    }

    #[test]
    fn stray_and_unknown() {
        let d = check("@title T\nhello\n@frobnicate\n");
        assert_eq!(d[0].code, Code::StrayText);
        assert_eq!(d[1].code, Code::UnknownDirective);
        assert_eq!(d[1].position.unwrap().line, 3);
    }

    #[test]
    fn clause_errors_point_into_the_file() {
        let src = SMALL.replace("p.\n", "p :- q(.\n");
        let d = check(&src);
        assert_eq!(d[0].code, Code::Syntax);
        assert_eq!(d[0].position.unwrap().line, 8);
    }

    #[test]
    fn dangling_cpr_is_positioned_at_its_line() {
        let src = SMALL.replace("@cpr P", "@cpr P9");
        let d = check(&src);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::DanglingCpr);
        assert_eq!(d[0].position.unwrap().line, 10);
        assert!(parse(&src).is_err());
    }

    #[test]
    fn ix_lines_are_text() {
        let src = SMALL.replace("some @ix{text}", "@ix{text} first");
        assert!(check(&src).is_empty());
    }

    #[test]
    fn rewrite_keeps_other_lines() {
        let mut doc = parse(SMALL).unwrap().document;
        doc.version_table.push(VersionBinding {
            name: "V1".into(),
            root: "R".into(),
            bindings: [("R".into(), "P".into())].into_iter().collect(),
        });
        let out = rewrite_versions(SMALL, &doc);
        assert!(out.starts_with(SMALL));
        assert!(out.ends_with("\n\n@version V1 root=R R=P\n"));
        doc.version_table.clear();
        let back = rewrite_versions(&out, &doc);
        assert_eq!(back.trim_end(), SMALL.trim_end());
    }
}
