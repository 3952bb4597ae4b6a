use super::{badges, code, matched_words, resolve, Indexes, Scope, View};
use crate::error::Result;
use crate::indexes::strip_marks;
use crate::model::{Block, ClausePacket, Document, Location, RelationDefinition, Section};
use crate::projections::{IndexKind, Item};

/// Escapes text for LaTeX running prose.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '$' | '&' | '#' | '_' | '%' => {
                out.push('\\');
                out.push(c);
            }
            '^' => out.push_str("\\textasciicircum{}"),
            '~' => out.push_str("\\textasciitilde{}"),
            '<' => out.push_str("\\textless{}"),
            '>' => out.push_str("\\textgreater{}"),
            '|' => out.push_str("\\textbar{}"),
            '§' => out.push_str("\\S{}"),
            c => out.push(c),
        }
    }
    out
}

fn sectioning(depth: usize) -> &'static str {
    match depth {
        1 => "section",
        2 => "subsection",
        3 => "subsubsection",
        _ => "paragraph",
    }
}

fn prose(out: &mut String, text: &str) {
    let t = strip_marks(text);
    let t = t.trim_matches('\n');
    if !t.is_empty() {
        out.push_str(&escape(t));
        out.push_str("\n\n");
    }
}

fn packet(out: &mut String, r: &RelationDefinition, p: &ClausePacket) {
    let current = if p.id == r.cpr { " (current)" } else { "" };
    out.push_str(&format!(
        "\\subparagraph{{Packet \\texttt{{{}}}{current}}}\\label{{pkt-{}}}\n",
        escape(p.id.as_str()),
        p.id
    ));
    out.push_str("\\begin{verbatim}\n");
    out.push_str(&code(p));
    out.push_str("\n\\end{verbatim}\n\n");
}

fn relation_head(out: &mut String, doc: &Document, r: &RelationDefinition) {
    let vs = badges(doc, r);
    let badge = if vs.is_empty() {
        String::new()
    } else {
        format!(" [{}]", escape(&vs.join(", ")))
    };
    out.push_str(&format!(
        "\\paragraph{{Relation \\texttt{{{}}}{badge}}}\\label{{rel-{}}}\n\n",
        escape(&r.key().to_string()),
        r.id
    ));
    if let Some(c) = &r.comment {
        prose(out, c);
    }
    if let Some(a) = &r.assertions {
        out.push_str("\\noindent\\textbf{Assertions.}\n");
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
    out.push_str(&format!(
        "\\{}{{{}}}\\label{{sec-{}}}\n\n",
        sectioning(s.number.depth()),
        escape(&s.heading),
        s.number
    ));
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

fn locs(ls: &[Location], style: &str) -> String {
    let items: Vec<String> = ls.iter().map(|l| escape(&l.label())).collect();
    format!("\\{style}{{{}}}", items.join(", "))
}

fn starred(out: &mut String, title: &str) {
    out.push_str(&format!(
        "\\section*{{{title}}}\n\\addcontentsline{{toc}}{{section}}{{{title}}}\n\n"
    ));
}

fn index(out: &mut String, kind: IndexKind, ix: &Indexes) {
    match kind {
        IndexKind::Crossref => {
            starred(out, "Cross Reference Index");
            if ix.crossref.is_empty() {
                return;
            }
            out.push_str("\\begin{description}\n");
            for e in &ix.crossref {
                let mut parts = Vec::new();
                for (style, ls) in [("textit", &e.relation_locs), ("textbf", &e.cpd_locs), ("textrm", &e.use_locs)] {
                    if !ls.is_empty() {
                        parts.push(locs(ls, style));
                    }
                }
                out.push_str(&format!(
                    "\\item[{{\\texttt{{{}}}}}] {}\n",
                    escape(&e.indicator.to_string()),
                    parts.join("; ")
                ));
            }
            out.push_str("\\end{description}\n\n");
        }
        IndexKind::Versions => {
            starred(out, "Versions Index");
            if ix.versions.is_empty() {
                return;
            }
            out.push_str("\\begin{description}\n");
            for e in &ix.versions {
                let first = e.first_defined.as_ref().map_or_else(|| "?".to_owned(), |l| escape(&l.label()));
                let members: Vec<String> = e
                    .members
                    .iter()
                    .map(|(r, l)| format!("\\texttt{{{}}} {}", escape(r.as_str()), escape(&l.to_string())))
                    .collect();
                out.push_str(&format!(
                    "\\item[{{{}}}]\\label{{ver-{}}} first defined {first}: {}\n",
                    escape(&e.version_name),
                    e.version_name,
                    members.join(", ")
                ));
                for d in &e.problems {
                    out.push_str(&format!("\\\\ {}\n", escape(&d.to_string())));
                }
            }
            out.push_str("\\end{description}\n\n");
        }
        IndexKind::Words => {
            starred(out, "Word Index");
            if ix.words.is_empty() {
                return;
            }
            out.push_str("\\begin{description}\n");
            for e in &ix.words {
                out.push_str(&format!("\\item[{{{}}}] {}\n", escape(&e.word), locs(&e.locs, "textrm")));
            }
            out.push_str("\\end{description}\n\n");
        }
    }
}

fn preamble(out: &mut String, doc: &Document, title: &str) {
    out.push_str("\\documentclass{article}\n\\usepackage[T1]{fontenc}\n\\usepackage[utf8]{inputenc}\n\\setcounter{secnumdepth}{3}\n");
    out.push_str(&format!("\\title{{{}}}\n", escape(title)));
    let authors: Vec<String> = doc.authors.iter().map(|a| escape(a)).collect();
    out.push_str(&format!("\\author{{{}}}\n", authors.join(" \\and ")));
    out.push_str(&format!("\\date{{{}}}\n", doc.date.as_deref().map(escape).unwrap_or_default()));
    out.push_str("\\begin{document}\n\\maketitle\n\\tableofcontents\n\n");
    if !doc.keywords.is_empty() {
        out.push_str(&format!(
            "\\noindent\\textbf{{Keywords:}} {}\n\n",
            escape(&doc.keywords.join(", "))
        ));
    }
}

/// A standalone LaTeX document. Sections map to sectioning commands,
/// relation titles to labeled headings carrying their version badges, code
/// to verbatim blocks. Hyperlinks are dropped; the indexes are written as
/// starred sections listed in the table of contents.
pub fn export_latex(doc: &Document, scope: &Scope) -> Result<String> {
    let view = resolve(doc, scope)?;
    let mut out = String::new();
    match view {
        View::Whole(ix) => {
            preamble(&mut out, doc, &doc.title);
            for s in &doc.sections {
                section(&mut out, doc, s);
            }
            if !doc.bibliography.is_empty() {
                starred(&mut out, "References");
                for b in &doc.bibliography {
                    prose(&mut out, b);
                }
            }
            for k in [IndexKind::Crossref, IndexKind::Versions, IndexKind::Words] {
                index(&mut out, k, &ix);
            }
        }
        View::Packet { relation: r, packet: p } => {
            preamble(&mut out, doc, &format!("{}: packet {}", doc.title, p.id));
            relation_head(&mut out, doc, r);
            packet(&mut out, r, p);
        }
        View::Index(k, ix) => {
            preamble(&mut out, doc, &doc.title);
            index(&mut out, k, &ix);
        }
        View::Items {
            heading,
            blocks,
            highlights,
            unresolved,
        } => {
            preamble(&mut out, doc, &format!("{}: {heading}", doc.title));
            for b in &blocks {
                out.push_str(&format!("\\noindent{{\\small {}}}\n\n", escape(&b.location.to_string())));
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
                    out.push_str(&format!("\\noindent Matches: {}\n\n", escape(&words.join(", "))));
                }
            }
            if !unresolved.is_empty() {
                starred(&mut out, "Unresolved goals");
                out.push_str("\\begin{itemize}\n");
                for u in &unresolved {
                    out.push_str(&format!("\\item {}\n", escape(&u.to_string())));
                }
                out.push_str("\\end{itemize}\n\n");
            }
        }
    }
    out.push_str("\\end{document}\n");
    Ok(out)
}
