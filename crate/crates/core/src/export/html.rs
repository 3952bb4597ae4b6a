use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use super::{badges, matched_words, resolve, Indexes, Scope, View};
use crate::error::Result;
use crate::indexes::ix_regex;
use crate::model::{Block, ClausePacket, Document, Location, RelationDefinition, Section};
use crate::projections::{IndexKind, Item, Projected};

const STYLE: &str = "\
body { font-family: Georgia, serif; max-width: 52em; margin: 2em auto; padding: 0 1em; line-height: 1.45; }
nav.toc ul { list-style: none; padding-left: 1.2em; }
article.relation { border-left: 3px solid #bbb; padding-left: 1em; margin: 1.5em 0; }
.relation h3 .id { font-weight: normal; color: #666; font-size: 0.85em; }
a.badge { font-size: 0.75em; background: #eef; border: 1px solid #99c; border-radius: 3px; padding: 0 0.3em; margin-left: 0.3em; text-decoration: none; }
div.packet.current h4::after { content: \" (current)\"; font-weight: normal; color: #666; }
pre { background: #f6f6f6; padding: 0.6em; overflow-x: auto; }
a.def { text-decoration: none; border-bottom: 1px dotted #36c; }
.ix { font-style: italic; }
.style-def { font-style: italic; }
.style-cpd { font-weight: bold; }
p.source { font-size: 0.8em; color: #666; }
";

/// Marks an href to be resolved once the page's own anchors are known.
const LATE: char = '\u{1}';

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn href(anchor: &str) -> String {
    format!("href=\"{LATE}{}\"", esc(anchor))
}

/// The files of a woven HTML site, by file name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HtmlSite {
    pub files: BTreeMap<String, String>,
}

impl HtmlSite {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

struct Page<'d> {
    doc: &'d Document,
    out: String,
    ids: HashSet<String>,
}

impl<'d> Page<'d> {
    fn new(doc: &'d Document, title: &str) -> Self {
        let mut out = String::new();
        out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
        out.push_str(&format!("<title>{}</title>\n", esc(title)));
        out.push_str("<link rel=\"stylesheet\" href=\"style.css\">\n</head>\n<body>\n");
        Page {
            doc,
            out,
            ids: HashSet::new(),
        }
    }

    /// ` id="x"` the first time `x` is used on this page, else nothing.
    fn id(&mut self, anchor: &str) -> String {
        if self.ids.insert(anchor.to_owned()) {
            format!(" id=\"{}\"", esc(anchor))
        } else {
            String::new()
        }
    }

    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn front(&mut self) {
        let d = self.doc;
        self.push(&format!("<header>\n<h1>{}</h1>\n", esc(&d.title)));
        let mut by = Vec::new();
        if !d.authors.is_empty() {
            by.push(esc(&d.authors.join(", ")));
        }
        if let Some(date) = &d.date {
            by.push(esc(date));
        }
        if !by.is_empty() {
            self.push(&format!("<p class=\"byline\">{}</p>\n", by.join(". ")));
        }
        if !d.keywords.is_empty() {
            self.push(&format!(
                "<p class=\"keywords\">Keywords: {}</p>\n",
                esc(&d.keywords.join(", "))
            ));
        }
        self.push("</header>\n");
    }

    fn toc(&mut self) {
        fn items(out: &mut String, sections: &[Section]) {
            if sections.is_empty() {
                return;
            }
            out.push_str("<ul>\n");
            for s in sections {
                out.push_str(&format!(
                    "<li><a {}>{} {}</a>",
                    href(&format!("sec-{}", s.number)),
                    s.number,
                    esc(&s.heading)
                ));
                items(out, &s.children);
                out.push_str("</li>\n");
            }
            out.push_str("</ul>\n");
        }
        self.push("<nav class=\"toc\">\n<h2>Contents</h2>\n");
        let mut list = String::new();
        items(&mut list, &self.doc.sections);
        list.push_str(&format!(
            "<ul>\n<li><a {}>Cross Reference Index</a></li>\n<li><a {}>Versions Index</a></li>\n<li><a {}>Word Index</a></li>\n</ul>\n",
            href("index-crossref"),
            href("index-versions"),
            href("index-words")
        ));
        self.push(&list);
        self.push("</nav>\n");
    }

    fn prose(&mut self, text: &str, class: &str) {
        let t = text.trim_matches('\n');
        if t.is_empty() {
            return;
        }
        for para in t.split("\n\n") {
            let mut html = String::new();
            let mut at = 0;
            for m in ix_regex().captures_iter(para) {
                let all = m.get(0).expect("whole match");
                html.push_str(&esc(&para[at..all.start()]));
                html.push_str(&format!("<span class=\"ix\">{}</span>", esc(&m[1])));
                at = all.end();
            }
            html.push_str(&esc(&para[at..]));
            self.push(&format!("<p class=\"{class}\">{html}</p>\n"));
        }
    }

    fn code(&mut self, p: &ClausePacket) {
        let raw = &p.raw_text;
        let mut cuts: Vec<_> = p
            .goals()
            .filter_map(|g| Some((g.span.clone(), g.def_ref_span.clone()?, g.def_ref.clone()?)))
            .collect();
        cuts.sort_by_key(|c| c.0.start);
        let mut html = String::new();
        let mut at = 0;
        for (span, dspan, target) in cuts {
            html.push_str(&esc(&raw[at..span.start]));
            html.push_str(&format!(
                "<a class=\"def\" {}>{}</a>",
                href(&format!("rel-{target}")),
                esc(&raw[span.clone()])
            ));
            html.push_str(&esc(&raw[span.end..dspan.start]));
            at = dspan.end;
        }
        html.push_str(&esc(&raw[at..]));
        self.push(&format!("<pre><code>{}</code></pre>\n", html.trim_matches('\n')));
    }

    fn packet(&mut self, r: &RelationDefinition, p: &ClausePacket) {
        let current = if p.id == r.cpr { " current" } else { "" };
        let id = self.id(&format!("pkt-{}", p.id));
        self.push(&format!(
            "<div class=\"packet{current}\"{id}>\n<h4>Packet {}</h4>\n",
            esc(p.id.as_str())
        ));
        self.code(p);
        self.push("</div>\n");
    }

    fn relation_open(&mut self, r: &RelationDefinition) {
        let id = self.id(&format!("rel-{}", r.id));
        self.push(&format!("<article class=\"relation\"{id}>\n"));
        let mut h = format!(
            "<h3>Relation <code>{}</code> <span class=\"id\">{}</span>",
            esc(&r.key().to_string()),
            esc(r.id.as_str())
        );
        for v in badges(self.doc, r) {
            h.push_str(&format!(
                "<a class=\"badge\" {}>{}</a>",
                href(&format!("ver-{v}")),
                esc(&v)
            ));
        }
        h.push_str("</h3>\n");
        self.push(&h);
        if let Some(c) = &r.comment {
            self.push("<div class=\"comment\">\n");
            self.prose(c, "comment");
            self.push("</div>\n");
        }
        if let Some(a) = &r.assertions {
            self.push(&format!(
                "<div class=\"assert\">\n<h5>Assertions</h5>\n<pre>{}</pre>\n</div>\n",
                esc(a.trim_matches('\n'))
            ));
        }
        self.push(&format!(
            "<p class=\"cpr\">Current predicate reference: <a {}>{}</a></p>\n",
            href(&format!("pkt-{}", r.cpr)),
            esc(r.cpr.as_str())
        ));
    }

    fn relation(&mut self, r: &RelationDefinition) {
        self.relation_open(r);
        for p in &r.packets {
            self.packet(r, p);
        }
        self.push("</article>\n");
    }

    fn paragraph(&mut self, loc: &Location, text: &str) {
        let id = self.id(&loc.block_anchor());
        self.push(&format!("<div class=\"para\"{id}>\n"));
        self.prose(text, "text");
        self.push("</div>\n");
    }

    fn section(&mut self, s: &Section) {
        let depth = (s.number.depth() + 1).min(6);
        let id = self.id(&format!("sec-{}", s.number));
        self.push(&format!(
            "<section{id}>\n<h{depth}>{} {}</h{depth}>\n",
            s.number,
            esc(&s.heading)
        ));
        for (i, b) in s.blocks.iter().enumerate() {
            match b {
                Block::Paragraph(p) => {
                    let loc = Location {
                        section: s.number.clone(),
                        ordinal: i + 1,
                        part: 0,
                        anchor: String::new(),
                    };
                    self.paragraph(&loc, &p.text);
                }
                Block::Relation(r) => self.relation(r),
            }
        }
        for c in &s.children {
            self.section(c);
        }
        self.push("</section>\n");
    }

    fn loc_link(&self, l: &Location, class: &str) -> String {
        format!("<a class=\"{class}\" {}>{}</a>", href(&l.anchor), esc(&l.label()))
    }

    fn index(&mut self, kind: IndexKind, ix: &Indexes) {
        let id = self.id(&format!("index-{kind}"));
        match kind {
            IndexKind::Crossref => {
                self.push(&format!("<section class=\"index\"{id}>\n<h2>Cross Reference Index</h2>\n<dl>\n"));
                for e in &ix.crossref {
                    let mut parts = Vec::new();
                    for (class, ls) in [("style-def", &e.relation_locs), ("style-cpd", &e.cpd_locs), ("style-use", &e.use_locs)] {
                        parts.extend(ls.iter().map(|l| self.loc_link(l, class)));
                    }
                    self.push(&format!(
                        "<dt><code>{}</code></dt><dd>{}</dd>\n",
                        esc(&e.indicator.to_string()),
                        parts.join(", ")
                    ));
                }
            }
            IndexKind::Versions => {
                self.push(&format!("<section class=\"index\"{id}>\n<h2>Versions Index</h2>\n<dl>\n"));
                for e in &ix.versions {
                    let vid = self.id(&format!("ver-{}", e.version_name));
                    let first = e
                        .first_defined
                        .as_ref()
                        .map_or_else(|| "?".to_owned(), |l| self.loc_link(l, "first"));
                    let members: Vec<String> = e
                        .members
                        .iter()
                        .map(|(r, l)| format!("<a class=\"member\" {}>{}</a> {}", href(&format!("rel-{r}")), esc(r.as_str()), esc(&l.to_string())))
                        .collect();
                    let mut dd = format!("first defined {first}; relations: {}", members.join(", "));
                    for d in &e.problems {
                        dd.push_str(&format!("<br><span class=\"problem\">{}</span>", esc(&d.to_string())));
                    }
                    self.push(&format!("<dt{vid}>{}</dt><dd>{dd}</dd>\n", esc(&e.version_name)));
                }
            }
            IndexKind::Words => {
                self.push(&format!("<section class=\"index\"{id}>\n<h2>Word Index</h2>\n<dl>\n"));
                for e in &ix.words {
                    let links: Vec<String> = e.locs.iter().map(|l| self.loc_link(l, "word")).collect();
                    self.push(&format!("<dt>{}</dt><dd>{}</dd>\n", esc(&e.word), links.join(", ")));
                }
            }
        }
        self.push("</dl>\n</section>\n");
    }

    fn whole(&mut self, ix: &Indexes) {
        self.front();
        self.toc();
        self.push("<main>\n");
        for s in &self.doc.sections {
            self.section(s);
        }
        if !self.doc.bibliography.is_empty() {
            self.push("<section class=\"bibliography\">\n<h2>References</h2>\n");
            for b in &self.doc.bibliography {
                self.prose(b, "bib");
            }
            self.push("</section>\n");
        }
        for k in [IndexKind::Crossref, IndexKind::Versions, IndexKind::Words] {
            self.index(k, ix);
        }
        self.push("</main>\n");
    }

    fn item(&mut self, b: &Projected) {
        let doc = self.doc;
        match &b.item {
            Item::Paragraph { id } => {
                let text = doc.blocks().into_iter().find_map(|x| match x.block {
                    Block::Paragraph(p) if p.id == *id => Some(p.text.as_str()),
                    _ => None,
                });
                if let Some(t) = text {
                    self.paragraph(&b.location, t);
                }
            }
            Item::Relation { id } => {
                if let Some(r) = doc.relation(id.as_str()) {
                    self.relation(r);
                }
            }
            Item::Packet { relation, packet } => {
                if let Some(r) = doc.relation(relation.as_str()) {
                    self.relation_open(r);
                    if let Some(p) = r.packet(packet.as_str()) {
                        self.packet(r, p);
                    }
                    self.push("</article>\n");
                }
            }
        }
        self.push(&format!(
            "<p class=\"source\">From <a href=\"document.html#{}\">{}</a></p>\n",
            esc(&b.location.anchor),
            esc(&b.location.to_string())
        ));
    }

    /// Closes the page and resolves deferred links: anchors defined on this
    /// page stay local, the rest point into `fallback`.
    fn finish(mut self, fallback: &str) -> String {
        self.push("</body>\n</html>\n");
        static RE: OnceLock<Regex> = OnceLock::new();
        let re = RE.get_or_init(|| Regex::new("href=\"\u{1}([^\"]*)\"").expect("static pattern"));
        let ids = &self.ids;
        re.replace_all(&self.out, |c: &regex::Captures<'_>| {
            let a = &c[1];
            if ids.contains(&unesc(a)) {
                format!("href=\"#{a}\"")
            } else {
                format!("href=\"{fallback}#{a}\"")
            }
        })
        .into_owned()
    }
}

fn unesc(s: &str) -> String {
    s.replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

fn whole_page(doc: &Document, ix: &Indexes) -> String {
    let mut page = Page::new(doc, &doc.title);
    page.whole(ix);
    page.finish("document.html")
}

/// Static HTML with a single stylesheet and no scripts.
///
/// Current predicate references, definition references, version badges and
/// index entries are links to stable anchors. A whole-document export is
/// `index.html`; any other scope writes the scoped view as `index.html` and
/// the full document as `document.html`, which the view links into.
pub fn export_html(doc: &Document, scope: &Scope) -> Result<HtmlSite> {
    let view = resolve(doc, scope)?;
    let mut site = HtmlSite::default();
    site.files.insert("style.css".into(), STYLE.to_owned());
    let full = |site: &mut HtmlSite, ix: &Indexes| {
        site.files.insert("document.html".into(), whole_page(doc, ix));
    };
    match view {
        View::Whole(ix) => {
            site.files.insert("index.html".into(), whole_page(doc, &ix));
        }
        View::Index(k, ix) => {
            let mut page = Page::new(doc, &doc.title);
            page.push(&format!("<header>\n<h1>{}</h1>\n</header>\n<main>\n", esc(&doc.title)));
            page.index(k, &ix);
            page.push("</main>\n");
            site.files.insert("index.html".into(), page.finish("document.html"));
            full(&mut site, &ix);
        }
        View::Packet { relation, packet } => {
            let mut page = Page::new(doc, &format!("{}: packet {}", doc.title, packet.id));
            page.push(&format!("<header>\n<h1>{}</h1>\n</header>\n<main>\n", esc(&doc.title)));
            page.relation_open(relation);
            page.packet(relation, packet);
            page.push("</article>\n</main>\n");
            site.files.insert("index.html".into(), page.finish("document.html"));
            full(&mut site, &Indexes::build(doc));
        }
        View::Items {
            heading,
            blocks,
            highlights,
            unresolved,
        } => {
            let mut page = Page::new(doc, &format!("{}: {heading}", doc.title));
            page.push(&format!(
                "<header>\n<h1>{}</h1>\n<h2>{}</h2>\n</header>\n<main>\n",
                esc(&doc.title),
                esc(&heading)
            ));
            for b in &blocks {
                page.item(b);
                let words = matched_words(doc, &highlights, b.item.id());
                if !words.is_empty() {
                    let marks: Vec<String> = words.iter().map(|w| format!("<mark>{}</mark>", esc(w))).collect();
                    page.push(&format!("<p class=\"matches\">Matches: {}</p>\n", marks.join(", ")));
                }
            }
            if !unresolved.is_empty() {
                page.push("<section class=\"unresolved\">\n<h2>Unresolved goals</h2>\n<ul>\n");
                for u in &unresolved {
                    page.push(&format!(
                        "<li><code>{}</code> in <a {}>{}</a></li>\n",
                        esc(&u.indicator.to_string()),
                        href(&format!("pkt-{}", u.packet)),
                        esc(u.packet.as_str())
                    ));
                }
                page.push("</ul>\n</section>\n");
            }
            page.push("</main>\n");
            site.files.insert("index.html".into(), page.finish("document.html"));
            full(&mut site, &Indexes::build(doc));
        }
    }
    Ok(site)
}
