use std::collections::{HashMap, HashSet};

use super::{is_element_id, is_rel_id, Block, Document, Locator, RelationKey, Section, SectionNumber};
use crate::diag::{Code, Diagnostic};

/// Checks every structural invariant of `doc`.
///
/// An empty result means the document is well-formed. Warnings (unlinked
/// goals, mismatched indicators, stale version bindings) are reported
/// alongside errors.
pub fn validate(doc: &Document) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let locator = Locator::new(doc);
    let loc = |id: &str| locator.get(id).cloned();

    if doc.title.trim().is_empty() {
        out.push(Diagnostic::new(Code::MissingTitle, "document has no title"));
    }
    if doc.sections.is_empty() {
        out.push(Diagnostic::new(Code::NoSection, "document has no section"));
    }
    check_numbering(&doc.sections, &SectionNumber::default(), &mut out);

    let blocks = doc.blocks();
    for b in &blocks {
        match b.block {
            Block::Paragraph(p) => {
                if !is_element_id(&p.id) {
                    out.push(
                        Diagnostic::new(Code::BadId, format!("`{}` is not a valid id", p.id))
                            .located(Some(b.location())),
                    );
                }
            }
            Block::Relation(r) => {
                if !is_rel_id(r.id.as_str()) {
                    out.push(
                        Diagnostic::new(Code::BadId, format!("`{}` is not a valid relation id", r.id))
                            .located(Some(b.location())),
                    );
                }
                for p in &r.packets {
                    if !is_element_id(p.id.as_str()) {
                        out.push(
                            Diagnostic::new(Code::BadId, format!("`{}` is not a valid packet id", p.id))
                                .located(Some(b.location())),
                        );
                    }
                }
            }
        }
    }

    let mut seen: HashSet<&str> = HashSet::new();
    let ids = blocks.iter().flat_map(|b| {
        let own = std::iter::once(b.block.id());
        let packets = b.relation().into_iter().flat_map(|r| r.packets.iter().map(|p| p.id.as_str()));
        own.chain(packets)
    });
    for id in ids {
        if !seen.insert(id) {
            out.push(
                Diagnostic::new(Code::DupId, format!("id `{id}` is used more than once"))
                    .located(loc(id))
                    .element(id),
            );
        }
    }

    let relations: Vec<_> = doc.relations().collect();
    if relations.is_empty() {
        out.push(Diagnostic::new(
            Code::NoRelation,
            "document defines no relation",
        ));
    }
    let by_id: HashMap<&str, _> = relations.iter().map(|r| (r.id.as_str(), *r)).collect();
    let keys: HashSet<RelationKey> = relations.iter().map(|r| r.key()).collect();

    for r in &relations {
        let rloc = loc(r.id.as_str());
        if r.packets.is_empty() {
            out.push(
                Diagnostic::new(Code::EmptyRelation, format!("relation {} has no packet", r.key()))
                    .located(rloc.clone())
                    .element(r.id.as_str()),
            );
        }
        if r.cpr.as_str().is_empty() {
            out.push(
                Diagnostic::new(
                    Code::MissingCpr,
                    format!("relation {} has no current predicate reference", r.key()),
                )
                .located(rloc.clone())
                .element(r.id.as_str()),
            );
        } else if r.cpd().is_none() {
            out.push(
                Diagnostic::new(
                    Code::DanglingCpr,
                    format!(
                        "current predicate reference of {} names `{}`, which is not one of its packets",
                        r.key(),
                        r.cpr
                    ),
                )
                .located(rloc.clone())
                .element(r.id.as_str()),
            );
        }
        let key = r.key();
        for p in &r.packets {
            let ploc = loc(p.id.as_str());
            let at = |code: Code, msg: String, offset: usize| {
                Diagnostic::new(code, msg)
                    .located(ploc.clone())
                    .element(p.id.as_str())
                    .offset(offset)
            };
            if p.clauses.is_empty() {
                out.push(at(Code::EmptyPacket, format!("packet `{}` has no clause", p.id), 0));
            }
            for c in &p.clauses {
                let head_ok = match (&c.head, key.arity) {
                    (None, None) => true,
                    (Some(h), Some(_)) => key.matches(h),
                    _ => false,
                };
                if !head_ok {
                    let found = c
                        .head
                        .as_ref()
                        .map_or_else(|| "a directive".to_owned(), |h| h.to_string());
                    out.push(at(
                        Code::HeadMismatch,
                        format!("relation {key} contains {found}"),
                        c.span.start,
                    ));
                }
                for g in &c.body {
                    match &g.def_ref {
                        Some(target) => match by_id.get(target.as_str()) {
                            None => out.push(at(
                                Code::DanglingDef,
                                format!("goal {} refers to undefined relation `{target}`", g.indicator),
                                g.span.start,
                            )),
                            Some(t) => {
                                let tk = t.key();
                                if !tk.matches(&g.indicator) {
                                    let code = if tk.name == g.indicator.name {
                                        Code::ArityMismatch
                                    } else {
                                        Code::IndicatorMismatch
                                    };
                                    out.push(at(
                                        code,
                                        format!(
                                            "goal {} refers to `{target}`, which defines {tk}",
                                            g.indicator
                                        ),
                                        g.span.start,
                                    ));
                                }
                            }
                        },
                        None => {
                            let callee = RelationKey {
                                name: g.indicator.name.clone(),
                                arity: Some(g.indicator.arity),
                            };
                            if !key.matches(&g.indicator) && keys.contains(&callee) {
                                out.push(at(
                                    Code::UnlinkedGoal,
                                    format!(
                                        "goal {} has no definition reference although the document defines it",
                                        g.indicator
                                    ),
                                    g.span.start,
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    let mut names = HashSet::new();
    for v in &doc.version_table {
        if !names.insert(v.name.as_str()) {
            out.push(Diagnostic::new(
                Code::DupVersion,
                format!("version `{}` is named more than once", v.name),
            ));
        }
        if !is_element_id(&v.name) {
            out.push(Diagnostic::new(
                Code::BadVersion,
                format!("`{}` is not a valid version name", v.name),
            ));
        }
        if !v.bindings.contains_key(&v.root) {
            out.push(Diagnostic::new(
                Code::BadVersion,
                format!("version `{}` does not bind its root `{}`", v.name, v.root),
            ));
        }
        for (rel, pkt) in &v.bindings {
            let ok = by_id
                .get(rel.as_str())
                .is_some_and(|r| r.packet(pkt.as_str()).is_some());
            if !ok {
                out.push(
                    Diagnostic::new(
                        Code::StaleBinding,
                        format!("version `{}` binds `{rel}` to `{pkt}`, which is not one of its packets", v.name),
                    )
                    .located(loc(rel.as_str())),
                );
            }
        }
    }
    out
}

fn check_numbering(sections: &[Section], parent: &SectionNumber, out: &mut Vec<Diagnostic>) {
    for (i, s) in sections.iter().enumerate() {
        let expected = parent.child(i as u32 + 1);
        if s.number != expected {
            out.push(Diagnostic::new(
                Code::SectionNumber,
                format!("section `{}` is numbered {} but sits at {expected}", s.heading, s.number),
            ));
        }
        check_numbering(&s.children, &expected, out);
    }
}
