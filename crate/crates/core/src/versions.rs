//! Program versions.
//!
//! A program is the set of relations reachable from a root relation by
//! following, in each relation's selected packet, the definition references
//! of its body goals. Naming a version snapshots the packet chosen for each
//! of those relations; later edits to current predicate references leave the
//! snapshot alone.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use crate::diag::{Code, Diagnostic};
use crate::error::{Error, Result};
use crate::model::{
    is_element_id, ClausePacket, Document, Locator, PacketId, RelId, RelationDefinition,
    VersionBinding,
};

/// One relation visited by [`chain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub relation: RelId,
    pub packet: PacketId,
    /// The relation whose goal (at this byte span of its packet) led here.
    /// `None` for the start relation.
    pub reached_from: Option<(RelId, Range<usize>)>,
}

pub type Overrides = BTreeMap<RelId, PacketId>;

struct Walk<'d> {
    relations: HashMap<&'d str, &'d RelationDefinition>,
    overrides: Option<&'d Overrides>,
    visited: HashSet<&'d str>,
    steps: Vec<ChainStep>,
}

impl<'d> Walk<'d> {
    fn select(&self, r: &'d RelationDefinition) -> Result<&'d ClausePacket> {
        let id = self
            .overrides
            .and_then(|o| o.get(&r.id))
            .unwrap_or(&r.cpr);
        r.packet(id.as_str()).ok_or_else(|| Error::ForeignPacket {
            relation: r.id.to_string(),
            packet: id.to_string(),
        })
    }

    fn visit(&mut self, r: &'d RelationDefinition, from: Option<(RelId, Range<usize>)>) -> Result<()> {
        self.visited.insert(r.id.as_str());
        let packet = self.select(r)?;
        self.steps.push(ChainStep {
            relation: r.id.clone(),
            packet: packet.id.clone(),
            reached_from: from,
        });
        for goal in packet.goals() {
            let Some(target) = &goal.def_ref else { continue };
            if self.visited.contains(target.as_str()) {
                continue;
            }
            let next = *self
                .relations
                .get(target.as_str())
                .ok_or_else(|| Error::DanglingDef {
                    from: r.id.to_string(),
                    target: target.to_string(),
                })?;
            self.visit(next, Some((r.id.clone(), goal.span.clone())))?;
        }
        Ok(())
    }
}

/// Depth-first walk of the reference chain from `start`.
///
/// Each relation contributes the packet named in `overrides`, or else its
/// current predicate definition. Goals are followed in clause order, then
/// goal order; each relation is visited once, so the walk terminates on
/// mutually recursive programs.
pub fn chain(doc: &Document, start: &str, overrides: Option<&Overrides>) -> Result<Vec<ChainStep>> {
    let relations: HashMap<&str, &RelationDefinition> =
        doc.relations().map(|r| (r.id.as_str(), r)).collect();
    let root = *relations
        .get(start)
        .ok_or_else(|| Error::UnknownRelation(start.to_owned()))?;
    if let Some(o) = overrides {
        for (rel, pkt) in o {
            if let Some(r) = relations.get(rel.as_str()) {
                if r.packet(pkt.as_str()).is_none() {
                    return Err(Error::ForeignPacket {
                        relation: rel.to_string(),
                        packet: pkt.to_string(),
                    });
                }
            }
        }
    }
    let mut walk = Walk {
        relations,
        overrides,
        visited: HashSet::new(),
        steps: Vec::new(),
    };
    walk.visit(root, None)?;
    Ok(walk.steps)
}

/// Names a version rooted at `start`, binding every relation on its chain
/// to its current predicate definition.
pub fn name_version(doc: &Document, name: &str, start: &str) -> Result<Document> {
    if !is_element_id(name) {
        return Err(Error::BadVersionName(name.to_owned()));
    }
    if doc.version(name).is_some() {
        return Err(Error::DupVersion(name.to_owned()));
    }
    let steps = chain(doc, start, None)?;
    let bindings = steps.into_iter().map(|s| (s.relation, s.packet)).collect();
    let mut out = doc.clone();
    out.version_table.push(VersionBinding {
        name: name.to_owned(),
        root: RelId::from(start),
        bindings,
    });
    Ok(out)
}

/// Removes a named version and every binding that defines it.
pub fn delete_version(doc: &Document, name: &str) -> Result<Document> {
    if doc.version(name).is_none() {
        return Err(Error::UnknownVersion(name.to_owned()));
    }
    let mut out = doc.clone();
    out.version_table.retain(|v| v.name != name);
    Ok(out)
}

fn bound<'d>(doc: &'d Document, name: &str) -> Result<&'d VersionBinding> {
    let v = doc
        .version(name)
        .ok_or_else(|| Error::UnknownVersion(name.to_owned()))?;
    for (rel, pkt) in &v.bindings {
        let present = doc
            .relation(rel.as_str())
            .is_some_and(|r| r.packet(pkt.as_str()).is_some());
        if !present {
            return Err(Error::StaleBinding {
                version: v.name.clone(),
                relation: rel.to_string(),
                packet: pkt.to_string(),
            });
        }
    }
    Ok(v)
}

/// The relations of a version and their bound packets, in chain order.
pub fn resolve<'d>(doc: &'d Document, name: &str) -> Result<Vec<(&'d RelationDefinition, &'d ClausePacket)>> {
    let v = bound(doc, name)?;
    let steps = chain(doc, v.root.as_str(), Some(&v.bindings))?;
    Ok(steps
        .iter()
        .map(|s| {
            let r = doc.relation(s.relation.as_str()).expect("chain visits known relations");
            let p = r.packet(s.packet.as_str()).expect("chain selects owned packets");
            (r, p)
        })
        .collect())
}

/// Consultable program text: each packet's code with definition references
/// removed, separated by one blank line.
pub fn program_text<'p>(packets: impl IntoIterator<Item = &'p ClausePacket>) -> String {
    let parts: Vec<String> = packets
        .into_iter()
        .map(|p| p.code().trim_matches('\n').to_owned())
        .collect();
    let mut out = parts.join("\n\n");
    out.push('\n');
    out
}

/// The program text of a named version.
pub fn tangle(doc: &Document, name: &str) -> Result<String> {
    let pairs = resolve(doc, name)?;
    Ok(program_text(pairs.into_iter().map(|(_, p)| p)))
}

/// Reports drift between a version's snapshot and the document: bindings
/// that no longer match the current predicate reference, and definition
/// references that leave the bound set.
pub fn audit_version(doc: &Document, name: &str) -> Result<Vec<Diagnostic>> {
    let v = doc
        .version(name)
        .ok_or_else(|| Error::UnknownVersion(name.to_owned()))?;
    let locator = Locator::new(doc);
    let mut out = Vec::new();
    for (rel, pkt) in &v.bindings {
        let loc = locator.get(rel.as_str()).cloned();
        let Some(r) = doc.relation(rel.as_str()) else {
            out.push(
                Diagnostic::new(Code::StaleBinding, format!("version `{name}` binds unknown relation `{rel}`"))
                    .element(rel.as_str()),
            );
            continue;
        };
        let Some(p) = r.packet(pkt.as_str()) else {
            out.push(
                Diagnostic::new(
                    Code::StaleBinding,
                    format!("version `{name}` binds {} to missing packet `{pkt}`", r.key()),
                )
                .located(loc)
                .element(rel.as_str()),
            );
            continue;
        };
        if r.cpr != *pkt {
            out.push(
                Diagnostic::new(
                    Code::BindingDiverged,
                    format!(
                        "version `{name}` binds {} ({rel}) to `{pkt}`, but its current definition is `{}`",
                        r.key(),
                        r.cpr
                    ),
                )
                .located(loc)
                .element(rel.as_str()),
            );
        }
        for g in p.goals() {
            let Some(target) = &g.def_ref else { continue };
            if !v.bindings.contains_key(target) {
                out.push(
                    Diagnostic::new(
                        Code::ChainBroken,
                        format!(
                            "goal {} in `{pkt}` refers to `{target}`, which version `{name}` does not bind",
                            g.indicator
                        ),
                    )
                    .located(locator.get(pkt.as_str()).cloned())
                    .element(pkt.as_str())
                    .offset(g.span.start),
                );
            }
        }
    }
    Ok(out)
}
