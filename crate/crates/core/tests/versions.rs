mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use litweave::markup::parse_clauses;
use litweave::model::{ClausePacket, Document, PacketId, RelId};
use litweave::versions::{self, audit_version, chain, delete_version, name_version, resolve, tangle, Overrides};
use litweave::{Code, Error};
use proptest::prelude::*;

fn bindings(doc: &Document, name: &str) -> BTreeMap<String, String> {
    doc.version(name)
        .unwrap()
        .bindings
        .iter()
        .map(|(r, p)| (r.to_string(), p.to_string()))
        .collect()
}

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn packet(id: &str, text: &str) -> ClausePacket {
    ClausePacket {
        id: PacketId::from(id),
        raw_text: text.to_owned(),
        clauses: parse_clauses(text).unwrap(),
    }
}

/// The edit of the second figure: a/1 of 1.1 switches to its second
/// packet and b/2 gains a new current packet.
fn edited(doc: &Document) -> Document {
    doc.with_cpr("R_a11", "P_a11_2")
        .unwrap()
        .with_packet("R_b", packet("P_b_2", "b(X, s(X))."))
        .unwrap()
        .with_cpr("R_b", "P_b_2")
        .unwrap()
}

#[test]
fn naming_v1_binds_the_whole_chain() {
    let doc = name_version(&fig2(), "V1", "R_a11").unwrap();
    assert_eq!(
        bindings(&doc, "V1"),
        map(&[("R_a11", "P_a11_1"), ("R_b", "P_b_1"), ("R_c", "P_c_1")])
    );
    assert_eq!(doc.version("V1").unwrap().root.as_str(), "R_a11");
}

#[test]
fn naming_v2_takes_c_along() {
    let doc = fig2_named();
    assert_eq!(bindings(&doc, "V2"), map(&[("R_a12", "P_a12_1"), ("R_c", "P_c_1")]));
    let ids: Vec<(&str, &str)> = resolve(&doc, "V2")
        .unwrap()
        .into_iter()
        .map(|(r, p)| (r.id.as_str(), p.id.as_str()))
        .collect();
    assert_eq!(ids, [("R_a12", "P_a12_1"), ("R_c", "P_c_1")]);
}

#[test]
fn chain_records_where_each_relation_was_reached() {
    let steps = chain(&fig2(), "R_a12", None).unwrap();
    assert_eq!(steps[0].reached_from, None);
    let (from, span) = steps[1].reached_from.clone().unwrap();
    assert_eq!(from.as_str(), "R_a12");
    let doc = fig2();
    let raw = &doc.packet("P_a12_1").unwrap().1.raw_text;
    assert_eq!(&raw[span], "c(X)");
}

#[test]
fn chain_errors() {
    let doc = fig2();
    assert!(matches!(chain(&doc, "R_zz", None), Err(Error::UnknownRelation(_))));
    let o: Overrides = [(RelId::from("R_a11"), PacketId::from("P_c_1"))].into();
    assert!(matches!(chain(&doc, "R_a11", Some(&o)), Err(Error::ForeignPacket { .. })));
    let bad = doc.with_packet("R_b", packet("P_b_9", "b(X, Y) :- c(Y)^R_nowhere.")).unwrap();
    let bad = bad.with_cpr("R_b", "P_b_9").unwrap();
    assert!(matches!(chain(&bad, "R_a11", None), Err(Error::DanglingDef { .. })));
}

#[test]
fn snapshot_survives_edits() {
    let before = fig2_named();
    let v1 = bindings(&before, "V1");
    let after = edited(&before);
    assert_eq!(bindings(&after, "V1"), v1);
    let diverged: BTreeSet<String> = audit_version(&after, "V1")
        .unwrap()
        .into_iter()
        .filter(|d| d.code == Code::BindingDiverged)
        .map(|d| d.element.unwrap())
        .collect();
    assert_eq!(diverged, ["R_a11".to_owned(), "R_b".to_owned()].into());
    // The old program is still what V1 tangles to.
    assert_eq!(tangle(&after, "V1").unwrap(), tangle(&before, "V1").unwrap());
    assert_eq!(audit_version(&after, "V2").unwrap(), []);
}

#[test]
fn renaming_follows_the_new_chain() {
    let after = edited(&fig2_named());
    assert!(matches!(name_version(&after, "V1", "R_a11"), Err(Error::DupVersion(_))));
    let renamed = name_version(&delete_version(&after, "V1").unwrap(), "V1", "R_a11").unwrap();
    assert_eq!(
        bindings(&renamed, "V1"),
        map(&[("R_a11", "P_a11_2"), ("R_b", "P_b_2"), ("R_c", "P_c_1")])
    );
    assert_eq!(audit_version(&renamed, "V1").unwrap(), []);
    let old = name_version(&after, "OLD", "R_a12").unwrap();
    assert_eq!(bindings(&old, "OLD"), bindings(&after, "V2"));
}

#[test]
fn chain_broken_by_hand_edit() {
    let mut doc = fig2_named();
    let v = doc.version_table.iter_mut().find(|v| v.name == "V1").unwrap();
    v.bindings.remove(&RelId::from("R_c"));
    let d = audit_version(&doc, "V1").unwrap();
    assert_eq!(d.iter().map(|d| d.code).collect::<Vec<_>>(), [Code::ChainBroken]);
}

#[test]
fn stale_binding_after_packet_removal() {
    let doc = fig2_named()
        .with_packet("R_c", packet("P_c_2", "c(_)."))
        .unwrap()
        .with_cpr("R_c", "P_c_2")
        .unwrap()
        .without_packet("P_c_1")
        .unwrap();
    assert!(matches!(resolve(&doc, "V2"), Err(Error::StaleBinding { .. })));
    assert!(matches!(tangle(&doc, "V2"), Err(Error::StaleBinding { .. })));
    let a = audit_version(&doc, "V2").unwrap();
    assert!(a.iter().any(|d| d.code == Code::StaleBinding));
}

#[test]
fn delete_examples() {
    let doc = fig2_named();
    let gone = delete_version(&doc, "V1").unwrap();
    assert!(matches!(resolve(&gone, "V1"), Err(Error::UnknownVersion(_))));
    assert!(matches!(delete_version(&doc, "V9"), Err(Error::UnknownVersion(_))));
    assert!(name_version(&gone, "V1", "R_a11").is_ok());
    assert!(matches!(name_version(&doc, "not a name", "R_a11"), Err(Error::BadVersionName(_))));
}

#[test]
fn one_relation_version_is_a_singleton() {
    let doc = name_version(&fig2(), "C", "R_c").unwrap();
    assert_eq!(resolve(&doc, "C").unwrap().len(), 1);
    assert_eq!(tangle(&doc, "C").unwrap(), "c(0).\nc(s(X)) :- c(X).\n");
}

#[test]
fn tangle_v2() {
    let doc = fig2_named();
    let text = tangle(&doc, "V2").unwrap();
    assert_eq!(text, "a(0).\na(X) :- c(X).\n\nc(0).\nc(s(X)) :- c(X).\n");
    assert!(!text.contains('^'));
    assert!(matches!(tangle(&doc, "V7"), Err(Error::UnknownVersion(_))));
}

#[test]
fn tangle_reparses_to_the_bound_clauses() {
    let doc = fig2_named();
    for v in ["V1", "V2"] {
        let reparsed = parse_clauses(&tangle(&doc, v).unwrap()).unwrap();
        let mut got: Vec<String> = reparsed.iter().map(|c| c.raw_text.clone()).collect();
        let mut want: Vec<String> = Vec::new();
        for (_, p) in resolve(&doc, v).unwrap() {
            want.extend(parse_clauses(&p.code()).unwrap().into_iter().map(|c| c.raw_text));
        }
        got.sort();
        want.sort();
        assert_eq!(got, want, "{v}");
    }
}

#[test]
fn directive_relations_join_chains() {
    let doc = litweave::markup::parse(&fixture_text("queens.lw")).unwrap().document;
    let ids: Vec<String> = chain(&doc, "R_queens", None).unwrap().iter().map(|s| s.relation.to_string()).collect();
    assert_eq!(ids, ["R_queens", "R_length", "R_safe", "R_no_attack"]);
    let m = litweave::markup::parse(&fixture_text("mutual.lw")).unwrap().document;
    let ids: Vec<String> = chain(&m, "R_odd", None).unwrap().iter().map(|s| s.relation.to_string()).collect();
    assert_eq!(ids, ["R_odd", "R_even"]);
    assert_eq!(audit_version(&m, "parity").unwrap(), []);
}

/// Depth-first order oracle over the generator's own description.
fn dfs_order(g: &GenDoc, i: usize, sel: &BTreeMap<String, String>, seen: &mut Vec<usize>) {
    seen.push(i);
    let pkt: usize = sel[&GenDoc::rel_id(i)].rsplit('p').next().unwrap().parse().unwrap();
    for clause in &g.rels[i].packets[pkt] {
        for goal in clause {
            if let GenGoal::Linked(j) = goal {
                if !seen.contains(j) {
                    dfs_order(g, *j, sel, seen);
                }
            }
        }
    }
}

fn to_overrides(o: &BTreeMap<String, String>) -> Overrides {
    o.iter().map(|(r, p)| (RelId::from(r.as_str()), PacketId::from(p.as_str()))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn chain_matches_reachability((g, o, start) in arb_doc_with_overrides()) {
        let doc = g.document();
        let ov = to_overrides(&o);
        let steps = chain(&doc, &GenDoc::rel_id(start), Some(&ov)).unwrap();
        prop_assert!(steps.len() <= g.rels.len());
        let got: BTreeMap<String, String> =
            steps.iter().map(|s| (s.relation.to_string(), s.packet.to_string())).collect();
        prop_assert_eq!(got.len(), steps.len(), "a relation was visited twice");
        let want = reachable(&g, start, &o);
        prop_assert_eq!(&got, &want);
        let mut order = Vec::new();
        dfs_order(&g, start, &want, &mut order);
        let order: Vec<String> = order.into_iter().map(GenDoc::rel_id).collect();
        let ids: Vec<String> = steps.iter().map(|s| s.relation.to_string()).collect();
        prop_assert_eq!(ids, order);
        prop_assert_eq!(chain(&doc, &GenDoc::rel_id(start), Some(&ov)).unwrap(), steps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn naming_is_closed_and_resolves_to_the_chain(g in arb_doc(), pick in any::<prop::sample::Index>()) {
        let doc = g.document();
        let start = GenDoc::rel_id(pick.index(g.rels.len()));
        let named = name_version(&doc, "W", &start).unwrap();
        prop_assert_eq!(audit_version(&named, "W").unwrap(), vec![]);
        let resolved: Vec<(String, String)> = resolve(&named, "W")
            .unwrap()
            .into_iter()
            .map(|(r, p)| (r.id.to_string(), p.id.to_string()))
            .collect();
        let steps: Vec<(String, String)> = chain(&doc, &start, None)
            .unwrap()
            .into_iter()
            .map(|s| (s.relation.to_string(), s.packet.to_string()))
            .collect();
        prop_assert_eq!(resolved, steps);
        prop_assert_eq!(&delete_version(&named, "W").unwrap().version_table, &doc.version_table);
    }

    #[test]
    fn tangles_are_clean(g in arb_doc()) {
        let doc = g.document();
        for v in &doc.version_table {
            let text = tangle(&doc, &v.name).unwrap();
            prop_assert!(!text.contains('^'));
            let n: usize = resolve(&doc, &v.name).unwrap().iter().map(|(_, p)| p.clauses.len()).sum();
            prop_assert_eq!(parse_clauses(&text).unwrap().len(), n);
            prop_assert_eq!(versions::program_text(resolve(&doc, &v.name).unwrap().into_iter().map(|(_, p)| p)), text);
        }
    }
}
