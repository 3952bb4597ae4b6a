mod common;

use std::path::Path;
use std::thread;
use std::time::Duration;

use common::*;
use litweave::markup::{parse, parse_clauses};
use litweave::testrun::{test_packet, test_recursive, test_version, InterpreterConfig, Mode, TestReport};
use litweave::versions::{name_version, tangle};
use litweave::Error;

fn stub() -> InterpreterConfig {
    InterpreterConfig::new(stub_interp())
        .unwrap()
        .with_goal_flag("--goal {goal}")
        .with_timeout(Duration::from_secs(5))
}

/// A config whose interpreter prints the program path, then runs `then`.
fn path_printer(then: &str) -> InterpreterConfig {
    InterpreterConfig::new(format!("sh -c 'echo \"$0\"; {then}' {{file}}")).unwrap()
}

fn same_outcome(a: &TestReport, b: &TestReport) -> bool {
    (a.exit_code, &a.stdout, &a.stderr, a.timed_out, &a.unresolved) == (b.exit_code, &b.stdout, &b.stderr, b.timed_out, &b.unresolved)
}

#[test]
fn version_under_the_stub() {
    let doc = fig2_named();
    let r = test_version(&doc, "V2", &stub(), None).unwrap();
    assert_eq!(r.stdout, "2-relation program loaded\n");
    assert_eq!(r.exit_code, 0);
    assert!(!r.timed_out && r.duration < Duration::from_secs(5));
    assert_eq!(r.loaded_code, tangle(&doc, "V2").unwrap());
    assert_eq!(r.mode, Mode::Version("V2".into()));
    let r1 = test_version(&doc, "V1", &stub(), Some("a(X)")).unwrap();
    assert_eq!(r1.stdout, "3-relation program loaded\ngoal: a(X)\n");
}

#[test]
fn unknown_version_fails_before_spawning() {
    let missing = InterpreterConfig::new("/nonexistent/prolog {file}").unwrap();
    assert!(matches!(test_version(&fig2(), "V9", &missing, None), Err(Error::UnknownVersion(_))));
    assert!(matches!(test_packet(&fig2(), "P9", &missing, None), Err(Error::UnknownElement(_))));
    assert!(matches!(test_recursive(&fig2(), "R9", &missing, None), Err(Error::UnknownRelation(_))));
    assert!(matches!(
        test_packet(&fig2(), "P_b_1", &missing, None),
        Err(Error::InterpreterNotFound(_))
    ));
}

#[test]
fn slow_interpreters_time_out() {
    let cfg = InterpreterConfig::new(format!("{} --sleep 5", stub_interp()))
        .unwrap()
        .with_timeout(Duration::from_secs(1));
    let r = test_packet(&fig2(), "P_c_1", &cfg, None).unwrap();
    assert!(r.timed_out);
    assert!(r.duration >= Duration::from_secs(1));
    assert!(r.duration < Duration::from_secs(4));
    assert_eq!(r.exit_code, -1);
}

#[test]
fn exit_code_and_goal_are_passed_through() {
    let cfg = InterpreterConfig::new(format!("{} --exit 3", stub_interp()))
        .unwrap()
        .with_goal_flag("--goal {goal}");
    let r = test_packet(&fig2(), "R_c", &cfg, Some("c(s(0))")).unwrap();
    assert_eq!(r.exit_code, 3);
    assert_eq!(r.stdout, "1-relation program loaded\ngoal: c(s(0))\n");
    assert!(matches!(
        test_packet(&fig2(), "R_c", &InterpreterConfig::new(stub_interp()).unwrap(), Some("g")),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn program_files_are_removed() {
    let doc = fig2_named();
    let ok = test_version(&doc, "V1", &path_printer("cat \"$0\" >/dev/null"), None).unwrap();
    let path = ok.stdout.trim();
    assert!(path.ends_with(".pl") && Path::new(path).file_name().unwrap().to_str().unwrap().starts_with("litweave-"));
    assert!(!Path::new(path).exists());

    let failed = test_version(&doc, "V1", &path_printer("exit 7"), None).unwrap();
    assert_eq!(failed.exit_code, 7);
    assert!(!Path::new(failed.stdout.trim()).exists());

    let slow = path_printer("sleep 5").with_timeout(Duration::from_millis(500));
    let killed = test_version(&doc, "V1", &slow, None).unwrap();
    assert!(killed.timed_out);
    assert!(!Path::new(killed.stdout.trim()).exists());
}

#[test]
fn a_relation_loads_its_current_definition() {
    let doc = fig2();
    let r = test_packet(&doc, "R_a11", &stub(), None).unwrap();
    assert_eq!(r.loaded_code, "a(X) :- b(X, Y), c(Y).\n");
    let p = test_packet(&doc, "P_b_1", &stub(), None).unwrap();
    assert_eq!(p.loaded_code, "b(X, X).\n");
    assert_eq!(p.mode, Mode::Packet("P_b_1".into()));
    for id in ["P_a11_1", "P_a11_2", "P_c_1", "P_a12_1"] {
        let r = test_packet(&doc, id, &stub(), None).unwrap();
        let want: Vec<String> = doc.packet(id).unwrap().1.clauses.iter().map(|c| c.raw_text.replace("^R_b", "").replace("^R_c", "")).collect();
        let got: Vec<String> = parse_clauses(&r.loaded_code).unwrap().into_iter().map(|c| c.raw_text).collect();
        assert_eq!(got, want, "{id}");
        assert!(!r.loaded_code.contains('^'));
    }
}

#[test]
fn modes_differ_only_in_what_they_load() {
    let doc = fig2();
    let rec = test_recursive(&doc, "R_a12", &stub(), Some("a(0)")).unwrap();
    let named = name_version(&doc, "CHAIN", "R_a12").unwrap();
    assert_eq!(rec.loaded_code, tangle(&named, "CHAIN").unwrap());
    let ver = test_version(&named, "CHAIN", &stub(), Some("a(0)")).unwrap();
    assert_eq!(rec.loaded_code, ver.loaded_code);
    assert!(same_outcome(&rec, &ver));
    assert_eq!(rec.mode, Mode::Recursive("R_a12".into()));
    let single = test_recursive(&doc, "R_b", &stub(), None).unwrap();
    let packet = test_packet(&doc, "R_b", &stub(), None).unwrap();
    assert_eq!(single.loaded_code, packet.loaded_code);
    assert!(same_outcome(&single, &packet));
}

#[test]
fn incomplete_chains_are_annotated() {
    let doc = parse(&fixture_text("queens.lw")).unwrap().document;
    let r = test_recursive(&doc, "R_queens", &stub(), None).unwrap();
    assert_eq!(r.stdout, "4-relation program loaded\n");
    let names: Vec<String> = r.unresolved.iter().map(|u| u.indicator.to_string()).collect();
    assert_eq!(names, ["ins/2", "label/1", "is/2", "#\\=/2", "#\\=/2", "is/2"]);
    let pkt = test_packet(&doc, "P_safe", &stub(), None).unwrap();
    assert!(pkt.unresolved.is_empty());
}

#[test]
fn calls_run_concurrently() {
    let doc = fig2_named();
    let handles: Vec<_> = (0..6)
        .map(|i| {
            let doc = doc.clone();
            thread::spawn(move || {
                let v = if i % 2 == 0 { "V1" } else { "V2" };
                (v, test_version(&doc, v, &stub(), Some(&format!("g{i}"))).unwrap(), i)
            })
        })
        .collect();
    for h in handles {
        let (v, r, i) = h.join().unwrap();
        let n = if v == "V1" { 3 } else { 2 };
        assert_eq!(r.stdout, format!("{n}-relation program loaded\ngoal: g{i}\n"));
    }
}

#[test]
fn work_dir_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = InterpreterConfig::new("sh -c pwd {file}").unwrap();
    cfg.work_dir = Some(dir.path().to_path_buf());
    let r = test_packet(&fig2(), "P_b_1", &cfg, None).unwrap();
    assert_eq!(
        Path::new(r.stdout.trim()).canonicalize().unwrap(),
        dir.path().canonicalize().unwrap()
    );
}

#[test]
fn reports_serialize() {
    let r = test_version(&fig2_named(), "V2", &stub(), None).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["mode"]["mode"], "version");
    assert_eq!(v["mode"]["target"], "V2");
    assert_eq!(v["exit_code"], 0);
}
