use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexalloc")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn scratch(test: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lexalloc-cli-{}-{test}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn bundles(v: &Value) -> Vec<Vec<String>> {
    serde_json::from_value(v["bundles"].clone()).unwrap()
}

#[test]
fn solve_top_good_on_example1() {
    let out = run(&["--format", "json", "solve", &fixture("example1.json"), "--algorithm", "efx-po-top-good"]);
    assert_eq!(code(&out), 0);
    let b = bundles(&json(&out));
    assert!(b[1].contains(&"o1".to_string()) && b[1].contains(&"o2".to_string()));
}

#[test]
fn solve_mms_rm_reports_none() {
    let out = run(&["solve", &fixture("mmsrm-noexist.json"), "--algorithm", "mms-rm-chores"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("none exists"));
}

#[test]
fn solve_efx_po_chores_with_sigma() {
    let out = run(&["--format", "json", "solve", &fixture("chores5.json"), "--algorithm", "efx-po-chores", "--sigma", "1,2,3,4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(bundles(&json(&out)), vec![vec!["o1", "o2"], vec!["o3"], vec!["o4"], vec!["o5"]]);
}

#[test]
fn solve_precondition_and_input_errors() {
    assert_eq!(code(&run(&["solve", &fixture("example1.json"), "--algorithm", "efx-po-chores"])), 3);
    assert_eq!(code(&run(&["solve", &fixture("example1.json"), "--algorithm", "double-round-robin"])), 3);
    assert_eq!(code(&run(&["solve", &fixture("chores5.json"), "--algorithm", "efx-po-chores", "--sigma", "1,2,3"])), 3);
    assert_eq!(code(&run(&["solve", &fixture("chores5.json"), "--algorithm", "efx-po-chores", "--sigma", "0,1,2,3"])), 2);
    assert_eq!(code(&run(&["solve", "/nonexistent.json", "--algorithm", "rank-maximal"])), 2);
    assert_eq!(code(&run(&["solve", &fixture("y1.cnf"), "--algorithm", "rank-maximal"])), 2);
}

#[test]
fn solve_writes_an_allocation_document() {
    let dir = scratch("solve-out");
    let path = dir.join("a.alloc.json");
    let out = run(&["solve", &fixture("thm4.json"), "--algorithm", "mms-mixed", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let check = run(&["check", &fixture("thm4.json"), path.to_str().unwrap(), "--properties", "mms"]);
    assert_eq!(code(&check), 0, "{}", stdout(&check));
}

#[test]
fn check_example1_reports_two_witnesses() {
    let out = run(&["--format", "json", "check", &fixture("example1.json"), &fixture("seq1221.alloc.json"), "--properties", "efx,po-exhaustive"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert!(results.iter().all(|r| r["holds"] == false && r["witness"].is_string()));
}

#[test]
fn check_mms_without_efx() {
    let out = run(&["check", &fixture("chores5.json"), &fixture("mms-not-efx.alloc.json"), "--properties", "mms,efx"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("mms: holds"));
    assert!(text.contains("efx: fails"));
}

#[test]
fn check_single_agent_all_properties() {
    let dir = scratch("single");
    let inst = dir.join("one.json");
    fs::write(&inst, r#"{"version": "1", "agents": 1, "items": ["a", "b"], "orderings": [[["a", "chore"], ["b", "good"]]]}"#).unwrap();
    let alloc = dir.join("one.alloc.json");
    fs::write(&alloc, r#"{"version": "1", "bundles": [["a", "b"]]}"#).unwrap();
    let out = run(&["check", inst.to_str().unwrap(), alloc.to_str().unwrap(), "--properties", "ef,ef1,efx,efx-g,efx-c,mms,po,po-exhaustive,rm,seq"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn check_rejects_mismatched_allocations() {
    assert_eq!(code(&run(&["check", &fixture("thm4.json"), &fixture("seq1221.alloc.json")])), 2);
    assert_eq!(code(&run(&["check", &fixture("example1.json"), &fixture("seq1221.alloc.json"), "--properties", "envy"])), 2);
}

#[test]
fn decide_on_thm4() {
    let none = run(&["--format", "json", "decide", &fixture("thm4.json"), "--properties", "efx"]);
    assert_eq!(code(&none), 1);
    let v = json(&none);
    assert_eq!(v["exists"], false);
    assert_eq!(v["certificate"]["checked"], 16384);
    let some = run(&["decide", &fixture("thm4.json"), "--properties", "ef1"]);
    assert_eq!(code(&some), 0);
    assert!(stdout(&some).starts_with("exists"));
}

#[test]
fn decide_mms_rm_and_budget() {
    assert_eq!(code(&run(&["decide", &fixture("mmsrm-noexist.json"), "--properties", "mms,rm"])), 1);
    assert_eq!(code(&run(&["decide", &fixture("thm4.json"), "--properties", "efx", "--budget", "10"])), 4);
}

#[test]
fn reduce_writes_instance_and_sidecar() {
    let dir = scratch("reduce");
    let inst = dir.join("y1.json");
    let out = run(&["--format", "json", "reduce", "--from", "sat-ef", &fixture("y1.cnf"), "--out", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!((v["agents"].as_u64(), v["items"].as_u64()), (Some(4), Some(6)));
    assert!(dir.join("y1.sidecar.json").exists());

    let hg = run(&["reduce", "--from", "rainbow-ef-rm", &fixture("edge123.hg")]);
    assert_eq!(code(&hg), 0);
    let doc: Value = serde_json::from_slice(&hg.stdout).unwrap();
    assert_eq!(doc["agents"], 4);
    assert_eq!(doc["items"].as_array().unwrap().len(), 10);
}

#[test]
fn reduce_rejects_bad_sources() {
    let dir = scratch("reduce-bad");
    let cnf = dir.join("bad.cnf");
    fs::write(&cnf, "p cnf 3 1\n1 2 3 0\n").unwrap();
    assert_eq!(code(&run(&["reduce", "--from", "sat223-efx-rm", cnf.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["reduce", "--from", "rainbow-ef-rm", &fixture("y1.cnf")])), 2);
    assert_eq!(code(&run(&["reduce", "--from", "sat-eff", &fixture("y1.cnf")])), 2);
}

#[test]
fn decide_then_extract_round_trip() {
    let dir = scratch("extract");
    let inst = dir.join("y1.json");
    assert_eq!(code(&run(&["reduce", "--from", "sat-ef", &fixture("y1.cnf"), "--out", inst.to_str().unwrap()])), 0);
    let d = run(&["--format", "json", "decide", inst.to_str().unwrap(), "--properties", "ef"]);
    assert_eq!(code(&d), 0);
    let alloc = dir.join("w.alloc.json");
    let doc = serde_json::json!({ "version": "1", "bundles": json(&d)["bundles"] });
    fs::write(&alloc, doc.to_string()).unwrap();
    let sidecar = dir.join("y1.sidecar.json");
    let out = run(&["extract", sidecar.to_str().unwrap(), alloc.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "assignment: 1");

    let rm = dir.join("rm.alloc.json");
    fs::write(&rm, r#"{"version": "1", "bundles": [["x1", "0_1", "1_1", "C1", "0*_1", "1*_1"], [], [], []]}"#).unwrap();
    assert_eq!(code(&run(&["extract", sidecar.to_str().unwrap(), rm.to_str().unwrap()])), 1);
}

#[test]
fn generate_is_deterministic() {
    let a = run(&["generate", "--kind", "chores", "-n", "3", "-m", "5", "--seed", "7"]);
    let b = run(&["generate", "--kind", "chores", "-n", "3", "-m", "5", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["generate", "--kind", "chores", "-n", "3", "-m", "5", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

fn orderings(out: &Output) -> Vec<Vec<(String, String)>> {
    serde_json::from_value(json(out)["orderings"].clone()).unwrap()
}

#[test]
fn generated_kinds_hold() {
    for seed in 0..20 {
        let s = seed.to_string();
        let obj = orderings(&run(&["generate", "--kind", "objective", "-n", "4", "-m", "6", "--seed", &s]));
        for row in &obj {
            for (item, pol) in row {
                let first = obj[0].iter().find(|(i, _)| i == item).unwrap();
                assert_eq!(&first.1, pol);
            }
        }
        let ncc = orderings(&run(&["generate", "--kind", "no_common_chore", "-n", "3", "-m", "6", "--seed", &s]));
        for (item, _) in &ncc[0] {
            assert!(ncc.iter().any(|row| row.iter().any(|(i, p)| i == item && p == "good")));
        }
    }
}

#[test]
fn generate_rejects_infeasible_specs() {
    assert_eq!(code(&run(&["generate", "--kind", "top_good", "-n", "3", "-m", "0"])), 3);
    assert_eq!(code(&run(&["generate", "--kind", "goods", "-n", "0", "-m", "3"])), 3);
    assert_eq!(code(&run(&["generate", "--kind", "goods", "-n", "2", "-m", "200"])), 3);
}

#[test]
fn verify_paper_passes_on_bundled_fixtures() {
    let out = run(&["verify-paper"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("16384 allocations certified"));
    assert!(text.lines().any(|l| l.starts_with("thm4-efx ") && l.contains(" ms ")));
    let v = json(&run(&["--format", "json", "verify-paper"]));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["millis"].is_number()));
}

#[test]
fn verify_paper_names_a_corrupted_fixture() {
    let dir = scratch("corrupt");
    let thm4 = fs::read_to_string(fixture("thm4.json")).unwrap();
    let flipped = thm4.replacen("\"good\"", "\"chore\"", 1);
    assert_ne!(thm4, flipped);
    fs::write(dir.join("thm4.json"), flipped).unwrap();
    let out = run(&["verify-paper", "--fixture-dir", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("first mismatch: thm4"), "{err}");
}
