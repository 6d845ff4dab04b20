use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use crown_verifier::embedding::cycle_graph;
use crown_verifier::instance::Instance;
use crown_verifier::lists::ListAssignment;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crown-verifier")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn verify_figure1_holds() {
    let o = cli(&["verify", "--stmt", "FIG_1_COUNTEREX"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["outcome"], "holds");
    assert_eq!(v["witness"]["common_neighbor"], 1);
}

#[test]
fn holepunch_hypotheses_fail_on_figure1() {
    let o = cli(&["verify", "--stmt", "THM_1_2_HOLEPUNCH", "--input", "builtin:figure1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["outcome"], "hypothesis-not-met");
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"n\": 3,");
    assert_eq!(code(&cli(&["verify", "--stmt", "THM_2_1_THOMASSEN", "--input", &bad])), 3);
    assert_eq!(code(&cli(&["verify", "--stmt", "NOT_A_STATEMENT", "--input", "builtin:figure1"])), 3);
    assert_eq!(code(&cli(&["verify", "--stmt"])), 3);
    assert_eq!(code(&cli(&["no-such-command"])), 3);
    assert_eq!(code(&cli(&["verify", "--stmt", "THM_2_1_THOMASSEN", "--input", "/nonexistent/x.json"])), 3);
    assert_eq!(code(&cli(&["--help"])), 0);
}

#[test]
fn solve_and_crown_on_figure1() {
    let o = cli(&["solve", "--input", "builtin:figure1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["status"], "SAT");

    // a b d c f along P = p0 q0 z q1 p1.
    let o = cli(&["solve", "--input", "builtin:figure1", "--coloring", r#"{"0":0,"3":1,"5":3,"4":2,"2":4}"#]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o), serde_json::json!({ "status": "UNSAT" }));

    let o = cli(&["crown", "--input", "builtin:figure1"]);
    assert_eq!(stdout_json(&o)["status"], "EMPTY");
    let o = cli(&["crown", "--input", "builtin:figure1", "--enumerate"]);
    assert_eq!(stdout_json(&o)["count"], 0);
}

#[test]
fn verdicts_recheck_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["figure1"]);
    let inst = write(dir.path(), "fig.json", &String::from_utf8(o.stdout).unwrap());
    let o = cli(&["verify", "--stmt", "THM_2_5_OBSTRUCT", "--input", &inst]);
    assert_eq!(code(&o), 2);
    let verdict = write(dir.path(), "v.json", &String::from_utf8(o.stdout).unwrap());
    let o = cli(&["recheck", "--input", &inst, "--verdict", &verdict]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["recheck"], true);

    let forged = fs::read_to_string(&verdict).unwrap().replace("hypothesis-not-met", "holds");
    let forged = write(dir.path(), "forged.json", &forged);
    assert_ne!(code(&cli(&["recheck", "--input", &inst, "--verdict", &forged])), 0);
}

#[test]
fn timeouts_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // An 8-cycle with 5-lists and a long path takes more than no time.
    let l: &[u8] = &[0, 1, 2, 3, 4];
    let doc = Instance::new(cycle_graph(8), ListAssignment::from_slices(&[l; 8]), (0..7).collect()).to_json();
    let inst = write(dir.path(), "c8.json", &doc);
    let o = cli(&["verify", "--stmt", "LEM_4_4", "--input", &inst, "--timeout-ms", "0"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("cor22.jsonl");
    let log = log.to_str().unwrap();
    let o = cli(&["sweep", "--stmt", "COR_2_2", "--max-vertices", "5", "--universe", "5", "--jobs", "2", "--out", log]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout_json(&o);
    assert_eq!(summary["counterexample"], 0);
    let lines = fs::read_to_string(log).unwrap();
    assert_eq!(lines.lines().count() as u64, summary["instances"].as_u64().unwrap());
    assert!(dir.path().join("cor22.manifest.json").exists());
    assert!(dir.path().join("cor22.summary.json").exists());

    let o = cli(&["replay", "--log", log]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["passed"], r["lines"]);

    // Editing a certificate is caught.
    let i = lines.find("\"extension\":[").unwrap() + "\"extension\":[".len();
    let edited = format!("{}9{}", &lines[..i], &lines[i + 1..]);
    fs::write(log, edited).unwrap();
    let o = cli(&["replay", "--log", log]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["discrepancies"].as_array().unwrap().len(), 1);
}

#[test]
fn summary_only_sweeps_keep_the_digest() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("a.jsonl");
    let bare = dir.path().join("b.jsonl");
    let args = ["sweep", "--stmt", "THM_4_8", "--max-vertices", "5", "--universe", "5"];
    let a = cli(&[&args[..], &["--out", full.to_str().unwrap()]].concat());
    let b = cli(&[&args[..], &["--out", bare.to_str().unwrap(), "--summary-only"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert!(!bare.exists());
    assert_eq!(stdout_json(&a)["log_digest"], stdout_json(&b)["log_digest"]);
}
