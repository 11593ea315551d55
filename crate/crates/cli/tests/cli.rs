use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn syncmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncmat")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn cerny4() -> String {
    data("cerny4.dfa").display().to_string()
}

#[test]
fn check_summarizes_automaton() {
    let out = syncmat(&["check", &cerny4()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("shortest-reset\t9"), "{text}");
    assert!(text.contains("strongly-connected\ttrue"));
}

#[test]
fn check_rejects_incomplete_table() {
    let out = syncmat(&["check", &data("incomplete.dfa").display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incomplete"));
}

#[test]
fn sync_word_exact_and_greedy() {
    let out = syncmat(&["sync-word", &cerny4(), "--exact"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "baaabaaab\t9\t2");

    let out = syncmat(&["--format", "json", "sync-word", &cerny4(), "--greedy"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["length"].as_u64().unwrap() >= 9);
    assert_eq!(v["sink"], 2);
}

#[test]
fn non_synchronizing_automaton_fails() {
    let out = syncmat(&["sync-word", &data("cycle.dfa").display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn series_accepts_vectors_and_state_lists() {
    let a = stdout(&syncmat(&["series", &cerny4(), "--word", "baaab", "--set", "0110"]));
    let b = stdout(&syncmat(&["series", &cerny4(), "--word", "baaab", "--set", "2,3"]));
    assert_eq!(a, b);
    assert_eq!(a.trim().rsplit('\t').next(), Some("2"));
}

#[test]
fn chain_reaches_full_rank_on_examples() {
    for target in [&["kari"][..], &["roman"], &["cerny", "4"]] {
        let mut args = vec!["chain"];
        args.extend_from_slice(target);
        let out = syncmat(&args);
        assert!(out.status.success(), "{target:?}");
        let text = stdout(&out);
        let tail = text.lines().last().unwrap();
        let (rank, of) = tail.trim_start_matches("# rank ").split_once(" of ").unwrap();
        assert_eq!(rank, of, "{target:?}: {tail}");
    }
}

#[test]
fn chain_json_lists_lines() {
    let out = syncmat(&["--format", "json", "chain", "roman"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lines"].as_array().unwrap().len(), 16);
    assert_eq!(v["rank"], 16);
    assert_eq!(v["lines"][0]["c_vector"], "10111");
}

#[test]
fn chain_on_file_reports_without_asserting() {
    let out = syncmat(&["chain", &cerny4()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# rank 8 of 9"));
}

#[test]
fn solve_verifies_minimal_solution() {
    let out = syncmat(&["solve", &cerny4(), "--u", "baa", "--all"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("R(u)\t1101"));
    assert!(text.contains("series\t2"));
    assert!(text.contains("verified\ttrue"));
    assert_eq!(text.matches("solution\t").count(), 2);
}

#[test]
fn census_three_states() {
    let out = syncmat(&["census", "--n", "3", "--k", "2", "--sequential"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("max-reset\t4"));
    assert!(text.contains("partial\tfalse"));
}

#[test]
fn census_budget_is_flagged() {
    let out = syncmat(&["census", "--n", "3", "--k", "2", "--budget", "10"]);
    assert!(stdout(&out).contains("partial\ttrue"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partial census"));
}

#[test]
fn basis_checks_dimension_and_expresses() {
    let out = syncmat(&["basis", "--n", "4", "--k", "3", "--express", "1 3 2 3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dimension\t9"));
    assert!(text.contains("coefficient\tK\t-1/1"));
}

#[test]
fn properties_respect_seed() {
    let a = stdout(&syncmat(&["--seed", "11", "--format", "json", "properties", "--cases", "200"]));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| r["failures"] == 0 && r["seed"] == 11));
}

#[test]
fn replay_matches_golden_tables() {
    for ex in ["kari", "roman", "cerny4"] {
        assert!(syncmat(&["replay", ex]).status.success(), "{ex}");
    }
}

#[test]
fn unknown_target_is_an_error() {
    assert_eq!(syncmat(&["chain", "nowhere.dfa"]).status.code(), Some(2));
    assert_eq!(syncmat(&["chain", "cerny"]).status.code(), Some(2));
}
