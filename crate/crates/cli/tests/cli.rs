use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn lasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasp")).current_dir(root()).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scripted_run_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = lasp(&["run", "scenarios/case2", "--backend", "scripted", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("case2: success"), "{}", stdout(&o));
    let events = fs::read_to_string(out.join("events.jsonl")).unwrap();
    assert_eq!(events.lines().count(), 2, "header plus one precondition: {events}");
    assert_eq!(fs::read_to_string(out.join("plan.txt")).unwrap().lines().count(), 3);
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["outcome"], "success");
}

#[test]
fn replay_reproduces_the_golden_record() {
    let o = lasp(&["replay", "scenarios/case3", "golden/case3.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("object_added glove"), "{text}");
    assert!(text.contains("plan (10 steps)"), "{text}");
    assert_eq!(text, stdout(&lasp(&["replay", "scenarios/case3", "golden/case3.jsonl"])));
}

#[test]
fn transcript_for_another_scenario_is_a_backend_error() {
    let o = lasp(&["run", "scenarios/case3", "--backend", "replay:golden/case9.jsonl"]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("transcript mismatch at exchange 0"), "{err}");
    assert_eq!(err.matches("transcript mismatch").count(), 1, "cause repeated: {err}");
}

#[test]
fn exhausted_depth_budget_exits_one() {
    let o = lasp(&["run", "scenarios/case9", "--max-depth", "1"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(!stdout(&o).contains(": success"));
}

#[test]
fn invalid_inputs_exit_two() {
    assert_eq!(code(&lasp(&["run", "scenarios/does-not-exist"])), 2);
    assert_eq!(code(&lasp(&["run", "scenarios/case2", "--max-replans", "0"])), 2);
    let o = lasp(&["bench"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn live_backend_without_a_key_is_a_backend_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_lasp"))
        .current_dir(root())
        .env_remove("LASP_API_KEY")
        .args(["run", "scenarios/case2", "--backend", "live"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("LASP_API_KEY"), "{}", stderr(&o));
}

fn copy_bundle(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

#[test]
fn validate_reports_broken_bundles() {
    let o = lasp(&["validate", "scenarios/case1", "scenarios/case5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad");
    copy_bundle(&root().join("scenarios/case1"), &bad);
    let env = fs::read_to_string(bad.join("env.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&env).unwrap();
    v["unlisted"] = serde_json::json!(["no-such-predicate"]);
    fs::write(bad.join("env.json"), v.to_string()).unwrap();
    let o = lasp(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("unlisted symbol no-such-predicate"), "{}", stdout(&o));
}

#[test]
fn bench_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let report = dir.path().join(format!("report{i}.txt"));
        let o = lasp(&[
            "bench",
            "scenarios/case2",
            "scenarios/case4",
            "scenarios/case8",
            "--reps",
            "3",
            "--workers",
            workers,
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(stdout(&o), fs::read_to_string(&report).unwrap());
        texts.push(fs::read_to_string(report.with_extension("json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let json: serde_json::Value = serde_json::from_str(&texts[0]).unwrap();
    let cases = json["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 3);
    for c in cases {
        assert_eq!(c["successes"], 3, "{c}");
        assert_eq!(c["success_rate"], 1.0, "{c}");
    }
    assert!(json.get("wall_time_ms").is_none());
}
