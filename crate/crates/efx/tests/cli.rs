//! End-to-end tests of the `efx` binary: the exit-code contract, stdout
//! formats, trace emission, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use efx::Allocation;

const CROSSING: &str = r#"{"m":5,"agents":["alpha","alpha","beta","beta"],"values":{"alpha":[1,1,3,3,2],"beta":[3,3,1,1,2]}}"#;

fn efx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_efx"))
}

fn write_file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).expect("write fixture");
    path
}

fn run(args: &[&str], paths: &[&Path]) -> Output {
    let mut command = efx();
    command.args(args);
    for path in paths {
        command.arg(path);
    }
    command.output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn code_of(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn solve_prints_a_complete_allocation_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "instance.json", CROSSING);
    let output = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&output), 0, "stderr: {}", stderr_of(&output));
    let allocation = Allocation::from_json(stdout_of(&output).trim()).expect("stdout is JSON");
    assert!(allocation.is_complete());
}

#[test]
fn solve_output_verifies_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "instance.json", CROSSING);
    let solved = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&solved), 0);
    let allocation = write_file(&dir, "allocation.json", stdout_of(&solved).trim());
    for mode in ["raw", "symbolic"] {
        let verified = run(&["verify", "--mode", mode], &[&instance, &allocation]);
        assert_eq!(code_of(&verified), 0, "mode {mode}: {}", stderr_of(&verified));
        assert!(stdout_of(&verified).contains(r#""status":"efx""#));
    }
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "bad.json", "{not json");
    let output = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&output), 2);
    assert!(stdout_of(&output).is_empty());
    assert!(stderr_of(&output).contains("JSON"));
}

#[test]
fn unreadable_file_exits_two() {
    let output = run(&["solve"], &[Path::new("/nonexistent/instance.json")]);
    assert_eq!(code_of(&output), 2);
    assert!(stderr_of(&output).contains("cannot read"));
}

#[test]
fn invalid_instance_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "negative.json",
        r#"{"m":2,"agents":["alpha"],"values":{"alpha":[1,"-1/2"],"beta":[0,0]}}"#,
    );
    let output = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&output), 3);
    assert!(stderr_of(&output).contains("negative value"));
}

#[test]
fn float_values_are_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "float.json",
        r#"{"m":1,"agents":["alpha"],"values":{"alpha":[0.5],"beta":[0]}}"#,
    );
    let output = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&output), 2);
}

#[test]
fn iteration_cap_exits_four_and_still_writes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "instance.json", CROSSING);
    let zero_cap = run(&["solve", "--max-steps", "0"], &[&instance]);
    assert_eq!(code_of(&zero_cap), 4);

    let trace_path = dir.path().join("partial.trace");
    let mut command = efx();
    command
        .args(["solve", "--max-steps", "2", "--trace"])
        .arg(&trace_path)
        .arg(&instance);
    let output = command.output().expect("binary runs");
    assert_eq!(code_of(&output), 4);
    assert!(stdout_of(&output).is_empty(), "no allocation on abort");
    let trace = std::fs::read_to_string(&trace_path).expect("trace exists");
    assert_eq!(trace.lines().count(), 2, "two aborted steps traced");
}

#[test]
fn trace_lines_are_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "instance.json", CROSSING);
    let trace_path = dir.path().join("run.trace");
    let mut command = efx();
    command.args(["solve", "--trace"]).arg(&trace_path).arg(&instance);
    let output = command.output().expect("binary runs");
    assert_eq!(code_of(&output), 0);
    let trace = std::fs::read_to_string(&trace_path).expect("trace exists");
    let mut step_lines = 0;
    for line in trace.lines() {
        let record: serde_json::Value = serde_json::from_str(line).expect("line is JSON");
        if record.get("step").is_some() {
            step_lines += 1;
            for key in ["case", "g", "changed_bundles", "pool", "potential"] {
                assert!(record.get(key).is_some(), "step record lacks {key}");
            }
        } else {
            assert_eq!(record["case"], "cycle");
            assert!(record["cycle"].is_array());
        }
    }
    assert!(step_lines >= 6, "the crossing run takes six steps");
}

#[test]
fn verify_rejects_non_efx_with_witness_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "instance.json",
        r#"{"m":2,"agents":["alpha","alpha"],"values":{"alpha":[5,3],"beta":[0,0]}}"#,
    );
    let allocation = write_file(&dir, "hoard.json", r#"{"bundles":[[0,1],[]],"pool":[]}"#);
    let output = run(&["verify"], &[&instance, &allocation]);
    assert_eq!(code_of(&output), 1);
    let report: serde_json::Value =
        serde_json::from_str(stdout_of(&output).trim()).expect("report is JSON");
    assert_eq!(report["status"], "not_efx");
    assert_eq!(report["witness"]["envious"], 1);
    assert_eq!(report["witness"]["envied"], 0);
    assert!(report["witness"]["removed"].is_u64());
}

#[test]
fn verify_rejects_duplicated_items_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "instance.json",
        r#"{"m":2,"agents":["alpha","beta"],"values":{"alpha":[5,3],"beta":[1,1]}}"#,
    );
    let allocation = write_file(&dir, "dup.json", r#"{"bundles":[[0],[0]],"pool":[1]}"#);
    let output = run(&["verify"], &[&instance, &allocation]);
    assert_eq!(code_of(&output), 3);
    assert!(stderr_of(&output).contains("item 0 in two bundles"));
}

#[test]
fn verify_rejects_pool_mismatch_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "instance.json",
        r#"{"m":2,"agents":["alpha","beta"],"values":{"alpha":[5,3],"beta":[1,1]}}"#,
    );
    let allocation = write_file(&dir, "pool.json", r#"{"bundles":[[0],[]],"pool":[]}"#);
    let output = run(&["verify"], &[&instance, &allocation]);
    assert_eq!(code_of(&output), 3);
    assert!(stderr_of(&output).contains("pool does not match complement"));
}

#[test]
fn oracle_lists_allocations_and_honors_first() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "instance.json",
        r#"{"m":3,"agents":["alpha","beta"],"values":{"alpha":[3,2,1],"beta":[1,2,3]}}"#,
    );
    let all = run(&["oracle"], &[&instance]);
    assert_eq!(code_of(&all), 0);
    let stdout = stdout_of(&all);
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(!lines.is_empty(), "oracle set must be nonempty");
    for line in &lines {
        let allocation = Allocation::from_json(line).expect("each line is an allocation");
        assert!(allocation.is_complete());
    }

    let first = run(&["oracle", "--first"], &[&instance]);
    assert_eq!(code_of(&first), 0);
    assert_eq!(stdout_of(&first).lines().count(), 1);
    assert_eq!(stdout_of(&first).lines().next(), lines.first().copied());
}

#[test]
fn oracle_partial_includes_pooled_allocations() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(
        &dir,
        "instance.json",
        r#"{"m":1,"agents":["alpha"],"values":{"alpha":[2],"beta":[0]}}"#,
    );
    let output = run(&["oracle", "--partial"], &[&instance]);
    assert_eq!(code_of(&output), 0);
    let stdout = stdout_of(&output);
    let allocations: Vec<Allocation> = stdout
        .lines()
        .map(|line| Allocation::from_json(line).expect("line parses"))
        .collect();
    assert_eq!(allocations.len(), 2, "the complete and the fully pooled one");
    assert!(allocations.iter().any(|a| a.is_complete()));
    assert!(allocations.iter().any(|a| !a.is_complete()));
}

#[test]
fn oracle_over_cap_exits_six() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_file(&dir, "instance.json", CROSSING);
    let output = run(&["oracle", "--cap", "10"], &[&instance]);
    assert_eq!(code_of(&output), 6);
    assert!(stderr_of(&output).contains("instance too large for oracle"));
}

#[test]
fn gen_produces_a_solvable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let generated = run(&["gen", "--seed", "5"], &[]);
    assert_eq!(code_of(&generated), 0);
    let instance = write_file(&dir, "gen.json", stdout_of(&generated).trim());
    let solved = run(&["solve"], &[&instance]);
    assert_eq!(code_of(&solved), 0, "stderr: {}", stderr_of(&solved));
}

#[test]
fn gen_with_fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--seed", "11", "--dist", "uniform-rational", "--den-max", "4", "--out"];
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let mut command = efx();
        command.args(args).arg(out);
        assert!(command.output().expect("binary runs").status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn gen_without_agents_exits_three() {
    let output = run(&["gen", "--n-alpha", "0", "--n-beta", "0"], &[]);
    assert_eq!(code_of(&output), 3);
    assert!(stderr_of(&output).contains("no agents"));
}

#[test]
fn gen_rho_out_of_range_exits_three() {
    let output = run(&["gen", "--dist", "correlated", "--rho", "3/2"], &[]);
    assert_eq!(code_of(&output), 3);
    assert!(stderr_of(&output).contains("correlation weight"));
}

#[test]
fn gen_unparseable_rho_exits_two() {
    let output = run(&["gen", "--dist", "correlated", "--rho", "half"], &[]);
    assert_eq!(code_of(&output), 2);
}

#[test]
fn gen_accepts_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_file(
        &dir,
        "spec.json",
        r#"{"n_alpha":1,"n_beta":2,"m":4,"value_dist":{"kind":"uniform_int","lo":0,"hi":3},"seed":8}"#,
    );
    let mut command = efx();
    command.args(["gen", "--spec"]).arg(&spec);
    let from_spec = command.output().expect("binary runs");
    assert_eq!(code_of(&from_spec), 0);

    let from_flags = run(
        &["gen", "--n-alpha", "1", "--n-beta", "2", "--m", "4", "--lo", "0", "--hi", "3", "--seed", "8"],
        &[],
    );
    assert_eq!(code_of(&from_flags), 0);
    assert_eq!(from_spec.stdout, from_flags.stdout);
}

#[test]
fn solve_verify_pipeline_for_generated_instances() {
    // The pipeline invariant: everything gen emits, solve completes, and
    // verify certifies in both modes.
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10u64 {
        let generated = run(&["gen", "--seed", &seed.to_string(), "--m", "7"], &[]);
        assert_eq!(code_of(&generated), 0);
        let instance = write_file(&dir, &format!("i{seed}.json"), stdout_of(&generated).trim());
        let solved = run(&["solve"], &[&instance]);
        assert_eq!(code_of(&solved), 0);
        let allocation = write_file(&dir, &format!("a{seed}.json"), stdout_of(&solved).trim());
        for mode in ["raw", "symbolic"] {
            let verified = run(&["verify", "--mode", mode], &[&instance, &allocation]);
            assert_eq!(code_of(&verified), 0, "seed {seed} mode {mode}");
        }
    }
}
