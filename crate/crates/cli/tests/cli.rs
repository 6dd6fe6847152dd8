//! End-to-end checks of the `grassradon` binary.

use std::fs;
use std::process::Command;

fn grassradon() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grassradon"))
}

#[test]
fn selftest_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("selftest.csv");
    let status = grassradon().args(["selftest", "--output"]).arg(&out).status().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("experiment,phantom,seed,check"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn run_writes_the_report_named_in_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("remark.csv");
    let spec = dir.path().join("remark.toml");
    fs::write(
        &spec,
        format!(
            "name = \"remark\"\npipeline = \"remark\"\noutput = {:?}\n[config]\nn = 3\nk = 1\nk_prime = 2\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    let status = grassradon().arg("run").arg(&spec).status().unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn inadmissible_kappa_exits_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    fs::write(
        &spec,
        "name = \"bad\"\npipeline = \"invert_general\"\n[phantom]\nname = \"gaussian\"\n\
         [config]\nn = 4\nk = 1\nk_prime = 2\nkappa = 0\n",
    )
    .unwrap();
    let output = grassradon().arg("run").arg(&spec).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error:"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("typo.toml");
    fs::write(&spec, "name = \"typo\"\npipeline = \"remark\"\nsede = 3\n[config]\nn = 3\nk = 1\n").unwrap();
    let output = grassradon().arg("run").arg(&spec).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn defaults_table_is_printed() {
    let output = grassradon().arg("defaults").output().unwrap();
    assert!(output.status.success());
    assert!(!output.stdout.is_empty());
}
