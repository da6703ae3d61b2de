use std::path::Path;
use std::process::{Command, Output};

fn svsjoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svsjoin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn join_prints_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.txt", "0 0 0 1 2 3\n1 3 4 1 2 3 4\n2 100 0 1\n");
    for algo in ["oracle", "b", "g", "q"] {
        let out = svsjoin(&["join", &input, "--algo", algo]);
        assert_eq!(out.status.code(), Some(0), "{algo}");
        assert_eq!(String::from_utf8_lossy(&out.stdout), "0 1\n", "{algo}");
    }
}

#[test]
fn generate_then_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("gen.txt");
    let data = data.to_str().unwrap();
    let out = svsjoin(&["generate", "--records", "400", "--vocab", "200", "--words", "8", "-o", data]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(data).unwrap().lines().count(), 400);
    for algo in ["b", "g", "q"] {
        let out = svsjoin(&["check", data, "--algo", algo, "--gamma-g", "0.1", "--gamma-v", "0.5"]);
        assert_eq!(out.status.code(), Some(0), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.txt", "0 0 0 1 2\n1 x 4 1\n");
    let out = svsjoin(&["join", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('2'), "message cites the line");
}

#[test]
fn bad_threshold_and_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.txt", "0 0 0 1\n1 1 1 1\n");
    assert_eq!(svsjoin(&["join", &input, "--gamma-v", "1.5"]).status.code(), Some(1));
    assert_eq!(svsjoin(&["join", &input, "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(svsjoin(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_file_is_a_runtime_error() {
    let out = svsjoin(&["join", "/nonexistent/input.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_a_table() {
    let out = svsjoin(&["bench", "size", "--scale", "0.002"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows.len() > 1);
    let width = rows[0].split('\t').count();
    assert!(rows.iter().all(|r| r.split('\t').count() == width));
}
