use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn program(name: &str) -> PathBuf {
    root().join("programs/universal").join(name)
}

fn config(name: &str) -> PathBuf {
    root().join("configs/universal").join(name)
}

fn unilab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_unilab"));
    c.env_remove("NO_COLOR");
    c
}

fn run(args: &[&str]) -> Output {
    unilab().args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

fn temp_program(name: &str, src: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("unilab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p
}

fn analyze(prog: &Path, cfg: &str, extra: &[&str]) -> Output {
    unilab()
        .arg("analyze")
        .arg(prog)
        .arg("--config")
        .arg(config(cfg))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn proves_the_alphabet_program() {
    let out = analyze(&program("str_alphabet2.u"), "string_product_relational.json", &["--no-color"]);
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    assert!(s.contains("  len(s) - i = 0\n"));
    assert!(s.ends_with("summary: 3 checks proved, 0 alarms\n"));
}

#[test]
fn alarms_exit_with_one() {
    let out = analyze(&program("str_alphabet2.u"), "intervals_congruences.json", &["--no-color"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("[AssertFailure]"));
}

#[test]
fn aborted_analysis_exits_with_three() {
    let p = temp_program("rec.u", "int f(int n) {\n  return f(n);\n}\nint x = f(1);\n");
    let out = analyze(&p, "intervals.json", &["--option", "call-depth=4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    let p = temp_program("bad.u", "int x = ;\n");
    let out = analyze(&p, "intervals.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).starts_with("error: "));
    let out = analyze(&program("loop_counter.u"), "intervals.json", &["--option", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = analyze(&program("loop_counter.u"), "intervals.json", &["--option", "widening-delay=x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = analyze(&program("loop_counter.u"), "straight_line.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = analyze(&root().join("missing.u"), "intervals.json", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn colors_and_no_color() {
    let p = program("division.u");
    let colored = analyze(&p, "intervals.json", &[]);
    assert!(text(&colored.stdout).contains('\x1b'));
    let plain = analyze(&p, "intervals.json", &["--no-color"]);
    assert!(!text(&plain.stdout).contains('\x1b'));
    let env = unilab()
        .env("NO_COLOR", "1")
        .args(["analyze", p.to_str().unwrap(), "--config", config("intervals.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(env.stdout, plain.stdout);
}

#[test]
fn json_format() {
    let out = analyze(&program("loop_counter.u"), "intervals.json", &["--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["alarms"], 0);
    assert_eq!(v["prints"][0]["state"][0], "i ∈ [10, 10]");
}

#[test]
fn share_url_decodes_to_the_inputs() {
    use base64::Engine as _;
    let out = analyze(&program("loop_counter.u"), "intervals.json", &["--share-url", "--option", "widening-delay=2"]);
    assert_eq!(out.status.code(), Some(0));
    let link = text(&out.stdout);
    let body = link.trim().strip_prefix("s=").unwrap();
    let bytes = base64::engine::general_purpose::URL_SAFE_NO_PAD.decode(body).unwrap();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["v"], 1);
    assert_eq!(v["language"], "universal");
    assert_eq!(v["program"], std::fs::read_to_string(program("loop_counter.u")).unwrap());
    assert_eq!(v["options"]["widening-delay"], "2");
}

#[test]
fn interactive_reads_commands_from_stdin() {
    let p = program("functions.u");
    let mut child = unilab()
        .args(["analyze", p.to_str().unwrap(), "--config", config("intervals.json").to_str().unwrap(), "--interactive", "--no-color"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"b square\nc\nbt\nc\n").unwrap();
    let out = child.wait_with_output().unwrap();
    let s = text(&out.stdout);
    assert!(s.contains("paused at "), "{s}");
    assert!(s.contains("in square"), "{s}");
    assert!(s.contains("#1 toplevel at "), "{s}");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn options_lists_metadata() {
    let out = run(&["options", "--config", config("string_product_relational.json").to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&str> = v.as_array().unwrap().iter().map(|o| o["key"].as_str().unwrap()).collect();
    assert!(keys.contains(&"widening-delay") && keys.contains(&"engine"));
}

#[test]
fn worker_over_stdio() {
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(config("intervals.json")).unwrap()).unwrap();
    let start = serde_json::json!({
        "type": "start",
        "program": "int x = rand(0, 1);\nint y = 1 / x;\n",
        "language": "universal",
        "config": cfg,
        "options": {"no-color": true},
    });
    let mut child = unilab()
        .arg("worker")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    writeln!(child.stdin.take().unwrap(), "{start}").unwrap();
    let out = child.wait_with_output().unwrap();
    let msgs: Vec<Value> = text(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let done = msgs.last().unwrap();
    assert_eq!(done["type"], "done");
    assert_eq!(done["status"], 1);
    assert!(msgs.iter().any(|m| m["type"] == "output"));
}
