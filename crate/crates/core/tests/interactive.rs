#[path = "common/run.rs"]
mod run;

use run::{bundled_program, compatible_pairs, load, stack};
use unilab::engine::{self, Report};
use unilab::interactive::{parse_command, run_session, BreakTarget, DebugCommand, HELP, PROMPT};
use unilab::io::BufferIo;

fn session(src: &str, config: &str, input: &[&str]) -> (Report, String) {
    let prog = load(src);
    let st = stack(config, &[("no-color", "true")]);
    let mut io = BufferIo::with_input(input.iter().copied());
    let r = run_session(&prog, &st, &mut io, None);
    (r, io.output)
}

fn same_result(a: &Report, b: &Report) -> bool {
    a.checks == b.checks && a.prints == b.prints && a.notes == b.notes && a.aborted == b.aborted
}

const CALLS: &str = "int sq(int v) {\n  int r = v * v;\n  return r;\n}\nint a = rand(1, 3);\nint b = sq(a);\nprint();\nassert(b > 0);\n";

#[test]
fn parses_every_command_and_alias() {
    use DebugCommand::*;
    let cases = [
        ("break 12", Break(BreakTarget::Line(12))),
        ("b f", Break(BreakTarget::Function("f".into()))),
        ("continue", Continue),
        ("c", Continue),
        ("next", Next),
        ("n", Next),
        ("step", Step),
        ("s", Step),
        ("finish", Finish),
        ("f", Finish),
        ("print", PrintVars(vec![])),
        ("p x y", PrintVars(vec!["x".into(), "y".into()])),
        ("env", Env),
        ("where", Where),
        ("backtrace", Backtrace),
        ("bt", Backtrace),
        ("help", Help),
        ("h", Help),
        ("quit", Quit),
        ("  q  ", Quit),
    ];
    for (text, cmd) in cases {
        assert_eq!(parse_command(text), Ok(cmd), "{text}");
    }
}

#[test]
fn rejects_malformed_commands() {
    for (text, msg) in [
        ("", "empty command, try help"),
        ("jump 3", "unknown command, try help"),
        ("break", "usage: break LINE|FUNCTION"),
        ("break 0", "invalid breakpoint: 0"),
        ("break 3x", "invalid breakpoint: 3x"),
        ("continue now", "continue takes no arguments"),
    ] {
        assert_eq!(parse_command(text).unwrap_err().0, msg, "{text:?}");
    }
}

#[test]
fn help_lists_every_command() {
    let (_, out) = session("int x = 1;\n", "intervals.json", &["help", "c"]);
    for (cmd, doc) in HELP {
        assert!(out.contains(cmd) && out.contains(doc));
    }
}

#[test]
fn starts_paused_at_the_first_statement() {
    let (_, out) = session(CALLS, "intervals.json", &["c"]);
    assert!(out.starts_with(&format!("paused at test.u:5:1 in toplevel\n{PROMPT}c\n")), "{out}");
}

#[test]
fn stepping_enters_calls_and_next_steps_over() {
    let (_, out) = session(CALLS, "intervals.json", &["n", "s", "s", "bt", "c"]);
    assert!(out.contains("paused at test.u:6:1 in toplevel"));
    assert!(out.contains("paused at test.u:2:3 in sq"), "{out}");
    assert!(out.contains("#0 sq at test.u:3:3\n#1 toplevel at test.u:6:9\n"), "{out}");
    let (_, out) = session(CALLS, "intervals.json", &["n", "n", "c"]);
    assert!(out.contains("paused at test.u:7:1 in toplevel"));
    assert!(!out.contains(" in sq"));
}

#[test]
fn finish_returns_to_the_caller() {
    let (_, out) = session(CALLS, "intervals.json", &["finish", "b sq", "c", "finish", "where", "c"]);
    assert!(out.contains("not inside a function"));
    assert!(out.contains("breakpoint set at function sq"));
    assert!(out.contains("paused at test.u:2:3 in sq"));
    assert!(out.contains("at test.u:7:1 in toplevel"), "{out}");
}

#[test]
fn line_breakpoints_and_print() {
    let (_, out) = session(CALLS, "intervals.json", &["b 8", "c", "p b zzz", "env", "c"]);
    assert!(out.contains("breakpoint set at line 8"));
    assert!(out.contains("paused at test.u:8:1 in toplevel"));
    assert!(out.contains("  b ∈ [1, 9]\n"), "{out}");
    assert!(out.contains("no such variable: zzz"));
    assert!(out.contains("  a ∈ [1, 3]\n"));
}

#[test]
fn loop_passes_are_shown() {
    let src = "int i = 0;\nwhile (i < 3) {\n  i = i + 1;\n}\n";
    let (_, out) = session(src, "intervals.json", &["b 3", "c", "c", "c"]);
    assert!(out.contains("paused at test.u:3:3 in toplevel, loop pass 1"), "{out}");
}

#[test]
fn quit_stops_the_analysis() {
    let (r, out) = session(CALLS, "intervals.json", &["q"]);
    assert_eq!(r.aborted.as_deref(), Some("stopped by user"));
    assert_eq!(r.status(), 3);
    assert!(out.contains("analysis aborted: stopped by user"));
}

#[test]
fn end_of_input_runs_to_completion() {
    let (r, out) = session(CALLS, "intervals.json", &[]);
    assert_eq!(r.aborted, None);
    assert!(out.ends_with("summary: 1 check proved, 0 alarms\n"), "{out}");
}

#[test]
fn stepping_to_the_end_says_so() {
    let src = "int x = 1;\n";
    let (_, out) = session(src, "intervals.json", &["s"]);
    assert!(out.contains("analysis finished\n"));
}

#[test]
fn continue_matches_the_automatic_engine() {
    let pairs = compatible_pairs();
    assert!(!pairs.is_empty());
    for (p, c) in pairs {
        let prog = bundled_program(p);
        let st = stack(c, &[("no-color", "true")]);
        let mut auto_io = BufferIo::new();
        let auto = engine::run(&prog, &st, &mut auto_io, None);
        let mut io = BufferIo::with_input(["continue"]);
        let inter = run_session(&prog, &st, &mut io, None);
        assert!(same_result(&auto, &inter), "{p} with {c}");
        assert!(io.output.ends_with(&auto_io.output), "{p} with {c}");
        assert_eq!(io.prompts, 1, "{p} with {c}");
    }
}
