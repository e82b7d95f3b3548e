#[path = "common/run.rs"]
mod run;

use std::sync::atomic::AtomicBool;

use run::{analyze, load, printed, stack};
use unilab::engine::{self, AlarmKind, Analyzer, Report};
use unilab::io::NullIo;

const LOOP: &str = "int i = 0;\nwhile (i < 10) {\n  i = i + 1;\n}\nprint();\n";

fn alarms(r: &Report) -> Vec<(AlarmKind, u32)> {
    r.alarms().map(|c| (c.kind, c.line)).collect()
}

#[test]
fn narrowing_recovers_the_exit_bound() {
    let (r, _) = analyze(LOOP, "intervals.json", &[("decreasing-iterations", "1")]);
    assert_eq!(printed(&r, 0), vec!["i ∈ [10, 10]"]);
    let (r, _) = analyze(LOOP, "intervals.json", &[("decreasing-iterations", "0")]);
    assert_eq!(printed(&r, 0), vec!["i ∈ [10, +∞]"]);
}

#[test]
fn thresholds_bound_the_widening() {
    let src = "int i = 0;\nwhile (i < 10) {\n  i = i + 1;\n  print();\n}\n";
    let (r, _) = analyze(src, "intervals.json", &[("decreasing-iterations", "0"), ("widening-thresholds", "10")]);
    assert_eq!(printed(&r, 0), vec!["i ∈ [1, 10]"]);
}

#[test]
fn unrolling_keeps_first_iterations_exact() {
    let src = "int i = 0;\nwhile (i < 3) {\n  i = i + 1;\n}\nprint();\n";
    let (r, _) = analyze(src, "intervals.json", &[("loop-unrolling", "5"), ("decreasing-iterations", "0")]);
    assert_eq!(printed(&r, 0), vec!["i ∈ [3, 3]"]);
}

#[test]
fn division_by_a_possibly_zero_value() {
    let src = "int x = rand(0, 1);\nint y = 1 / x;\nprint();\n";
    let (r, _) = analyze(src, "intervals.json", &[]);
    assert_eq!(alarms(&r), vec![(AlarmKind::DivisionByZero, 2)]);
    // the failing path is cut: only x = 1 reaches the print
    assert_eq!(printed(&r, 0), vec!["x ∈ [1, 1]", "y ∈ [1, 1]"]);
}

#[test]
fn empty_rand_range_is_unreachable() {
    let src = "int x = rand(5, 2);\nassert(x == 0);\nprint();\n";
    let (r, _) = analyze(src, "intervals.json", &[]);
    assert_eq!(r.alarm_count(), 0);
    assert!(r.prints.is_empty());
}

#[test]
fn breaks_join_the_loop_exit() {
    let src = "int i = 0;\nwhile (1) {\n  if (i >= 5) {\n    break;\n  }\n  i = i + 1;\n}\nprint();\n";
    let (r, _) = analyze(src, "intervals.json", &[]);
    assert_eq!(printed(&r, 0), vec!["i ∈ [5, 5]"]);
}

#[test]
fn recursion_beyond_the_call_depth_aborts() {
    let src = "int f(int n) {\n  return f(n + 1);\n}\nint x = f(0);\n";
    let (r, out) = analyze(src, "intervals.json", &[("call-depth", "8")]);
    assert_eq!(r.aborted.as_deref(), Some("recursion depth exceeded: more than 8 nested calls"));
    assert_eq!(r.status(), 3);
    assert!(out.contains("analysis aborted: recursion depth exceeded"));
}

#[test]
fn cancel_flag_aborts() {
    let prog = load(LOOP);
    let st = stack("intervals.json", &[("loop-unrolling", "10000000")]);
    let flag = AtomicBool::new(true);
    let mut io = NullIo;
    let (r, _) = Analyzer::new(&prog, &st, &mut io).with_cancel(&flag).run();
    assert_eq!(r.status(), 3);
}

#[test]
fn reports_are_deterministic() {
    for (p, c) in run::compatible_pairs() {
        let prog = run::bundled_program(p);
        let st = stack(c, &[]);
        let a = engine::run(&prog, &st, &mut NullIo, None);
        let b = engine::run(&prog, &st, &mut NullIo, None);
        assert_eq!(a.checks, b.checks, "{p} with {c}");
        assert_eq!(a.prints, b.prints, "{p} with {c}");
    }
}

#[test]
fn more_narrowing_never_adds_alarms() {
    for (p, c) in run::compatible_pairs() {
        if c == "straight_line.json" {
            continue;
        }
        let prog = run::bundled_program(p);
        let base = engine::run(&prog, &stack(c, &[("decreasing-iterations", "0")]), &mut NullIo, None);
        let more = engine::run(&prog, &stack(c, &[("decreasing-iterations", "2")]), &mut NullIo, None);
        let extra: Vec<_> = more.alarms().filter(|a| !base.alarms().any(|b| b == *a)).collect();
        assert!(extra.is_empty(), "{p} with {c}: {extra:?}");
    }
}

#[test]
fn empty_program() {
    let (r, out) = analyze("", "intervals.json", &[("no-color", "true")]);
    assert_eq!(r.status(), 0);
    assert!(r.checks.is_empty() && r.prints.is_empty());
    assert_eq!(out, "summary: 0 checks proved, 0 alarms\n");
}

#[test]
fn congruences_prove_parity() {
    let src = "int i = 0;\nwhile (i < 100) {\n  i = i + 2;\n}\nassert(i % 2 == 0);\n";
    let (r, _) = analyze(src, "intervals_congruences.json", &[]);
    assert_eq!(r.alarm_count(), 0);
    let (r, _) = analyze(src, "intervals.json", &[]);
    assert_eq!(r.alarm_count(), 1);
}

#[test]
fn polyhedra_relate_variables() {
    let src = "int x = rand(0, 10);\nint y = x + 1;\nassert(y > x);\nprint();\n";
    let (r, _) = analyze(src, "polyhedra.json", &[]);
    assert_eq!(r.alarm_count(), 0);
    assert!(printed(&r, 0).contains(&"y - x = 1".to_string()), "{:?}", printed(&r, 0));
    let (r, _) = analyze(src, "intervals.json", &[]);
    assert_eq!(r.alarm_count(), 1);
}

#[test]
fn string_index_out_of_bounds() {
    let src = "str s = \"abc\";\nint i = rand(0, 3);\nint c = s[i];\n";
    let (r, _) = analyze(src, "string_product_relational.json", &[]);
    assert_eq!(alarms(&r), vec![(AlarmKind::StringIndexOutOfBound, 3)]);
}

#[test]
fn json_format() {
    let src = "int x = rand(0, 1);\nint y = 1 / x;\n";
    let (r, out) = analyze(src, "intervals.json", &[("format", "json")]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, r.to_json());
    assert_eq!(v["alarms"][0]["kind"], "DivisionByZero");
    assert_eq!(v["summary"]["alarms"], 1);
}

#[test]
fn colors_follow_the_option() {
    let src = "int x = rand(0, 1);\nint y = 1 / x;\n";
    let (_, out) = analyze(src, "intervals.json", &[]);
    assert!(out.contains("\x1b[31m"));
    let (_, out) = analyze(src, "intervals.json", &[("no-color", "true")]);
    assert!(!out.contains('\x1b'));
}

#[test]
fn safe_checks_are_listed_on_request() {
    let src = "int x = 1;\nassert(x == 1);\n";
    let (_, out) = analyze(src, "intervals.json", &[]);
    assert!(!out.contains("safe at"));
    let (_, out) = analyze(src, "intervals.json", &[("show-safe-checks", "true"), ("no-color", "true")]);
    assert!(out.contains("safe at test.u:2:1: assertion proved safe [AssertFailure]"), "{out}");
}

#[test]
fn polyhedra_joins_stay_fast() {
    let src = "int x = rand(-2, 2);\nint y = rand(0, 1);\nint z = 1;\nint k = 0;\nwhile (k < 2) {\n  if (0 < x) {\n    x = -3;\n    z = y;\n  } else {\n    y = -2;\n  }\n  k = k + 1;\n}\nprint();\n";
    let t = std::time::Instant::now();
    let (r, _) = analyze(src, "polyhedra.json", &[]);
    assert!(t.elapsed().as_secs() < 10);
    assert!(printed(&r, 0).contains(&"k = 2".to_string()));
}
