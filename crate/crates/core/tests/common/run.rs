//! Running bundled programs in tests.

#![allow(dead_code)]

use unilab::bundled;
use unilab::config::{load_stack, set_option, DomainStack};
use unilab::engine::{self, Report};
use unilab::frontend::{self, TypedProgram};
use unilab::io::BufferIo;

pub fn stack(config: &str, options: &[(&str, &str)]) -> DomainStack {
    let text = bundled::config(config).unwrap_or_else(|| panic!("no config {config}"));
    let mut s = load_stack(text).unwrap();
    for (k, v) in options {
        set_option(&mut s, k, v).unwrap();
    }
    s
}

pub fn load(src: &str) -> TypedProgram {
    frontend::load(src, "test.u").unwrap_or_else(|d| panic!("{d:?}"))
}

pub fn bundled_program(name: &str) -> TypedProgram {
    let text = bundled::program(name).unwrap_or_else(|| panic!("no program {name}"));
    frontend::load(text, name).unwrap()
}

/// Analyzes `src` and returns the report with the rendered output.
pub fn analyze(src: &str, config: &str, options: &[(&str, &str)]) -> (Report, String) {
    let prog = load(src);
    let st = stack(config, options);
    let mut io = BufferIo::new();
    let r = engine::run(&prog, &st, &mut io, None);
    (r, io.output)
}

/// The state printed by the `n`-th `print()`.
pub fn printed(r: &Report, n: usize) -> Vec<String> {
    r.prints[n].state.clone()
}

/// Pairs of bundled programs and the configs that accept them.
pub fn compatible_pairs() -> Vec<(&'static str, &'static str)> {
    let mut out = Vec::new();
    for p in bundled::PROGRAMS {
        let prog = frontend::load(p.text, p.name).unwrap();
        for c in bundled::CONFIGS {
            let st = load_stack(c.text).unwrap();
            if st.supports(prog.program.has_loops(), prog.program.has_user_calls()).is_ok() {
                out.push((p.name, c.name));
            }
        }
    }
    out
}
