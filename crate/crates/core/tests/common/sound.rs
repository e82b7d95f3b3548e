//! Soundness against the reference interpreter: every reachable concrete
//! state is covered by the analysis snapshot at the same point, and every
//! concrete runtime error is reported as an alarm at its location.

#![allow(dead_code)]

use unilab::config::DomainStack;
use unilab::engine::{concrete_run, Analyzer};
use unilab::frontend::TypedProgram;
use unilab::io::NullIo;

pub const BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct Stats {
    pub states: usize,
    pub failures: usize,
    pub exhaustive: bool,
}

pub fn check(prog: &TypedProgram, stack: &DomainStack, budget: usize) -> Result<Stats, String> {
    let ex = concrete_run(prog, budget);
    let (r, snaps) = Analyzer::new(prog, stack, &mut NullIo).with_snapshots().run();
    if let Some(a) = &r.aborted {
        return Err(format!("aborted: {a}"));
    }
    for (pt, st) in &ex.states {
        if !snaps.iter().any(|s| &s.point == pt && s.contains(&stack.strings, st)) {
            return Err(format!("state {st:?} at {pt:?} not covered"));
        }
    }
    for (k, l, c) in &ex.failures {
        if !r.alarms().any(|a| a.kind == *k && a.line == *l && a.column == *c) {
            return Err(format!("{k} at {l}:{c} happens but is not reported"));
        }
    }
    Ok(Stats {
        states: ex.states.len(),
        failures: ex.failures.len(),
        exhaustive: ex.exhaustive,
    })
}
