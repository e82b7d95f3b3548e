//! Abstract execution of typed programs over a configured domain stack.

mod backend;
pub mod concrete;
mod dims;
mod env;
mod exec;
mod render;
mod report;

use std::sync::atomic::AtomicBool;

pub use backend::{is_zero_cond, Backend};
pub use concrete::{concrete_run, Exploration, State};
pub use dims::{Dim, Owner, RET_SLOT};
pub use env::{AbstractEnv, CValue, Visible};
pub use exec::{Abort, Analyzer, CallSite, Control, EngineOptions, Hook, Point, Snapshot, StmtView};
pub use render::render_state;
pub use report::{AlarmKind, Check, PrintBlock, Report, Status};

use crate::config::{DomainStack, StringLayer};
use crate::frontend::TypedProgram;
use crate::io::IoChannel;

/// Analyzes `prog` to completion and writes the rendered report to `io`.
pub fn run(prog: &TypedProgram, stack: &DomainStack, io: &mut dyn IoChannel, cancel: Option<&AtomicBool>) -> Report {
    let (report, _) = {
        let mut a = Analyzer::new(prog, stack, &mut *io);
        if let Some(c) = cancel {
            a = a.with_cancel(c);
        }
        a.run()
    };
    io.write(&render_for(&report, stack));
    report
}

/// Renders a report as selected by the `format`, `no-color` and
/// `show-safe-checks` options.
pub fn render_for(report: &Report, stack: &DomainStack) -> String {
    let json = stack.str_option("format") == Some("json");
    let color = !stack.flag("no-color");
    report.render(json, color, stack.flag("show-safe-checks"))
}

impl Snapshot {
    /// Whether a concrete state, keyed by variable name, is described by
    /// this snapshot.
    pub fn contains(&self, layer: &StringLayer, state: &State) -> bool {
        let mut vals = Vec::new();
        for v in &self.visible {
            match state.get(&v.name) {
                Some(c) => vals.push((v.owner, c.clone())),
                None => return false,
            }
        }
        vals.len() == state.len() && self.env.contains(layer, &vals)
    }
}
