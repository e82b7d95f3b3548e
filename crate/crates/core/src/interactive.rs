//! The abstract debugger: a gdb-like command loop running inside the
//! analysis. The session starts paused at the first statement and reads
//! commands through the analysis I/O channel.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::AtomicBool;

use crate::config::DomainStack;
use crate::engine::{render_for, render_state, Analyzer, Control, Hook, Report, StmtView, Visible};
use crate::frontend::TypedProgram;
use crate::io::IoChannel;

pub const PROMPT: &str = "uni> ";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BreakTarget {
    Line(u32),
    Function(String),
}

impl fmt::Display for BreakTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakTarget::Line(l) => write!(f, "line {l}"),
            BreakTarget::Function(n) => write!(f, "function {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DebugCommand {
    Break(BreakTarget),
    Continue,
    Next,
    Step,
    Finish,
    /// Empty means every visible variable.
    PrintVars(Vec<String>),
    Env,
    Where,
    Backtrace,
    Help,
    Quit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandError(pub String);

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const HELP: &[(&str, &str)] = &[
    ("break (b) LINE|FUNCTION", "pause at a line or on entry to a function"),
    ("continue (c)", "run until the next breakpoint or the end"),
    ("next (n)", "run to the next statement at this depth, over calls and loops"),
    ("step (s)", "run to the next statement, entering calls"),
    ("finish (f)", "run until the current function returns"),
    ("print (p) [VAR...]", "show the abstract value of variables"),
    ("env", "show the whole abstract state"),
    ("where", "show the current location"),
    ("backtrace (bt)", "show the call stack"),
    ("help (h)", "list commands"),
    ("quit (q)", "stop the analysis"),
];

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_command(line: &str) -> Result<DebugCommand, CommandError> {
    let mut words = line.split_whitespace();
    let Some(head) = words.next() else {
        return Err(CommandError("empty command, try help".into()));
    };
    let args: Vec<&str> = words.collect();
    let no_args = |c: DebugCommand| {
        if args.is_empty() {
            Ok(c)
        } else {
            Err(CommandError(format!("{head} takes no arguments")))
        }
    };
    match head {
        "break" | "b" => match args.as_slice() {
            [t] => match t.parse::<u32>() {
                Ok(l) if l > 0 => Ok(DebugCommand::Break(BreakTarget::Line(l))),
                _ if is_ident(t) => Ok(DebugCommand::Break(BreakTarget::Function(t.to_string()))),
                _ => Err(CommandError(format!("invalid breakpoint: {t}"))),
            },
            _ => Err(CommandError("usage: break LINE|FUNCTION".into())),
        },
        "continue" | "c" => no_args(DebugCommand::Continue),
        "next" | "n" => no_args(DebugCommand::Next),
        "step" | "s" => no_args(DebugCommand::Step),
        "finish" | "f" => no_args(DebugCommand::Finish),
        "print" | "p" => Ok(DebugCommand::PrintVars(args.iter().map(|s| s.to_string()).collect())),
        "env" => no_args(DebugCommand::Env),
        "where" => no_args(DebugCommand::Where),
        "backtrace" | "bt" => no_args(DebugCommand::Backtrace),
        "help" | "h" => no_args(DebugCommand::Help),
        "quit" | "q" => no_args(DebugCommand::Quit),
        _ => Err(CommandError("unknown command, try help".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Run,
    Step,
    Next { calls: usize, loops: usize },
    Finish { calls: usize },
}

/// The debugger as an engine hook.
#[derive(Debug)]
pub struct Debugger {
    breakpoints: BTreeSet<BreakTarget>,
    mode: Mode,
    entered: bool,
    pauses: usize,
}

impl Default for Debugger {
    fn default() -> Self {
        Debugger {
            breakpoints: BTreeSet::new(),
            mode: Mode::Step,
            entered: false,
            pauses: 0,
        }
    }
}

impl Debugger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn breakpoints(&self) -> &BTreeSet<BreakTarget> {
        &self.breakpoints
    }

    /// Number of times the analysis paused.
    pub fn pauses(&self) -> usize {
        self.pauses
    }

    /// Whether the last command asked to stop at a later statement.
    pub fn stepping(&self) -> bool {
        self.mode != Mode::Run
    }

    fn should_pause(&mut self, v: &StmtView<'_>) -> bool {
        let by_mode = match self.mode {
            Mode::Run => false,
            Mode::Step => true,
            Mode::Next { calls, loops } => {
                v.call_depth() < calls || (v.call_depth() == calls && v.loop_depth <= loops)
            }
            Mode::Finish { calls } => v.call_depth() < calls,
        };
        let by_line = self.breakpoints.contains(&BreakTarget::Line(v.stmt.loc.line));
        let by_fn = std::mem::take(&mut self.entered);
        by_mode || by_line || by_fn
    }

    fn location(v: &StmtView<'_>) -> String {
        let func = v.calls.last().map(|c| c.func.as_str()).unwrap_or("toplevel");
        let mut s = format!("{} in {func}", v.stmt.loc);
        if v.loop_depth > 0 {
            s.push_str(&format!(", loop pass {}", v.pass));
        }
        s
    }

    fn print_vars(v: &StmtView<'_>, names: &[String], io: &mut dyn IoChannel) {
        let mut out = String::new();
        let mut chosen: Vec<Visible> = Vec::new();
        for n in names {
            match v.visible.iter().find(|x| &x.name == n) {
                Some(x) => chosen.push(x.clone()),
                None => out.push_str(&format!("no such variable: {n}\n")),
            }
        }
        if !chosen.is_empty() || names.is_empty() {
            let lines = if names.is_empty() {
                v.render(None)
            } else {
                render_state(v.env, &chosen, v.strings)
            };
            for l in lines {
                out.push_str(&format!("  {l}\n"));
            }
        }
        io.write(&out);
    }

    fn backtrace(v: &StmtView<'_>) -> String {
        let mut out = String::new();
        let n = v.calls.len();
        let here = v.calls.last().map(|c| c.func.as_str()).unwrap_or("toplevel");
        out.push_str(&format!("#0 {here} at {}\n", v.stmt.loc));
        for i in (0..n).rev() {
            let caller = if i == 0 { "toplevel" } else { v.calls[i - 1].func.as_str() };
            out.push_str(&format!("#{} {caller} at {}\n", n - i, v.calls[i].loc));
        }
        out
    }
}

impl Hook for Debugger {
    fn on_enter(&mut self, func: &str) {
        if self.breakpoints.contains(&BreakTarget::Function(func.to_string())) {
            self.entered = true;
        }
    }

    fn on_stmt(&mut self, v: &StmtView<'_>, io: &mut dyn IoChannel) -> Control {
        if !self.should_pause(v) {
            return Control::Continue;
        }
        self.pauses += 1;
        io.write(&format!("paused at {}\n", Self::location(v)));
        loop {
            let Some(line) = io.read_line(PROMPT) else {
                self.mode = Mode::Run;
                return Control::Continue;
            };
            let cmd = match parse_command(&line) {
                Ok(c) => c,
                Err(e) => {
                    io.write(&format!("{e}\n"));
                    continue;
                }
            };
            match cmd {
                DebugCommand::Break(t) => {
                    io.write(&format!("breakpoint set at {t}\n"));
                    self.breakpoints.insert(t);
                }
                DebugCommand::Continue => {
                    self.mode = Mode::Run;
                    return Control::Continue;
                }
                DebugCommand::Next => {
                    self.mode = Mode::Next {
                        calls: v.call_depth(),
                        loops: v.loop_depth,
                    };
                    return Control::Continue;
                }
                DebugCommand::Step => {
                    self.mode = Mode::Step;
                    return Control::Continue;
                }
                DebugCommand::Finish => {
                    if v.call_depth() == 0 {
                        io.write("not inside a function\n");
                        continue;
                    }
                    self.mode = Mode::Finish { calls: v.call_depth() };
                    return Control::Continue;
                }
                DebugCommand::PrintVars(names) => Self::print_vars(v, &names, io),
                DebugCommand::Env => Self::print_vars(v, &[], io),
                DebugCommand::Where => io.write(&format!("at {}\n", Self::location(v))),
                DebugCommand::Backtrace => io.write(&Self::backtrace(v)),
                DebugCommand::Help => {
                    let w = HELP.iter().map(|(c, _)| c.len()).max().unwrap_or(0);
                    let text: String = HELP.iter().map(|(c, d)| format!("  {c:w$}  {d}\n")).collect();
                    io.write(&text);
                }
                DebugCommand::Quit => return Control::Quit,
            }
        }
    }
}

/// Runs the analysis under the debugger and writes the final report.
pub fn run_session(
    prog: &TypedProgram,
    stack: &DomainStack,
    io: &mut dyn IoChannel,
    cancel: Option<&AtomicBool>,
) -> Report {
    let mut dbg = Debugger::new();
    let report = {
        let mut a = Analyzer::new(prog, stack, &mut *io).with_hook(&mut dbg);
        if let Some(c) = cancel {
            a = a.with_cancel(c);
        }
        a.run().0
    };
    if dbg.pauses() > 0 && dbg.stepping() && report.aborted.is_none() {
        io.write("analysis finished\n");
    }
    io.write(&render_for(&report, stack));
    report
}
