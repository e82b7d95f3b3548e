use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AlarmKind {
    AssertFailure,
    DivisionByZero,
    ModuloByZero,
    StringIndexOutOfBound,
    InvalidCharCode,
}

impl AlarmKind {
    pub fn message(self) -> &'static str {
        match self {
            AlarmKind::AssertFailure => "assertion may fail",
            AlarmKind::DivisionByZero => "possible division by zero",
            AlarmKind::ModuloByZero => "possible modulo by zero",
            AlarmKind::StringIndexOutOfBound => "string index may be out of bounds",
            AlarmKind::InvalidCharCode => "character code may be outside 0..127",
        }
    }

    pub fn check_name(self) -> &'static str {
        match self {
            AlarmKind::AssertFailure => "assertion",
            AlarmKind::DivisionByZero => "division",
            AlarmKind::ModuloByZero => "modulo",
            AlarmKind::StringIndexOutOfBound => "string index",
            AlarmKind::InvalidCharCode => "character code",
        }
    }
}

impl fmt::Display for AlarmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Alarm,
    Safe,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Check {
    pub line: u32,
    pub column: u32,
    pub kind: AlarmKind,
    pub status: Status,
}

impl Check {
    pub fn message(&self) -> String {
        match self.status {
            Status::Alarm => self.kind.message().to_string(),
            Status::Safe => format!("{} proved safe", self.kind.check_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintBlock {
    pub line: u32,
    pub column: u32,
    pub state: Vec<String>,
}

/// Result of an analysis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub file: String,
    /// One verdict per check site, sorted by location.
    pub checks: Vec<Check>,
    pub prints: Vec<PrintBlock>,
    pub notes: Vec<String>,
    /// Reason the analysis stopped early.
    pub aborted: Option<String>,
    pub elapsed_ms: u128,
}

const RED: &str = "\x1b[31m";
const GREEN: &str = "\x1b[32m";
const RESET: &str = "\x1b[0m";

impl Report {
    pub fn alarms(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Alarm)
    }

    pub fn proved(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Safe).count()
    }

    pub fn alarm_count(&self) -> usize {
        self.alarms().count()
    }

    /// 0 without alarms, 1 with alarms, 3 when aborted.
    pub fn status(&self) -> i32 {
        if self.aborted.is_some() {
            3
        } else if self.alarm_count() > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        let alarms: Vec<Value> = self
            .alarms()
            .map(|c| json!({"kind": c.kind, "line": c.line, "column": c.column, "message": c.message()}))
            .collect();
        let prints: Vec<Value> = self.prints.iter().map(|p| json!({"line": p.line, "state": p.state})).collect();
        json!({
            "alarms": alarms,
            "prints": prints,
            "summary": {"proved": self.proved(), "alarms": self.alarm_count()},
            "aborted": self.aborted.is_some(),
        })
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self, color: bool, show_safe: bool) -> String {
        let paint = |c: &str, s: String| if color { format!("{c}{s}{RESET}") } else { s };
        let mut out = String::new();
        for p in &self.prints {
            out.push_str(&format!("print at line {}, column {}:\n", p.line, p.column));
            for l in &p.state {
                out.push_str("  ");
                out.push_str(l);
                out.push('\n');
            }
            out.push('\n');
        }
        for c in &self.checks {
            let line = format!(
                "{} at {}:{}:{}: {} [{}]",
                if c.status == Status::Alarm { "alarm" } else { "safe" },
                self.file,
                c.line,
                c.column,
                c.message(),
                c.kind
            );
            match c.status {
                Status::Alarm => out.push_str(&paint(RED, line)),
                Status::Safe if show_safe => out.push_str(&paint(GREEN, line)),
                Status::Safe => continue,
            }
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        if let Some(r) = &self.aborted {
            out.push_str(&paint(RED, format!("analysis aborted: {r}")));
            out.push('\n');
        }
        let alarms = self.alarm_count();
        let summary = format!(
            "summary: {} check{} proved, {} alarm{}",
            self.proved(),
            if self.proved() == 1 { "" } else { "s" },
            alarms,
            if alarms == 1 { "" } else { "s" }
        );
        out.push_str(&paint(if alarms == 0 && self.aborted.is_none() { GREEN } else { RED }, summary));
        out.push('\n');
        out
    }

    pub fn render(&self, json: bool, color: bool, show_safe: bool) -> String {
        if json {
            self.render_json()
        } else {
            self.render_text(color, show_safe)
        }
    }
}
