//! Universal language frontend: lexing, parsing, name and type resolution,
//! pretty-printing.

pub mod ast;
mod lexer;
mod parser;
mod pretty;
mod typecheck;

use std::fmt;

pub use ast::{Program, SourceLoc, Ty};
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, parse_expr};
pub use pretty::{pretty, pretty_expr};
pub use typecheck::{typecheck, SlotInfo, SymbolType, TypedProgram, CHAR_TO_STR, GLOBAL_SCOPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub loc: SourceLoc,
    pub message: String,
}

impl Diagnostic {
    pub fn error(loc: SourceLoc, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            loc,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.loc, self.message)
    }
}

/// Parses and type checks `source` in one step.
pub fn load(source: &str, filename: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    typecheck(&parse(source, filename)?)
}
