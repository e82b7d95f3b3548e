use std::fmt;

use crate::frontend::ast::Slot;

/// Slot standing for the return value of a call frame.
pub const RET_SLOT: Slot = u32::MAX - 1;

/// What a numeric dimension is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    /// A program variable in call frame `frame` (0 is the toplevel).
    Prog { frame: u32, slot: Slot },
    /// A value computed while evaluating the current statement.
    Tmp(u32),
    /// Scratch dimension private to a backend operation.
    Aux(u32),
}

/// A dimension of the numeric backend. Variables sort before ghosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Var(Owner),
    Len(Owner),
    Ord(Owner),
}

impl Dim {
    pub fn owner(&self) -> Owner {
        match *self {
            Dim::Var(o) | Dim::Len(o) | Dim::Ord(o) => o,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Prog { frame, slot } if *slot == RET_SLOT => write!(f, "ret#{frame}"),
            Owner::Prog { frame, slot } => write!(f, "v{slot}#{frame}"),
            Owner::Tmp(n) => write!(f, "tmp{n}"),
            Owner::Aux(n) => write!(f, "aux{n}"),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Var(o) => write!(f, "{o}"),
            Dim::Len(o) => write!(f, "len({o})"),
            Dim::Ord(o) => write!(f, "ord({o})"),
        }
    }
}
