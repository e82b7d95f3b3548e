//! Syntax tree of Universal programs.
//!
//! The same tree is produced by the parser and refined in place by the type
//! checker, which fills in variable slots and expression types.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// Position of a token in a source file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    pub fn new(file: &Arc<str>, line: u32, column: u32) -> Self {
        SourceLoc {
            file: file.clone(),
            line,
            column,
        }
    }

    /// Location used for nodes that have no source counterpart.
    pub fn dummy() -> Self {
        SourceLoc {
            file: Arc::from(""),
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Int,
    Str,
    Void,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Int => "int",
            Ty::Str => "str",
            Ty::Void => "void",
        })
    }
}

/// Index of a variable declaration (parameter or local) in the program.
pub type Slot = u32;

pub const UNRESOLVED: Slot = u32::MAX;

/// A variable occurrence. `slot` is [`UNRESOLVED`] until type checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub slot: Slot,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            slot: UNRESOLVED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Concat => "@",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub | BinOp::Concat => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(BigInt),
    /// ASCII code of a character literal; rewritten to `IntLit` by the type checker.
    CharLit(u8),
    StrLit(String),
    Var(Ident),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Length(Box<Expr>),
    Rand(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: SourceLoc,
    /// Filled in by the type checker.
    pub ty: Option<Ty>,
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLoc) -> Self {
        Expr {
            kind,
            loc,
            ty: None,
        }
    }

    pub fn ty(&self) -> Ty {
        self.ty.unwrap_or(Ty::Int)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl {
        ty: Ty,
        var: Ident,
        init: Option<Expr>,
    },
    Assign {
        var: Ident,
        value: Expr,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    Break,
    Return(Option<Expr>),
    /// A call evaluated for its effects.
    Expr(Expr),
    Print,
    Assert(Expr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: Ty,
    pub var: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub ret: Ty,
    pub params: Vec<Param>,
    pub body: Stmt,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub file: Arc<str>,
    pub functions: Vec<Function>,
    pub toplevel: Vec<Stmt>,
}

impl Program {
    /// Copy of the program with every location reset, for structural comparison.
    pub fn without_locs(&self) -> Program {
        let mut p = self.clone();
        p.file = Arc::from("");
        for f in &mut p.functions {
            f.loc = SourceLoc::dummy();
            strip_stmt(&mut f.body);
        }
        for s in &mut p.toplevel {
            strip_stmt(s);
        }
        p
    }

    pub fn has_loops(&self) -> bool {
        self.functions.iter().any(|f| stmt_has_loop(&f.body)) || self.toplevel.iter().any(stmt_has_loop)
    }

    /// True when some statement calls a user-defined function.
    pub fn has_user_calls(&self) -> bool {
        let user = |name: &str| self.functions.iter().any(|f| f.name == name);
        let mut found = false;
        let mut visit = |e: &Expr| {
            if let ExprKind::Call(name, _) = &e.kind {
                if user(name) {
                    found = true;
                }
            }
        };
        for f in &self.functions {
            walk_stmt_exprs(&f.body, &mut visit);
        }
        for s in &self.toplevel {
            walk_stmt_exprs(s, &mut visit);
        }
        found
    }
}

fn stmt_has_loop(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::While { .. } => true,
        StmtKind::If { then, els, .. } => {
            stmt_has_loop(then) || els.as_deref().map(stmt_has_loop).unwrap_or(false)
        }
        StmtKind::Block(b) => b.iter().any(stmt_has_loop),
        _ => false,
    }
}

/// Visits every expression node under `s`, parents before children.
pub fn walk_stmt_exprs(s: &Stmt, f: &mut impl FnMut(&Expr)) {
    match &s.kind {
        StmtKind::Decl { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, f)
            }
        }
        StmtKind::Assign { value, .. } => walk_expr(value, f),
        StmtKind::While { cond, body } => {
            walk_expr(cond, f);
            walk_stmt_exprs(body, f);
        }
        StmtKind::If { cond, then, els } => {
            walk_expr(cond, f);
            walk_stmt_exprs(then, f);
            if let Some(e) = els {
                walk_stmt_exprs(e, f);
            }
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert(e) => walk_expr(e, f),
        StmtKind::Block(b) => b.iter().for_each(|s| walk_stmt_exprs(s, f)),
        StmtKind::Break | StmtKind::Return(None) | StmtKind::Print => {}
    }
}

pub fn walk_expr(e: &Expr, f: &mut impl FnMut(&Expr)) {
    f(e);
    match &e.kind {
        ExprKind::IntLit(_) | ExprKind::CharLit(_) | ExprKind::StrLit(_) | ExprKind::Var(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Length(a) => walk_expr(a, f),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) | ExprKind::Rand(a, b) => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        ExprKind::Call(_, args) => args.iter().for_each(|a| walk_expr(a, f)),
    }
}

fn strip_expr(e: &mut Expr) {
    e.loc = SourceLoc::dummy();
    match &mut e.kind {
        ExprKind::IntLit(_) | ExprKind::CharLit(_) | ExprKind::StrLit(_) | ExprKind::Var(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Length(a) => strip_expr(a),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) | ExprKind::Rand(a, b) => {
            strip_expr(a);
            strip_expr(b);
        }
        ExprKind::Call(_, args) => args.iter_mut().for_each(strip_expr),
    }
}

fn strip_stmt(s: &mut Stmt) {
    s.loc = SourceLoc::dummy();
    match &mut s.kind {
        StmtKind::Decl { init, .. } => {
            if let Some(e) = init {
                strip_expr(e)
            }
        }
        StmtKind::Assign { value, .. } => strip_expr(value),
        StmtKind::While { cond, body } => {
            strip_expr(cond);
            strip_stmt(body);
        }
        StmtKind::If { cond, then, els } => {
            strip_expr(cond);
            strip_stmt(then);
            if let Some(e) = els {
                strip_stmt(e);
            }
        }
        StmtKind::Return(Some(e)) | StmtKind::Expr(e) | StmtKind::Assert(e) => strip_expr(e),
        StmtKind::Block(b) => b.iter_mut().for_each(strip_stmt),
        StmtKind::Break | StmtKind::Return(None) | StmtKind::Print => {}
    }
}
