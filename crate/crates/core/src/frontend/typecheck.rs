use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;

use super::ast::*;
use super::Diagnostic;

/// Scope name of toplevel declarations in [`TypedProgram::symbols`].
pub const GLOBAL_SCOPE: &str = "<global>";

/// Builtin function producing a one-character string from an ASCII code.
pub const CHAR_TO_STR: &str = "char_to_str";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolType {
    Var(Ty),
    Func { params: Vec<Ty>, ret: Ty },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotInfo {
    pub name: String,
    pub ty: Ty,
    /// Function name, or [`GLOBAL_SCOPE`].
    pub scope: String,
}

/// A resolved program: every variable occurrence carries its declaration slot
/// and every expression its type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    pub program: Program,
    pub symbols: BTreeMap<(String, String), SymbolType>,
    pub slots: Vec<SlotInfo>,
}

impl TypedProgram {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.program.functions.iter().find(|f| f.name == name)
    }

    pub fn slot(&self, slot: Slot) -> &SlotInfo {
        &self.slots[slot as usize]
    }

    pub fn file(&self) -> &str {
        &self.program.file
    }
}

struct Checker {
    errors: Vec<Diagnostic>,
    slots: Vec<SlotInfo>,
    symbols: BTreeMap<(String, String), SymbolType>,
    funcs: HashMap<String, (Vec<Ty>, Ty)>,
    scopes: Vec<HashMap<String, (Slot, Ty)>>,
    scope_name: String,
    loop_depth: usize,
    /// Return type of the function being checked; `None` at toplevel.
    ret: Option<Ty>,
}

impl Checker {
    fn err(&mut self, loc: &SourceLoc, msg: impl Into<String>) {
        self.errors.push(Diagnostic::error(loc.clone(), msg));
    }

    fn declare(&mut self, var: &mut Ident, ty: Ty, loc: &SourceLoc) {
        let scope = self.scopes.last_mut().expect("scope stack never empty");
        if scope.contains_key(&var.name) {
            let msg = format!("variable '{}' is already declared in this scope", var.name);
            self.err(loc, msg);
        }
        let slot = self.slots.len() as Slot;
        self.slots.push(SlotInfo {
            name: var.name.clone(),
            ty,
            scope: self.scope_name.clone(),
        });
        self.scopes
            .last_mut()
            .expect("scope stack never empty")
            .insert(var.name.clone(), (slot, ty));
        self.symbols
            .insert((self.scope_name.clone(), var.name.clone()), SymbolType::Var(ty));
        var.slot = slot;
    }

    fn lookup(&self, name: &str) -> Option<(Slot, Ty)> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn expect_ty(&mut self, e: &mut Expr, want: Ty, what: &str) {
        let got = self.expr(e);
        if let Some(got) = got {
            if got != want {
                let loc = e.loc.clone();
                self.err(&loc, format!("{what} must have type {want}, found {got}"));
            }
        }
    }

    /// Types `e` in place. `None` means an error was already reported.
    fn expr(&mut self, e: &mut Expr) -> Option<Ty> {
        let loc = e.loc.clone();
        let ty = match &mut e.kind {
            ExprKind::IntLit(_) => Some(Ty::Int),
            ExprKind::CharLit(c) => {
                let code = BigInt::from(*c);
                e.kind = ExprKind::IntLit(code);
                Some(Ty::Int)
            }
            ExprKind::StrLit(_) => Some(Ty::Str),
            ExprKind::Var(id) => match self.lookup(&id.name) {
                Some((slot, ty)) => {
                    id.slot = slot;
                    Some(ty)
                }
                None => {
                    let msg = format!("undefined variable '{}'", id.name);
                    self.err(&loc, msg);
                    None
                }
            },
            ExprKind::Unary(op, a) => {
                let what = match op {
                    UnOp::Neg => "operand of '-'",
                    UnOp::Not => "operand of '!'",
                };
                self.expect_ty(a, Ty::Int, what);
                Some(Ty::Int)
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                let ta = self.expr(a);
                let tb = self.expr(b);
                match (ta, tb) {
                    (Some(ta), Some(tb)) => match op {
                        BinOp::Concat => {
                            if ta != Ty::Str || tb != Ty::Str {
                                self.err(&loc, "@ expects string operands");
                            }
                            Some(Ty::Str)
                        }
                        BinOp::Eq | BinOp::Ne => {
                            if ta != tb || ta == Ty::Void {
                                self.err(
                                    &loc,
                                    format!("'{}' expects operands of the same type", op.symbol()),
                                );
                            }
                            Some(Ty::Int)
                        }
                        _ => {
                            if ta != Ty::Int || tb != Ty::Int {
                                self.err(
                                    &loc,
                                    format!("'{}' expects integer operands", op.symbol()),
                                );
                            }
                            Some(Ty::Int)
                        }
                    },
                    _ => Some(if op == BinOp::Concat { Ty::Str } else { Ty::Int }),
                }
            }
            ExprKind::Index(s, i) => {
                self.expect_ty(s, Ty::Str, "indexed value");
                self.expect_ty(i, Ty::Int, "index");
                Some(Ty::Int)
            }
            ExprKind::Length(s) => {
                self.expect_ty(s, Ty::Str, "operand of |.|");
                Some(Ty::Int)
            }
            ExprKind::Rand(lo, hi) => {
                self.expect_ty(lo, Ty::Int, "lower bound of rand");
                self.expect_ty(hi, Ty::Int, "upper bound of rand");
                Some(Ty::Int)
            }
            ExprKind::Call(name, args) => {
                let sig = if name == CHAR_TO_STR {
                    Some((vec![Ty::Int], Ty::Str))
                } else {
                    self.funcs.get(name.as_str()).cloned()
                };
                match sig {
                    None => {
                        let msg = format!("undefined function '{name}'");
                        self.err(&loc, msg);
                        for a in args.iter_mut() {
                            self.expr(a);
                        }
                        None
                    }
                    Some((params, ret)) => {
                        if params.len() != args.len() {
                            let msg = format!(
                                "function '{name}' expects {} argument(s), got {}",
                                params.len(),
                                args.len()
                            );
                            self.err(&loc, msg);
                        }
                        for (i, a) in args.iter_mut().enumerate() {
                            match params.get(i) {
                                Some(&p) => self.expect_ty(a, p, "argument"),
                                None => {
                                    self.expr(a);
                                }
                            }
                        }
                        Some(ret)
                    }
                }
            }
        };
        e.ty = ty;
        ty
    }

    fn value_expr(&mut self, e: &mut Expr) -> Option<Ty> {
        let t = self.expr(e);
        if t == Some(Ty::Void) {
            let loc = e.loc.clone();
            self.err(&loc, "void function used as a value");
            return None;
        }
        t
    }

    fn scoped(&mut self, s: &mut Stmt) {
        self.scopes.push(HashMap::new());
        self.stmt(s);
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &mut Stmt) {
        let loc = s.loc.clone();
        match &mut s.kind {
            StmtKind::Decl { ty, var, init } => {
                let ty = *ty;
                if let Some(e) = init {
                    if let Some(t) = self.value_expr(e) {
                        if t != ty {
                            self.err(
                                &e.loc.clone(),
                                format!("cannot initialize {ty} variable '{}' with {t}", var.name),
                            );
                        }
                    }
                }
                self.declare(var, ty, &loc);
            }
            StmtKind::Assign { var, value } => {
                let t = self.value_expr(value);
                match self.lookup(&var.name) {
                    None => {
                        let msg = format!("undefined variable '{}'", var.name);
                        self.err(&loc, msg);
                    }
                    Some((slot, vt)) => {
                        var.slot = slot;
                        if let Some(t) = t {
                            if t != vt {
                                let msg = format!("cannot assign {t} to {vt} variable '{}'", var.name);
                                self.err(&loc, msg);
                            }
                        }
                    }
                }
            }
            StmtKind::While { cond, body } => {
                self.expect_ty(cond, Ty::Int, "loop condition");
                self.loop_depth += 1;
                self.scoped(body);
                self.loop_depth -= 1;
            }
            StmtKind::If { cond, then, els } => {
                self.expect_ty(cond, Ty::Int, "condition");
                self.scoped(then);
                if let Some(e) = els {
                    self.scoped(e);
                }
            }
            StmtKind::Break => {
                if self.loop_depth == 0 {
                    self.err(&loc, "'break' outside of a loop");
                }
            }
            StmtKind::Return(value) => match (self.ret, value) {
                (None, _) => self.err(&loc, "'return' outside of a function"),
                (Some(Ty::Void), Some(e)) => {
                    self.expr(e);
                    self.err(&loc, "void function cannot return a value");
                }
                (Some(Ty::Void), None) => {}
                (Some(rt), None) => self.err(&loc, format!("missing return value of type {rt}")),
                (Some(rt), Some(e)) => {
                    if let Some(t) = self.value_expr(e) {
                        if t != rt {
                            self.err(&loc, format!("returning {t} from a function returning {rt}"));
                        }
                    }
                }
            },
            StmtKind::Expr(e) => {
                self.expr(e);
            }
            StmtKind::Print => {}
            StmtKind::Assert(e) => self.expect_ty(e, Ty::Int, "assertion"),
            StmtKind::Block(b) => {
                self.scopes.push(HashMap::new());
                for s in b.iter_mut() {
                    self.stmt(s);
                }
                self.scopes.pop();
            }
        }
    }
}

/// Resolves names and types. Character literals become integer literals.
pub fn typecheck(program: &Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let mut prog = program.clone();
    let mut ck = Checker {
        errors: Vec::new(),
        slots: Vec::new(),
        symbols: BTreeMap::new(),
        funcs: HashMap::new(),
        scopes: vec![HashMap::new()],
        scope_name: GLOBAL_SCOPE.to_string(),
        loop_depth: 0,
        ret: None,
    };
    for f in &prog.functions {
        if f.name == CHAR_TO_STR || ck.funcs.contains_key(&f.name) {
            let msg = format!("function '{}' is already defined", f.name);
            ck.err(&f.loc, msg);
            continue;
        }
        let params: Vec<Ty> = f.params.iter().map(|p| p.ty).collect();
        ck.funcs.insert(f.name.clone(), (params.clone(), f.ret));
        ck.symbols.insert(
            (GLOBAL_SCOPE.to_string(), f.name.clone()),
            SymbolType::Func { params, ret: f.ret },
        );
    }
    for f in &mut prog.functions {
        ck.scope_name = f.name.clone();
        ck.scopes = vec![HashMap::new()];
        ck.ret = Some(f.ret);
        let floc = f.loc.clone();
        for p in &mut f.params {
            ck.declare(&mut p.var, p.ty, &floc);
        }
        ck.stmt(&mut f.body);
    }
    ck.scope_name = GLOBAL_SCOPE.to_string();
    ck.scopes = vec![HashMap::new()];
    ck.ret = None;
    for s in &mut prog.toplevel {
        ck.stmt(s);
    }
    if ck.errors.is_empty() {
        Ok(TypedProgram {
            program: prog,
            symbols: ck.symbols,
            slots: ck.slots,
        })
    } else {
        Err(ck.errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn check(src: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
        typecheck(&parse(src, "t.u").unwrap())
    }

    #[test]
    fn char_literal_becomes_ascii_code() {
        let tp = check("int i = 1; int k = 'a' + i;").unwrap();
        let StmtKind::Decl { init: Some(e), .. } = &tp.program.toplevel[1].kind else { panic!() };
        let ExprKind::Binary(BinOp::Add, l, r) = &e.kind else { panic!() };
        assert_eq!(l.kind, ExprKind::IntLit(97.into()));
        assert!(matches!(&r.kind, ExprKind::Var(id) if id.name == "i" && id.slot == 0));
        assert_eq!(e.ty, Some(Ty::Int));
    }

    #[test]
    fn concat_needs_strings() {
        let errs = check("str s = \"a\"; str t = s @ 1;").unwrap_err();
        assert!(errs.iter().any(|d| d.message == "@ expects string operands"));
    }

    #[test]
    fn resolution_errors() {
        assert!(check("x = 1;").is_err());
        assert!(check("int x = f(1);").is_err());
        assert!(check("break;").is_err());
        assert!(check("int f(int a) { return a; } int x = f(1, 2);").is_err());
        assert!(check("int x = 1; int x = 2;").is_err());
        assert!(check("str s = \"a\"; int n = s + 1;").is_err());
        assert!(check("void f() { return; } int x = f();").is_err());
    }

    #[test]
    fn functions_cannot_see_globals() {
        assert!(check("int g = 1; int f() { return g; }").is_err());
    }

    #[test]
    fn shadowing_in_nested_blocks_is_allowed() {
        let tp = check("int x = 1; { str x = \"a\"; } x = 2;").unwrap();
        assert_eq!(tp.slots.len(), 2);
    }
}
