use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use num_bigint::BigInt;

use super::backend::{is_zero_cond, Backend};
use super::dims::{Dim, Owner, RET_SLOT};
use super::env::{AbstractEnv, Visible};
use super::render::render_state;
use super::report::{AlarmKind, Check, PrintBlock, Report, Status};
use crate::config::{parse_thresholds, DomainStack};
use crate::frontend::ast::{BinOp, Expr, ExprKind, SourceLoc, Stmt, StmtKind, UnOp};
use crate::frontend::{Ty, TypedProgram, CHAR_TO_STR};
use crate::io::IoChannel;
use crate::numeric::{ArithOp, CmpOp, NumCond, NumExpr};
use crate::poly::fm_truncations;
use crate::strings::{Strings, DEFAULT_MAX_SIZE};

/// Widening rounds after which a loop head is reset to top.
const MAX_WIDENINGS: u32 = 50;

type E = NumExpr<Dim>;
type R<T> = Result<T, Abort>;

/// Reason for stopping an analysis early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abort(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOptions {
    pub widening_delay: u32,
    pub loop_unrolling: u64,
    pub decreasing_iterations: u32,
    pub widening_thresholds: Vec<BigInt>,
    pub call_depth: u32,
    pub powerset_size: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            widening_delay: 1,
            loop_unrolling: 0,
            decreasing_iterations: 1,
            widening_thresholds: Vec::new(),
            call_depth: 64,
            powerset_size: DEFAULT_MAX_SIZE,
        }
    }
}

impl EngineOptions {
    pub fn from_stack(stack: &DomainStack) -> Self {
        let d = EngineOptions::default();
        let int = |k: &str, def: i64| stack.int_option(k).unwrap_or(def).max(0);
        EngineOptions {
            widening_delay: int("widening-delay", d.widening_delay as i64) as u32,
            loop_unrolling: int("loop-unrolling", 0) as u64,
            decreasing_iterations: int("decreasing-iterations", d.decreasing_iterations as i64) as u32,
            widening_thresholds: stack
                .str_option("widening-thresholds")
                .and_then(parse_thresholds)
                .unwrap_or_default()
                .into_iter()
                .map(BigInt::from)
                .collect(),
            call_depth: int("call-depth", 64) as u32,
            powerset_size: int("string.powerset.max-size", DEFAULT_MAX_SIZE as i64) as usize,
        }
    }
}

/// Where a snapshot was taken.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Print { line: u32, column: u32 },
    End,
}

/// Abstract state recorded at a print statement or at the end, kept for
/// comparison with concrete runs.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub point: Point,
    pub env: AbstractEnv,
    pub visible: Vec<Visible>,
}

#[derive(Debug, Clone)]
pub struct CallSite {
    pub func: String,
    pub loc: SourceLoc,
}

/// What a [`Hook`] sees before each statement.
pub struct StmtView<'a> {
    pub stmt: &'a Stmt,
    pub env: &'a AbstractEnv,
    pub visible: Vec<Visible>,
    /// Innermost call last.
    pub calls: Vec<CallSite>,
    pub loop_depth: usize,
    /// Body passes of the innermost loop so far.
    pub pass: u32,
    pub strings: Strings,
}

impl StmtView<'_> {
    pub fn call_depth(&self) -> usize {
        self.calls.len()
    }

    pub fn render(&self, only: Option<&[Visible]>) -> Vec<String> {
        render_state(self.env, only.unwrap_or(&self.visible), self.strings)
    }
}

pub enum Control {
    Continue,
    Quit,
}

/// Observer of the abstract execution, used by the debugger.
pub trait Hook {
    fn on_enter(&mut self, _func: &str) {}
    fn on_stmt(&mut self, view: &StmtView<'_>, io: &mut dyn IoChannel) -> Control;
}

struct LoopCtx {
    scope_depth: usize,
    breaks: Option<AbstractEnv>,
    pass: u32,
}

struct Frame {
    depth: u32,
    scopes: Vec<Vec<(String, Owner, Ty)>>,
    ret: Option<(Owner, Ty)>,
    ret_env: Option<AbstractEnv>,
    loops: Vec<LoopCtx>,
    site: Option<CallSite>,
}

fn join_opt(a: Option<AbstractEnv>, b: AbstractEnv) -> Option<AbstractEnv> {
    Some(match a {
        None => b,
        Some(a) => a.join(&b),
    })
}

fn cst(n: impl Into<BigInt>) -> E {
    NumExpr::Const(n.into())
}

pub struct Analyzer<'a> {
    prog: &'a TypedProgram,
    stack: &'a DomainStack,
    strings: Strings,
    opts: EngineOptions,
    io: &'a mut dyn IoChannel,
    hook: Option<&'a mut dyn Hook>,
    cancel: Option<&'a AtomicBool>,
    frames: Vec<Frame>,
    temps: Vec<(Owner, Ty)>,
    next_tmp: u32,
    silent: u32,
    checks: BTreeMap<(u32, u32, AlarmKind), Status>,
    prints: Vec<PrintBlock>,
    notes: BTreeSet<String>,
    snapshots: Option<Vec<Snapshot>>,
}

impl<'a> Analyzer<'a> {
    pub fn new(prog: &'a TypedProgram, stack: &'a DomainStack, io: &'a mut dyn IoChannel) -> Self {
        Analyzer {
            prog,
            stack,
            strings: Strings::new(stack.strings),
            opts: EngineOptions::from_stack(stack),
            io,
            hook: None,
            cancel: None,
            frames: Vec::new(),
            temps: Vec::new(),
            next_tmp: 0,
            silent: 0,
            checks: BTreeMap::new(),
            prints: Vec::new(),
            notes: BTreeSet::new(),
            snapshots: None,
        }
    }

    pub fn with_hook(mut self, hook: &'a mut dyn Hook) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn with_cancel(mut self, flag: &'a AtomicBool) -> Self {
        self.cancel = Some(flag);
        self
    }

    /// Keeps abstract states at print points and at the end.
    pub fn with_snapshots(mut self) -> Self {
        self.snapshots = Some(Vec::new());
        self
    }

    pub fn run(mut self) -> (Report, Vec<Snapshot>) {
        let start = Instant::now();
        let trunc0 = fm_truncations();
        let env = AbstractEnv::new(Backend::top(self.stack.backend), self.opts.powerset_size);
        self.frames.push(Frame {
            depth: 0,
            scopes: vec![Vec::new()],
            ret: None,
            ret_env: None,
            loops: Vec::new(),
            site: None,
        });
        let prog = self.prog;
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut env = env;
            for s in &prog.program.toplevel {
                env = self.exec(s, env)?;
            }
            Ok(env)
        }));
        let aborted = match result {
            Ok(Ok(env)) => {
                if let Some(snaps) = &mut self.snapshots {
                    let visible = visible_in(&self.frames[0]);
                    snaps.push(Snapshot {
                        point: Point::End,
                        env,
                        visible,
                    });
                }
                None
            }
            Ok(Err(Abort(r))) => Some(r),
            Err(p) => {
                let msg = p
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| p.downcast_ref::<String>().cloned())
                    .unwrap_or_default();
                Some(format!("internal error: {msg}"))
            }
        };
        let trunc = fm_truncations() - trunc0;
        if trunc > 0 {
            self.notes.insert(format!(
                "polyhedra: {trunc} projection(s) exceeded the constraint cap and were weakened"
            ));
        }
        let checks = self
            .checks
            .iter()
            .map(|(&(line, column, kind), &status)| Check {
                line,
                column,
                kind,
                status,
            })
            .collect();
        let report = Report {
            file: self.prog.file().to_string(),
            checks,
            prints: self.prints,
            notes: self.notes.into_iter().collect(),
            aborted,
            elapsed_ms: start.elapsed().as_millis(),
        };
        (report, self.snapshots.unwrap_or_default())
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("a frame is always active")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("a frame is always active")
    }

    fn poll(&self) -> R<()> {
        match self.cancel {
            Some(f) if f.load(Ordering::Relaxed) => Err(Abort("interrupted".into())),
            _ => Ok(()),
        }
    }

    fn fresh(&mut self) -> Owner {
        let o = Owner::Tmp(self.next_tmp);
        self.next_tmp += 1;
        o
    }

    fn temp_int(&mut self, env: &mut AbstractEnv) -> Owner {
        let o = self.fresh();
        env.num.add_dim(Dim::Var(o));
        self.temps.push((o, Ty::Int));
        o
    }

    fn temp_str(&mut self, env: &mut AbstractEnv) -> Owner {
        let o = self.fresh();
        self.strings.declare(env, o);
        self.temps.push((o, Ty::Str));
        o
    }

    fn remove_var(&self, env: &mut AbstractEnv, o: Owner, ty: Ty) {
        match ty {
            Ty::Int => env.num.remove_dims(&[Dim::Var(o)]),
            Ty::Str => self.strings.remove(env, o),
            Ty::Void => {}
        }
    }

    fn drop_temps(&mut self, env: &mut AbstractEnv, mark: usize) {
        for (o, ty) in self.temps.split_off(mark) {
            self.remove_var(env, o, ty);
        }
    }

    fn owner(&self, slot: u32) -> Owner {
        Owner::Prog {
            frame: self.frame().depth,
            slot,
        }
    }

    fn record(&mut self, kind: AlarmKind, loc: &SourceLoc, alarm: bool) {
        if self.silent > 0 {
            return;
        }
        let st = self.checks.entry((loc.line, loc.column, kind)).or_insert(Status::Safe);
        if alarm {
            *st = Status::Alarm;
        }
    }

    /// Records a verdict for `violation` and keeps the states where it
    /// does not hold.
    fn check(&mut self, kind: AlarmKind, loc: &SourceLoc, env: &mut AbstractEnv, violation: &NumCond<Dim>) {
        if env.is_bottom() {
            return;
        }
        let bad = env.num.filtered(violation);
        self.record(kind, loc, !bad.is_bottom());
        env.num.filter(&violation.negate());
        self.reduce_strings(env);
    }

    fn reduce_strings(&self, env: &mut AbstractEnv) {
        if !self.stack.strings.powerset {
            return;
        }
        let owners: Vec<Owner> = env.sets.keys().copied().collect();
        for o in owners {
            self.strings.reduce(env, o);
        }
    }

    fn pause(&mut self, s: &Stmt, env: &AbstractEnv) -> R<()> {
        let Some(hook) = self.hook.as_deref_mut() else {
            return Ok(());
        };
        let frame = self.frames.last().expect("a frame is always active");
        let view = StmtView {
            stmt: s,
            env,
            visible: visible_in(frame),
            calls: self.frames.iter().filter_map(|f| f.site.clone()).collect(),
            loop_depth: frame.loops.len(),
            pass: frame.loops.last().map(|l| l.pass).unwrap_or(0),
            strings: self.strings,
        };
        match hook.on_stmt(&view, &mut *self.io) {
            Control::Continue => self.poll(),
            Control::Quit => Err(Abort("stopped by user".into())),
        }
    }

    fn expected_dims(&self, env: &AbstractEnv) -> BTreeSet<Dim> {
        let mut out = BTreeSet::new();
        let mut add = |o: Owner, ty: Ty| match ty {
            Ty::Int => {
                out.insert(Dim::Var(o));
            }
            Ty::Str => out.extend(self.strings.ghosts(o)),
            Ty::Void => {}
        };
        for f in &self.frames {
            for sc in &f.scopes {
                for (_, o, ty) in sc {
                    add(*o, *ty);
                }
            }
            if let Some((o, ty)) = f.ret {
                add(o, ty);
            }
        }
        for (o, ty) in &self.temps {
            add(*o, *ty);
        }
        let _ = env;
        out
    }

    pub(crate) fn exec(&mut self, s: &Stmt, env: AbstractEnv) -> R<AbstractEnv> {
        if let StmtKind::Block(b) = &s.kind {
            return self.exec_block(b, env);
        }
        self.poll()?;
        if env.is_bottom() {
            return Ok(env);
        }
        self.pause(s, &env)?;
        let mark = self.temps.len();
        let mut out = self.exec_inner(s, env)?;
        self.drop_temps(&mut out, mark);
        if cfg!(debug_assertions) {
            let have = out.num.dims();
            let want = self.expected_dims(&out);
            if have != want {
                let leaked: Vec<String> = have.symmetric_difference(&want).map(|d| d.to_string()).collect();
                return Err(Abort(format!(
                    "internal error: dimensions out of sync after line {}: {}",
                    s.loc.line,
                    leaked.join(", ")
                )));
            }
        }
        Ok(out)
    }

    fn push_scope(&mut self) {
        self.frame_mut().scopes.push(Vec::new());
    }

    fn pop_scope(&mut self, env: &mut AbstractEnv) {
        let sc = self.frame_mut().scopes.pop().unwrap_or_default();
        for (_, o, ty) in sc {
            self.remove_var(env, o, ty);
        }
    }

    fn exec_block(&mut self, b: &[Stmt], env: AbstractEnv) -> R<AbstractEnv> {
        self.push_scope();
        let mut env = env;
        for s in b {
            env = self.exec(s, env)?;
        }
        self.pop_scope(&mut env);
        Ok(env)
    }

    fn exec_scoped(&mut self, s: &Stmt, env: AbstractEnv) -> R<AbstractEnv> {
        self.push_scope();
        let mut env = self.exec(s, env)?;
        self.pop_scope(&mut env);
        Ok(env)
    }

    fn assign_str(&mut self, env: &mut AbstractEnv, dst: Owner, src: Owner) {
        if dst == src {
            return;
        }
        if let Some(i) = self.temps.iter().position(|(o, _)| *o == src) {
            // a temporary is consumed by renaming it
            self.temps.remove(i);
            self.strings.remove(env, dst);
            self.strings.rename(env, src, dst);
        } else {
            self.strings.copy(env, dst, src);
        }
    }

    fn exec_inner(&mut self, s: &Stmt, mut env: AbstractEnv) -> R<AbstractEnv> {
        match &s.kind {
            StmtKind::Decl { ty, var, init } => {
                let o = self.owner(var.slot);
                match ty {
                    Ty::Str => {
                        let src = match init {
                            Some(e) => Some(self.eval_str(e, &mut env)?),
                            None => None,
                        };
                        self.strings.declare(&mut env, o);
                        match src {
                            Some(src) => self.assign_str(&mut env, o, src),
                            None => self.strings.literal(&mut env, o, b""),
                        }
                    }
                    _ => {
                        let v = match init {
                            Some(e) => self.eval_int(e, &mut env)?,
                            None => cst(0),
                        };
                        env.num.add_dim(Dim::Var(o));
                        env.num.assign(&Dim::Var(o), &v);
                    }
                }
                let name = var.name.clone();
                self.frame_mut()
                    .scopes
                    .last_mut()
                    .expect("scope stack never empty")
                    .push((name, o, *ty));
                Ok(env)
            }
            StmtKind::Assign { var, value } => {
                let o = self.owner(var.slot);
                if value.ty() == Ty::Str {
                    let src = self.eval_str(value, &mut env)?;
                    self.assign_str(&mut env, o, src);
                } else {
                    let v = self.eval_int(value, &mut env)?;
                    env.num.assign(&Dim::Var(o), &v);
                }
                Ok(env)
            }
            StmtKind::While { cond, body } => self.exec_while(cond, body, env),
            StmtKind::If { cond, then, els } => {
                let (t, f) = self.branch(cond, env)?;
                let a = self.exec_scoped(then, t)?;
                let b = match els {
                    Some(e) => self.exec_scoped(e, f)?,
                    None => f,
                };
                Ok(a.join(&b))
            }
            StmtKind::Break => {
                let mut out = env.clone();
                let frame = self.frame();
                let depth = frame.loops.last().map(|l| l.scope_depth).unwrap_or(frame.scopes.len());
                let inner: Vec<(Owner, Ty)> =
                    frame.scopes[depth..].iter().flatten().map(|(_, o, t)| (*o, *t)).collect();
                for (o, ty) in inner {
                    self.remove_var(&mut out, o, ty);
                }
                if let Some(l) = self.frame_mut().loops.last_mut() {
                    l.breaks = join_opt(l.breaks.take(), out);
                }
                Ok(env.to_bottom())
            }
            StmtKind::Return(value) => {
                let mark = self.temps.len();
                let ret = self.frame().ret;
                if let (Some(e), Some((o, ty))) = (value, ret) {
                    if ty == Ty::Str {
                        let src = self.eval_str(e, &mut env)?;
                        self.assign_str(&mut env, o, src);
                    } else {
                        let v = self.eval_int(e, &mut env)?;
                        env.num.assign(&Dim::Var(o), &v);
                    }
                }
                let mut out = env.clone();
                self.drop_temps(&mut out, mark);
                let inner: Vec<(Owner, Ty)> =
                    self.frame().scopes[1..].iter().flatten().map(|(_, o, t)| (*o, *t)).collect();
                for (o, ty) in inner {
                    self.remove_var(&mut out, o, ty);
                }
                let f = self.frame_mut();
                f.ret_env = join_opt(f.ret_env.take(), out);
                // the temps of this statement are gone from `env` too
                let mut env = env.to_bottom();
                self.drop_temps(&mut env, self.temps.len());
                Ok(env)
            }
            StmtKind::Expr(e) => {
                match e.ty() {
                    Ty::Str => {
                        self.eval_str(e, &mut env)?;
                    }
                    Ty::Int => {
                        self.eval_int(e, &mut env)?;
                    }
                    Ty::Void => {
                        if let ExprKind::Call(name, args) = &e.kind {
                            self.call(name, args, &e.loc, &mut env)?;
                        }
                    }
                }
                Ok(env)
            }
            StmtKind::Print => {
                if self.silent == 0 {
                    let visible = visible_in(self.frame());
                    let state = render_state(&env, &visible, self.strings);
                    self.prints.push(PrintBlock {
                        line: s.loc.line,
                        column: s.loc.column,
                        state,
                    });
                    if let Some(snaps) = &mut self.snapshots {
                        snaps.push(Snapshot {
                            point: Point::Print {
                                line: s.loc.line,
                                column: s.loc.column,
                            },
                            env: env.clone(),
                            visible,
                        });
                    }
                }
                Ok(env)
            }
            StmtKind::Assert(e) => {
                let c = self.eval_cond(e, &mut env)?;
                self.check(AlarmKind::AssertFailure, &s.loc, &mut env, &c.negate());
                Ok(env)
            }
            StmtKind::Block(b) => self.exec_block(b, env),
        }
    }

    /// Evaluates a condition and splits the state on it.
    fn branch(&mut self, cond: &Expr, env: AbstractEnv) -> R<(AbstractEnv, AbstractEnv)> {
        let mut env = env;
        let mark = self.temps.len();
        let c = self.eval_cond(cond, &mut env)?;
        let mut t = env.clone();
        t.num.filter(&c);
        self.reduce_strings(&mut t);
        let mut f = env;
        f.num.filter(&c.negate());
        self.reduce_strings(&mut f);
        for (o, ty) in self.temps.split_off(mark) {
            self.remove_var(&mut t, o, ty);
            self.remove_var(&mut f, o, ty);
        }
        Ok((t, f))
    }

    fn exec_while(&mut self, cond: &Expr, body: &Stmt, env: AbstractEnv) -> R<AbstractEnv> {
        let scope_depth = self.frame().scopes.len();
        self.frame_mut().loops.push(LoopCtx {
            scope_depth,
            breaks: None,
            pass: 0,
        });
        let mut exits: Option<AbstractEnv> = None;
        let mut cur = env;
        let mut unrolled = 0u64;
        while unrolled < self.opts.loop_unrolling && !cur.is_bottom() {
            self.poll()?;
            let (t, f) = self.branch(cond, cur)?;
            exits = join_opt(exits, f);
            self.bump_pass();
            cur = self.exec_scoped(body, t)?;
            unrolled += 1;
        }
        if let Some(b) = self.frame_mut().loops.last_mut().and_then(|l| l.breaks.take()) {
            exits = join_opt(exits, b);
        }

        self.silent += 1;
        let init = cur;
        let mut head = init.clone();
        let mut rounds = 0u32;
        loop {
            self.poll()?;
            let (t, _) = self.branch(cond, head.clone())?;
            self.bump_pass();
            let post = self.exec_scoped(body, t)?;
            let next = init.join(&post);
            if next.leq(&head) {
                break;
            }
            let joined = head.join(&next);
            head = if rounds < self.opts.widening_delay {
                joined
            } else {
                head.widen(&joined, &self.opts.widening_thresholds)
            };
            rounds += 1;
            if rounds > self.opts.widening_delay + MAX_WIDENINGS {
                head.forget_all();
                self.notes
                    .insert(format!("loop at line {} did not stabilize; its state was reset to top", cond.loc.line));
            }
        }
        for _ in 0..self.opts.decreasing_iterations {
            self.poll()?;
            let (t, _) = self.branch(cond, head.clone())?;
            self.bump_pass();
            let post = self.exec_scoped(body, t)?;
            let next = head.meet(&init.join(&post));
            if next == head {
                break;
            }
            head = next;
        }
        self.silent -= 1;
        if let Some(l) = self.frame_mut().loops.last_mut() {
            l.breaks = None;
        }

        let (t, f) = self.branch(cond, head)?;
        exits = join_opt(exits, f);
        self.bump_pass();
        self.exec_scoped(body, t)?;
        let ctx = self.frame_mut().loops.pop().expect("loop context");
        if let Some(b) = ctx.breaks {
            exits = join_opt(exits, b);
        }
        Ok(exits.expect("at least one exit state"))
    }

    fn bump_pass(&mut self) {
        if let Some(l) = self.frame_mut().loops.last_mut() {
            l.pass += 1;
        }
    }

    /// A 0/1 value for a condition.
    fn cond_value(&mut self, c: &NumCond<Dim>, env: &mut AbstractEnv) -> E {
        let t = self.temp_int(env);
        let d = Dim::Var(t);
        let mut a = env.num.filtered(c);
        a.assign(&d, &cst(1));
        let mut b = env.num.filtered(&c.negate());
        b.assign(&d, &cst(0));
        env.num = a.join(&b);
        NumExpr::Var(d)
    }

    fn unknown_bool(&mut self, env: &mut AbstractEnv) -> NumCond<Dim> {
        let t = self.temp_int(env);
        let d = Dim::Var(t);
        env.num.assign(&d, &NumExpr::rand(cst(0), cst(1)));
        NumCond::cmp(CmpOp::Ne, NumExpr::Var(d), cst(0))
    }

    fn length_of(&mut self, s: Owner, env: &mut AbstractEnv) -> E {
        match self.strings.length(s) {
            Some(e) => e,
            None => {
                let hint = self.strings.length_hint(env, s);
                let t = self.temp_int(env);
                let lo = hint.lo().cloned().unwrap_or_default();
                let hi = match hint.hi() {
                    Some(h) => cst(h.clone()),
                    // any upper bound is sound; the variable stays unbounded
                    None => NumExpr::Var(Dim::Var(t)),
                };
                if let NumExpr::Var(_) = hi {
                    env.num.filter(&NumCond::cmp(CmpOp::Ge, NumExpr::Var(Dim::Var(t)), cst(lo)));
                } else {
                    env.num.assign(&Dim::Var(t), &NumExpr::rand(cst(lo), hi));
                }
                NumExpr::Var(Dim::Var(t))
            }
        }
    }

    fn eval_cond(&mut self, e: &Expr, env: &mut AbstractEnv) -> R<NumCond<Dim>> {
        Ok(match &e.kind {
            ExprKind::Binary(op, a, b) if op.is_comparison() && a.ty() == Ty::Str => {
                let x = self.eval_str(a, env)?;
                let y = self.eval_str(b, env)?;
                match self.strings.equal(env, x, y) {
                    Some(eq) => NumCond::Const(eq == (*op == BinOp::Eq)),
                    None => self.unknown_bool(env),
                }
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let x = self.eval_int(a, env)?;
                let y = self.eval_int(b, env)?;
                let cop = match op {
                    BinOp::Lt => CmpOp::Lt,
                    BinOp::Le => CmpOp::Le,
                    BinOp::Gt => CmpOp::Gt,
                    BinOp::Ge => CmpOp::Ge,
                    BinOp::Eq => CmpOp::Eq,
                    _ => CmpOp::Ne,
                };
                NumCond::cmp(cop, x, y)
            }
            ExprKind::Binary(BinOp::And, a, b) => {
                let x = self.eval_cond(a, env)?;
                let y = self.eval_cond(b, env)?;
                NumCond::and(x, y)
            }
            ExprKind::Binary(BinOp::Or, a, b) => {
                let x = self.eval_cond(a, env)?;
                let y = self.eval_cond(b, env)?;
                NumCond::or(x, y)
            }
            ExprKind::Unary(UnOp::Not, a) => self.eval_cond(a, env)?.negate(),
            _ => {
                let v = self.eval_int(e, env)?;
                NumCond::cmp(CmpOp::Ne, v, cst(0))
            }
        })
    }

    fn eval_int(&mut self, e: &Expr, env: &mut AbstractEnv) -> R<E> {
        Ok(match &e.kind {
            ExprKind::IntLit(n) => NumExpr::Const(n.clone()),
            ExprKind::CharLit(c) => cst(*c),
            ExprKind::Var(id) => NumExpr::Var(Dim::Var(self.owner(id.slot))),
            ExprKind::Unary(UnOp::Neg, a) => NumExpr::Neg(Box::new(self.eval_int(a, env)?)),
            ExprKind::Unary(UnOp::Not, _) => {
                let c = self.eval_cond(e, env)?;
                self.cond_value(&c, env)
            }
            ExprKind::Binary(op, a, b) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    let x = self.eval_int(a, env)?;
                    let y = self.eval_int(b, env)?;
                    let aop = match op {
                        BinOp::Add => ArithOp::Add,
                        BinOp::Sub => ArithOp::Sub,
                        BinOp::Mul => ArithOp::Mul,
                        BinOp::Div => ArithOp::Div,
                        _ => ArithOp::Mod,
                    };
                    if matches!(aop, ArithOp::Div | ArithOp::Mod) {
                        let kind = if aop == ArithOp::Div {
                            AlarmKind::DivisionByZero
                        } else {
                            AlarmKind::ModuloByZero
                        };
                        self.check(kind, &e.loc, env, &is_zero_cond(y.clone()));
                    }
                    NumExpr::bin(aop, x, y)
                }
                _ => {
                    let c = self.eval_cond(e, env)?;
                    self.cond_value(&c, env)
                }
            },
            ExprKind::Index(s, j) => {
                let so = self.eval_str(s, env)?;
                let jv = self.eval_int(j, env)?;
                let len = self.length_of(so, env);
                self.check(
                    AlarmKind::StringIndexOutOfBound,
                    &e.loc,
                    env,
                    &Strings::out_of_bounds(&jv, &len),
                );
                let t = self.fresh();
                self.temps.push((t, Ty::Int));
                if env.is_bottom() {
                    env.num.add_dim(Dim::Var(t));
                } else {
                    self.strings.index_value(env, so, &jv, Dim::Var(t));
                }
                NumExpr::Var(Dim::Var(t))
            }
            ExprKind::Length(s) => {
                let so = self.eval_str(s, env)?;
                self.length_of(so, env)
            }
            ExprKind::Rand(lo, hi) => {
                let l = self.eval_int(lo, env)?;
                let h = self.eval_int(hi, env)?;
                let t = self.temp_int(env);
                env.num.assign(&Dim::Var(t), &NumExpr::rand(l, h));
                NumExpr::Var(Dim::Var(t))
            }
            ExprKind::Call(name, args) => match self.call(name, args, &e.loc, env)? {
                Some(o) => NumExpr::Var(Dim::Var(o)),
                None => cst(0),
            },
            ExprKind::StrLit(_) => unreachable!("string literal in integer context"),
        })
    }

    fn eval_str(&mut self, e: &Expr, env: &mut AbstractEnv) -> R<Owner> {
        Ok(match &e.kind {
            ExprKind::StrLit(s) => {
                let t = self.temp_str(env);
                self.strings.literal(env, t, s.as_bytes());
                t
            }
            ExprKind::Var(id) => self.owner(id.slot),
            ExprKind::Binary(BinOp::Concat, a, b) => {
                let x = self.eval_str(a, env)?;
                let y = self.eval_str(b, env)?;
                let t = self.temp_str(env);
                let aux = [self.fresh(), self.fresh()];
                self.strings.concat(env, t, x, y, aux);
                t
            }
            ExprKind::Call(name, args) => match self.call(name, args, &e.loc, env)? {
                Some(o) => o,
                None => self.temp_str(env),
            },
            _ => unreachable!("non-string expression in string context"),
        })
    }

    /// Inlines a call; returns the temporary holding the result.
    fn call(&mut self, name: &str, args: &[Expr], loc: &SourceLoc, env: &mut AbstractEnv) -> R<Option<Owner>> {
        if name == CHAR_TO_STR {
            let code = self.eval_int(&args[0], env)?;
            let bad = NumCond::or(
                NumCond::cmp(CmpOp::Lt, code.clone(), cst(0)),
                NumCond::cmp(CmpOp::Gt, code.clone(), cst(127)),
            );
            self.check(AlarmKind::InvalidCharCode, loc, env, &bad);
            let t = self.temp_str(env);
            if !env.is_bottom() {
                self.strings.from_char(env, t, &code);
            }
            return Ok(Some(t));
        }
        let f = self.prog.function(name).expect("calls are resolved by the type checker");
        let depth = self.frames.len() as u32;
        if depth > self.opts.call_depth {
            return Err(Abort(format!(
                "recursion depth exceeded: more than {} nested calls",
                self.opts.call_depth
            )));
        }
        enum Arg {
            Int(E),
            Str(Owner),
        }
        let mut vals = Vec::new();
        for (p, a) in f.params.iter().zip(args) {
            vals.push(match p.ty {
                Ty::Str => Arg::Str(self.eval_str(a, env)?),
                _ => Arg::Int(self.eval_int(a, env)?),
            });
        }
        let mut scope = Vec::new();
        for (p, v) in f.params.iter().zip(vals) {
            let o = Owner::Prog {
                frame: depth,
                slot: p.var.slot,
            };
            match v {
                Arg::Int(e) => {
                    env.num.add_dim(Dim::Var(o));
                    env.num.assign(&Dim::Var(o), &e);
                }
                Arg::Str(src) => {
                    self.strings.declare(env, o);
                    self.strings.copy(env, o, src);
                }
            }
            scope.push((p.var.name.clone(), o, p.ty));
        }
        let ret = match f.ret {
            Ty::Void => None,
            ty => {
                let o = Owner::Prog { frame: depth, slot: RET_SLOT };
                match ty {
                    Ty::Str => {
                        self.strings.declare(env, o);
                        self.strings.literal(env, o, b"");
                    }
                    _ => {
                        env.num.add_dim(Dim::Var(o));
                        env.num.assign(&Dim::Var(o), &cst(0));
                    }
                }
                Some((o, ty))
            }
        };
        self.frames.push(Frame {
            depth,
            scopes: vec![scope],
            ret,
            ret_env: None,
            loops: Vec::new(),
            site: Some(CallSite {
                func: name.to_string(),
                loc: loc.clone(),
            }),
        });
        if let Some(h) = self.hook.as_deref_mut() {
            h.on_enter(name);
        }
        let body_env = self.exec(&f.body, env.clone())?;
        let frame = self.frames.pop().expect("callee frame");
        let mut out = match frame.ret_env {
            Some(r) => r.join(&body_env),
            None => body_env,
        };
        for (_, o, ty) in frame.scopes.into_iter().flatten() {
            self.remove_var(&mut out, o, ty);
        }
        let result = match ret {
            None => None,
            Some((o, ty)) => {
                let t = self.fresh();
                match ty {
                    Ty::Str => self.strings.rename(&mut out, o, t),
                    _ => out.num.rename(&Dim::Var(o), Dim::Var(t)),
                }
                self.temps.push((t, ty));
                Some(t)
            }
        };
        *env = out;
        Ok(result)
    }
}

/// Variables of `frame` visible by name, innermost declaration first, sorted.
fn visible_in(frame: &Frame) -> Vec<Visible> {
    let mut by_name: BTreeMap<&str, (Owner, Ty)> = BTreeMap::new();
    for sc in &frame.scopes {
        for (n, o, t) in sc {
            by_name.insert(n, (*o, *t));
        }
    }
    by_name
        .into_iter()
        .map(|(n, (owner, ty))| Visible {
            name: n.to_string(),
            owner,
            ty,
        })
        .collect()
}
