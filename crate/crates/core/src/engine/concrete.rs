//! Reference interpreter. Every outcome of `rand` is explored (or sampled
//! when there are too many), giving the concrete states an analysis must
//! cover.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::CValue;
use super::exec::Point;
use super::report::AlarmKind;
use crate::frontend::ast::{BinOp, Expr, ExprKind, SourceLoc, Stmt, StmtKind, UnOp};
use crate::frontend::{Ty, TypedProgram, CHAR_TO_STR};

/// Statements executed by one run before it is cut short.
pub const STEP_LIMIT: u64 = 200_000;

/// Call nesting after which a run is dropped.
pub const DEPTH_LIMIT: usize = 64;

pub type State = BTreeMap<String, CValue>;

#[derive(Debug, Clone, Default)]
pub struct Exploration {
    pub states: BTreeSet<(Point, State)>,
    /// Runtime errors as (kind, line, column).
    pub failures: BTreeSet<(AlarmKind, u32, u32)>,
    pub runs: usize,
    /// Every outcome of `rand` was tried.
    pub exhaustive: bool,
    pub warning: Option<String>,
}

impl Exploration {
    pub fn states_at<'a>(&'a self, p: &'a Point) -> impl Iterator<Item = &'a State> + 'a {
        self.states.iter().filter(move |(q, _)| q == p).map(|(_, s)| s)
    }
}

enum Stop {
    Fail(AlarmKind, SourceLoc),
    /// Empty `rand` range, step limit, or call depth.
    Dropped,
}

enum Flow {
    Normal,
    Break,
    Return(Option<CValue>),
}

trait Chooser {
    fn pick(&mut self, lo: &BigInt, hi: &BigInt) -> BigInt;
}

#[derive(Default)]
struct Dfs {
    /// (value, upper bound) of each choice of the current path.
    path: Vec<(BigInt, BigInt)>,
    pos: usize,
}

impl Chooser for Dfs {
    fn pick(&mut self, lo: &BigInt, hi: &BigInt) -> BigInt {
        if self.pos == self.path.len() {
            self.path.push((lo.clone(), hi.clone()));
        }
        self.pos += 1;
        self.path[self.pos - 1].0.clone()
    }
}

impl Dfs {
    /// Moves to the next path; false when all were visited.
    fn advance(&mut self) -> bool {
        self.path.truncate(self.pos);
        self.pos = 0;
        while let Some((v, hi)) = self.path.last_mut() {
            if *v < *hi {
                *v += 1;
                return true;
            }
            self.path.pop();
        }
        false
    }
}

struct Sampler(ChaCha8Rng);

impl Chooser for Sampler {
    fn pick(&mut self, lo: &BigInt, hi: &BigInt) -> BigInt {
        match (hi - lo).to_u64() {
            Some(w) => lo + BigInt::from(self.0.gen_range(0..=w)),
            None => match self.0.gen_range(0..3) {
                0 => lo.clone(),
                1 => hi.clone(),
                _ => lo + BigInt::from(self.0.gen::<u64>()),
            },
        }
    }
}

struct Machine<'a> {
    prog: &'a TypedProgram,
    choose: &'a mut dyn Chooser,
    frames: Vec<Vec<BTreeMap<String, CValue>>>,
    steps: u64,
    out: &'a mut BTreeSet<(Point, State)>,
}

fn int(v: CValue) -> BigInt {
    match v {
        CValue::Int(n) => n,
        CValue::Str(_) => unreachable!("type checked"),
    }
}

fn bytes(v: CValue) -> Vec<u8> {
    match v {
        CValue::Str(s) => s,
        CValue::Int(_) => unreachable!("type checked"),
    }
}

fn truth(b: bool) -> CValue {
    CValue::Int(BigInt::from(b as u8))
}

impl Machine<'_> {
    fn visible(&self) -> State {
        let mut m = State::new();
        for sc in self.frames.last().into_iter().flatten() {
            for (k, v) in sc {
                m.insert(k.clone(), v.clone());
            }
        }
        m
    }

    fn lookup(&mut self, name: &str) -> &mut CValue {
        self.frames
            .last_mut()
            .and_then(|f| f.iter_mut().rev().find_map(|sc| sc.get_mut(name)))
            .expect("variables are resolved by the type checker")
    }

    fn declare(&mut self, name: &str, v: CValue) {
        let f = self.frames.last_mut().expect("frame");
        f.last_mut().expect("scope").insert(name.to_string(), v);
    }

    fn block(&mut self, b: &[Stmt]) -> Result<Flow, Stop> {
        self.frames.last_mut().expect("frame").push(BTreeMap::new());
        let mut flow = Flow::Normal;
        for s in b {
            flow = self.stmt(s)?;
            if !matches!(flow, Flow::Normal) {
                break;
            }
        }
        self.frames.last_mut().expect("frame").pop();
        Ok(flow)
    }

    fn scoped(&mut self, s: &Stmt) -> Result<Flow, Stop> {
        self.block(std::slice::from_ref(s))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Flow, Stop> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return Err(Stop::Dropped);
        }
        match &s.kind {
            StmtKind::Decl { ty, var, init } => {
                let v = match init {
                    Some(e) => self.expr(e)?,
                    None if *ty == Ty::Str => CValue::Str(Vec::new()),
                    None => CValue::Int(BigInt::zero()),
                };
                self.declare(&var.name, v);
            }
            StmtKind::Assign { var, value } => {
                let v = self.expr(value)?;
                *self.lookup(&var.name) = v;
            }
            StmtKind::While { cond, body } => loop {
                self.steps += 1;
                if self.steps > STEP_LIMIT {
                    return Err(Stop::Dropped);
                }
                if int(self.expr(cond)?).is_zero() {
                    break;
                }
                match self.scoped(body)? {
                    Flow::Normal => {}
                    Flow::Break => break,
                    r @ Flow::Return(_) => return Ok(r),
                }
            },
            StmtKind::If { cond, then, els } => {
                let c = int(self.expr(cond)?);
                if !c.is_zero() {
                    return self.scoped(then);
                } else if let Some(e) = els {
                    return self.scoped(e);
                }
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => Some(self.expr(e)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.expr(e)?;
            }
            StmtKind::Print => {
                let p = Point::Print {
                    line: s.loc.line,
                    column: s.loc.column,
                };
                let st = self.visible();
                self.out.insert((p, st));
            }
            StmtKind::Assert(e) => {
                if int(self.expr(e)?).is_zero() {
                    return Err(Stop::Fail(AlarmKind::AssertFailure, s.loc.clone()));
                }
            }
            StmtKind::Block(b) => return self.block(b),
        }
        Ok(Flow::Normal)
    }

    fn expr(&mut self, e: &Expr) -> Result<CValue, Stop> {
        Ok(match &e.kind {
            ExprKind::IntLit(n) => CValue::Int(n.clone()),
            ExprKind::CharLit(c) => CValue::Int(BigInt::from(*c)),
            ExprKind::StrLit(s) => CValue::Str(s.as_bytes().to_vec()),
            ExprKind::Var(id) => self.lookup(&id.name).clone(),
            ExprKind::Unary(UnOp::Neg, a) => CValue::Int(-int(self.expr(a)?)),
            ExprKind::Unary(UnOp::Not, a) => truth(int(self.expr(a)?).is_zero()),
            ExprKind::Binary(op, a, b) => {
                let x = self.expr(a)?;
                let y = self.expr(b)?;
                match op {
                    BinOp::Concat => {
                        let mut s = bytes(x);
                        s.extend(bytes(y));
                        CValue::Str(s)
                    }
                    BinOp::Eq => truth(x == y),
                    BinOp::Ne => truth(x != y),
                    _ => {
                        let (x, y) = (int(x), int(y));
                        match op {
                            BinOp::Add => CValue::Int(x + y),
                            BinOp::Sub => CValue::Int(x - y),
                            BinOp::Mul => CValue::Int(x * y),
                            BinOp::Div | BinOp::Mod if y.is_zero() => {
                                let k = if *op == BinOp::Div {
                                    AlarmKind::DivisionByZero
                                } else {
                                    AlarmKind::ModuloByZero
                                };
                                return Err(Stop::Fail(k, e.loc.clone()));
                            }
                            BinOp::Div => CValue::Int(x / y),
                            BinOp::Mod => CValue::Int(x % y),
                            BinOp::Lt => truth(x < y),
                            BinOp::Le => truth(x <= y),
                            BinOp::Gt => truth(x > y),
                            BinOp::Ge => truth(x >= y),
                            BinOp::And => truth(!x.is_zero() && !y.is_zero()),
                            BinOp::Or => truth(!x.is_zero() || !y.is_zero()),
                            _ => unreachable!("handled above"),
                        }
                    }
                }
            }
            ExprKind::Index(s, j) => {
                let s = bytes(self.expr(s)?);
                let j = int(self.expr(j)?);
                match j.to_usize().and_then(|j| s.get(j)) {
                    Some(c) => CValue::Int(BigInt::from(*c)),
                    None => return Err(Stop::Fail(AlarmKind::StringIndexOutOfBound, e.loc.clone())),
                }
            }
            ExprKind::Length(s) => CValue::Int(BigInt::from(bytes(self.expr(s)?).len())),
            ExprKind::Rand(lo, hi) => {
                let lo = int(self.expr(lo)?);
                let hi = int(self.expr(hi)?);
                if lo > hi {
                    return Err(Stop::Dropped);
                }
                CValue::Int(self.choose.pick(&lo, &hi))
            }
            ExprKind::Call(name, args) => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.expr(a)?);
                }
                if name == CHAR_TO_STR {
                    let c = int(vals.pop().expect("one argument"));
                    return match c.to_u8().filter(|c| *c <= 127) {
                        Some(c) => Ok(CValue::Str(vec![c])),
                        None => Err(Stop::Fail(AlarmKind::InvalidCharCode, e.loc.clone())),
                    };
                }
                let f = self.prog.function(name).expect("resolved");
                if self.frames.len() > DEPTH_LIMIT {
                    return Err(Stop::Dropped);
                }
                let scope: BTreeMap<String, CValue> =
                    f.params.iter().zip(vals).map(|(p, v)| (p.var.name.clone(), v)).collect();
                self.frames.push(vec![scope]);
                let flow = self.stmt(&f.body);
                self.frames.pop();
                match flow? {
                    Flow::Return(Some(v)) => v,
                    _ if f.ret == Ty::Str => CValue::Str(Vec::new()),
                    _ => CValue::Int(BigInt::zero()),
                }
            }
        })
    }
}

fn run_once(prog: &TypedProgram, choose: &mut dyn Chooser, ex: &mut Exploration) {
    let mut m = Machine {
        prog,
        choose,
        frames: vec![vec![BTreeMap::new()]],
        steps: 0,
        out: &mut ex.states,
    };
    let mut result = Ok(());
    for s in &prog.program.toplevel {
        if let Err(e) = m.stmt(s) {
            result = Err(e);
            break;
        }
    }
    match result {
        Ok(()) => {
            let st = m.visible();
            ex.states.insert((Point::End, st));
        }
        Err(Stop::Fail(k, loc)) => {
            ex.failures.insert((k, loc.line, loc.column));
        }
        Err(Stop::Dropped) => {}
    }
    ex.runs += 1;
}

/// Runs `prog` on every sequence of `rand` outcomes, or on a seeded sample
/// when more than `budget / 2` runs would be needed.
pub fn concrete_run(prog: &TypedProgram, budget: usize) -> Exploration {
    let mut ex = Exploration::default();
    let mut dfs = Dfs::default();
    let half = (budget / 2).max(1);
    loop {
        run_once(prog, &mut dfs, &mut ex);
        if !dfs.advance() {
            ex.exhaustive = true;
            return ex;
        }
        if ex.runs >= half {
            break;
        }
    }
    ex.warning = Some(format!("more than {half} rand outcomes; switched to sampling"));
    let mut s = Sampler(ChaCha8Rng::seed_from_u64(0x5eed));
    for _ in half..budget.max(half + 1) {
        run_once(prog, &mut s, &mut ex);
    }
    ex
}
