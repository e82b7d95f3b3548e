use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::Diagnostic;

const MAX_DEPTH: usize = 200;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, Diagnostic>;

fn binop_of(t: &Tok) -> Option<BinOp> {
    Some(match t {
        Tok::Plus => BinOp::Add,
        Tok::Minus => BinOp::Sub,
        Tok::Star => BinOp::Mul,
        Tok::Slash => BinOp::Div,
        Tok::Percent => BinOp::Mod,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        Tok::EqEq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::AndAnd => BinOp::And,
        Tok::OrOr => BinOp::Or,
        Tok::At => BinOp::Concat,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn loc(&self) -> SourceLoc {
        self.toks[self.pos].loc.clone()
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            self.loc(),
            format!(
                "syntax error: unexpected {}, expected {expected}",
                self.peek().describe()
            ),
        )
    }

    fn expect(&mut self, t: Tok, expected: &str) -> PResult<Token> {
        if *self.peek() == t {
            Ok(self.advance())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceLoc)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let loc = self.advance().loc;
                Ok((name, loc))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(Diagnostic::error(self.loc(), "program nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn type_tok(t: &Tok) -> Option<Ty> {
        match t {
            Tok::KwInt => Some(Ty::Int),
            Tok::KwStr => Some(Ty::Str),
            Tok::KwVoid => Some(Ty::Void),
            _ => None,
        }
    }

    fn program(&mut self, file: Arc<str>) -> PResult<Program> {
        let mut functions = Vec::new();
        let mut toplevel = Vec::new();
        while *self.peek() != Tok::Eof {
            let is_fun = Self::type_tok(self.peek()).is_some()
                && matches!(self.peek_at(1), Tok::Ident(_))
                && *self.peek_at(2) == Tok::LParen;
            if is_fun {
                functions.push(self.function()?);
            } else {
                toplevel.push(self.stmt()?);
            }
        }
        Ok(Program {
            file,
            functions,
            toplevel,
        })
    }

    fn function(&mut self) -> PResult<Function> {
        let loc = self.loc();
        let ret = Self::type_tok(&self.advance().tok).unwrap_or(Ty::Void);
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen, "'('")?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ty = match Self::type_tok(self.peek()) {
                    Some(Ty::Void) | None => return Err(self.unexpected("parameter type 'int' or 'str'")),
                    Some(t) => t,
                };
                self.advance();
                let (pname, _) = self.ident()?;
                params.push(Param {
                    ty,
                    var: Ident::new(pname),
                });
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')' or ','")?;
        if *self.peek() != Tok::LBrace {
            return Err(self.unexpected("'{' opening the function body"));
        }
        let body = self.stmt()?;
        Ok(Function {
            name,
            ret,
            params,
            body,
            loc,
        })
    }

    fn block(&mut self) -> PResult<Stmt> {
        let loc = self.expect(Tok::LBrace, "'{'")?.loc;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.unexpected("'}'"));
            }
            stmts.push(self.stmt()?);
        }
        self.advance();
        Ok(Stmt {
            kind: StmtKind::Block(stmts),
            loc,
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let r = self.stmt_inner();
        self.leave();
        r
    }

    fn stmt_inner(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::LBrace => return self.block(),
            Tok::KwInt | Tok::KwStr | Tok::KwVoid => {
                let ty = Self::type_tok(&self.advance().tok).unwrap_or(Ty::Int);
                if ty == Ty::Void {
                    return Err(Diagnostic::error(loc, "variables cannot have type void"));
                }
                let (name, _) = self.ident()?;
                if *self.peek() == Tok::LParen {
                    return Err(Diagnostic::error(
                        loc,
                        "functions may only be declared at the top level",
                    ));
                }
                let init = if *self.peek() == Tok::Assign {
                    self.advance();
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(Tok::Semi, "';' or '='")?;
                StmtKind::Decl {
                    ty,
                    var: Ident::new(name),
                    init,
                }
            }
            Tok::Ident(name) => match self.peek_at(1) {
                Tok::Assign => {
                    self.advance();
                    self.advance();
                    let value = self.expr()?;
                    self.expect(Tok::Semi, "';'")?;
                    StmtKind::Assign {
                        var: Ident::new(name),
                        value,
                    }
                }
                Tok::LParen => {
                    let e = self.expr()?;
                    if !matches!(e.kind, ExprKind::Call(..)) {
                        return Err(Diagnostic::error(loc, "expected a call statement"));
                    }
                    self.expect(Tok::Semi, "';'")?;
                    StmtKind::Expr(e)
                }
                _ => {
                    self.advance();
                    return Err(self.unexpected("'=' or '('"));
                }
            },
            Tok::KwWhile => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let body = Box::new(self.stmt()?);
                StmtKind::While { cond, body }
            }
            Tok::KwIf => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let then = Box::new(self.stmt()?);
                let els = if *self.peek() == Tok::KwElse {
                    self.advance();
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                StmtKind::If { cond, then, els }
            }
            Tok::KwBreak => {
                self.advance();
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Break
            }
            Tok::KwReturn => {
                self.advance();
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Return(value)
            }
            Tok::KwPrint => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                self.expect(Tok::RParen, "')'")?;
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Print
            }
            Tok::KwAssert => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Assert(e)
            }
            _ => return Err(self.unexpected("statement")),
        };
        Ok(Stmt { kind, loc })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        self.enter()?;
        let mut lhs = self.unary()?;
        while let Some(op) = binop_of(self.peek()) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let loc = self.advance().loc;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc);
        }
        self.leave();
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            _ => return self.postfix(),
        };
        self.enter()?;
        let loc = self.advance().loc;
        let e = self.unary()?;
        self.leave();
        Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), loc))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::LBracket {
            let loc = self.advance().loc;
            let idx = self.expr()?;
            self.expect(Tok::RBracket, "']'")?;
            e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), loc);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                ExprKind::IntLit(n)
            }
            Tok::Char(c) => {
                self.advance();
                ExprKind::CharLit(c)
            }
            Tok::Str(s) => {
                self.advance();
                ExprKind::StrLit(s)
            }
            Tok::Ident(name) => {
                self.advance();
                if *self.peek() == Tok::LParen {
                    self.advance();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if *self.peek() == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "')' or ','")?;
                    ExprKind::Call(name, args)
                } else {
                    ExprKind::Var(Ident::new(name))
                }
            }
            Tok::KwRand => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let lo = self.expr()?;
                self.expect(Tok::Comma, "','")?;
                let hi = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                ExprKind::Rand(Box::new(lo), Box::new(hi))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                return Ok(e);
            }
            Tok::Bar => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::Bar, "'|' closing the length")?;
                ExprKind::Length(Box::new(e))
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr::new(kind, loc))
    }
}

/// Parses Universal source text into an untyped program.
pub fn parse(source: &str, filename: &str) -> Result<Program, Vec<Diagnostic>> {
    let file: Arc<str> = Arc::from(filename);
    let toks = tokenize(source, &file).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    p.program(file).map_err(|d| vec![d])
}

/// Parses a single expression, used by tests and the debugger.
pub fn parse_expr(source: &str) -> Result<Expr, Vec<Diagnostic>> {
    let file: Arc<str> = Arc::from("<expr>");
    let toks = tokenize(source, &file).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr().map_err(|d| vec![d])?;
    if *p.peek() != Tok::Eof {
        return Err(vec![p.unexpected("end of expression")]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_declaration() {
        let p = parse("int i = 1;", "t.u").unwrap();
        assert_eq!(p.toplevel.len(), 1);
        match &p.toplevel[0].kind {
            StmtKind::Decl { ty, var, init } => {
                assert_eq!(*ty, Ty::Int);
                assert_eq!(var.name, "i");
                assert!(matches!(&init.as_ref().unwrap().kind, ExprKind::IntLit(n) if *n == 1.into()));
            }
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn missing_operand_reports_the_paren() {
        let errs = parse("while (x < ) {}", "t.u").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!((errs[0].loc.line, errs[0].loc.column), (1, 12));
        assert!(errs[0].message.contains("unexpected ')'"), "{}", errs[0].message);
        assert!(errs[0].message.contains("expected expression"));
    }

    #[test]
    fn precedence_is_c_like() {
        let e = parse_expr("a || b && c < d + e * f").unwrap();
        let ExprKind::Binary(BinOp::Or, _, rhs) = e.kind else { panic!() };
        let ExprKind::Binary(BinOp::And, _, rhs) = rhs.kind else { panic!() };
        let ExprKind::Binary(BinOp::Lt, _, rhs) = rhs.kind else { panic!() };
        let ExprKind::Binary(BinOp::Add, _, rhs) = rhs.kind else { panic!() };
        assert!(matches!(rhs.kind, ExprKind::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn length_and_index() {
        let e = parse_expr("s[j] - 'a' < |s|").unwrap();
        let ExprKind::Binary(BinOp::Lt, lhs, rhs) = e.kind else { panic!() };
        assert!(matches!(rhs.kind, ExprKind::Length(_)));
        let ExprKind::Binary(BinOp::Sub, idx, _) = lhs.kind else { panic!() };
        assert!(matches!(idx.kind, ExprKind::Index(_, _)));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("int x = {}1{};", "(".repeat(5000), ")".repeat(5000));
        assert!(parse(&src, "t.u").is_err());
    }
}
