use std::sync::Arc;

use num_bigint::BigInt;

use super::ast::SourceLoc;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Char(u8),
    Str(String),
    Ident(String),
    KwInt,
    KwStr,
    KwVoid,
    KwWhile,
    KwIf,
    KwElse,
    KwBreak,
    KwReturn,
    KwPrint,
    KwAssert,
    KwRand,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    At,
    Bar,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {n}"),
            Tok::Char(c) => format!("character literal {:?}", *c as char),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Eof => "end of input".to_string(),
            other => format!("'{}'", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::KwInt => "int",
            Tok::KwStr => "str",
            Tok::KwVoid => "void",
            Tok::KwWhile => "while",
            Tok::KwIf => "if",
            Tok::KwElse => "else",
            Tok::KwBreak => "break",
            Tok::KwReturn => "return",
            Tok::KwPrint => "print",
            Tok::KwAssert => "assert",
            Tok::KwRand => "rand",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::At => "@",
            Tok::Bar => "|",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: SourceLoc,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "int" => Tok::KwInt,
        "str" => Tok::KwStr,
        "void" => Tok::KwVoid,
        "while" => Tok::KwWhile,
        "if" => Tok::KwIf,
        "else" => Tok::KwElse,
        "break" => Tok::KwBreak,
        "return" => Tok::KwReturn,
        "print" => Tok::KwPrint,
        "assert" => Tok::KwAssert,
        "rand" => Tok::KwRand,
        _ => return None,
    })
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count characters, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(c)
    }

    fn loc(&self) -> SourceLoc {
        SourceLoc::new(&self.file, self.line, self.col)
    }

    fn error(&self, loc: SourceLoc, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(loc, msg)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.error(start, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn escape(&mut self, start: &SourceLoc) -> Result<u8, Diagnostic> {
        match self.bump() {
            Some(b'n') => Ok(b'\n'),
            Some(b't') => Ok(b'\t'),
            Some(b'r') => Ok(b'\r'),
            Some(b'0') => Ok(0),
            Some(b'\\') => Ok(b'\\'),
            Some(b'\'') => Ok(b'\''),
            Some(b'"') => Ok(b'"'),
            Some(c) if c.is_ascii() => Err(self.error(
                start.clone(),
                format!("unknown escape sequence '\\{}'", c as char),
            )),
            _ => Err(self.error(start.clone(), "invalid escape sequence")),
        }
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia()?;
        let loc = self.loc();
        let Some(c) = self.peek() else {
            return Ok(Token { tok: Tok::Eof, loc });
        };
        let tok = match c {
            b'0'..=b'9' => {
                let start = self.pos;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.bump();
                }
                if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
                    return Err(self.error(loc, "malformed integer literal"));
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("0");
                Tok::Int(digits.parse::<BigInt>().unwrap_or_default())
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.bump();
                }
                let word = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap_or("")
                    .to_string();
                keyword(&word).unwrap_or(Tok::Ident(word))
            }
            b'\'' => {
                self.bump();
                let code = match self.bump() {
                    Some(b'\\') => self.escape(&loc)?,
                    Some(b'\'') | Some(b'\n') | None => {
                        return Err(self.error(loc, "empty or unterminated character literal"))
                    }
                    Some(c) if c.is_ascii() => c,
                    Some(_) => return Err(self.error(loc, "character literals must be ASCII")),
                };
                if self.bump() != Some(b'\'') {
                    return Err(self.error(loc, "unterminated character literal"));
                }
                Tok::Char(code)
            }
            b'"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => break,
                        Some(b'\\') => s.push(self.escape(&loc)? as char),
                        Some(b'\n') | None => {
                            return Err(self.error(loc, "unterminated string literal"))
                        }
                        Some(c) if c.is_ascii() => s.push(c as char),
                        Some(_) => return Err(self.error(loc, "string literals must be ASCII")),
                    }
                }
                Tok::Str(s)
            }
            _ => {
                self.bump();
                let two = |this: &mut Self, next: u8, yes: Tok, no: Tok| {
                    if this.peek() == Some(next) {
                        this.bump();
                        yes
                    } else {
                        no
                    }
                };
                match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b'[' => Tok::LBracket,
                    b']' => Tok::RBracket,
                    b';' => Tok::Semi,
                    b',' => Tok::Comma,
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'%' => Tok::Percent,
                    b'@' => Tok::At,
                    b'=' => two(self, b'=', Tok::EqEq, Tok::Assign),
                    b'<' => two(self, b'=', Tok::Le, Tok::Lt),
                    b'>' => two(self, b'=', Tok::Ge, Tok::Gt),
                    b'!' => two(self, b'=', Tok::Ne, Tok::Bang),
                    b'|' => two(self, b'|', Tok::OrOr, Tok::Bar),
                    b'&' => {
                        if self.peek() == Some(b'&') {
                            self.bump();
                            Tok::AndAnd
                        } else {
                            return Err(self.error(loc, "unexpected character '&'"));
                        }
                    }
                    other => {
                        // skip the rest of a multi-byte character
                        let start = self.pos - 1;
                        while matches!(self.peek(), Some(b) if b & 0xC0 == 0x80) {
                            self.bump();
                        }
                        let shown = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                        let _ = other;
                        return Err(self.error(loc, format!("unexpected character '{shown}'")));
                    }
                }
            }
        };
        Ok(Token { tok, loc })
    }
}

/// Splits `source` into tokens, ending with [`Tok::Eof`].
pub fn tokenize(source: &str, file: &Arc<str>) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        file: file.clone(),
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, &Arc::from("t.u"))
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn operators_and_literals() {
        assert_eq!(
            toks("'a' + i <= 'z' || |s|"),
            vec![
                Tok::Char(97),
                Tok::Plus,
                Tok::Ident("i".into()),
                Tok::Le,
                Tok::Char(122),
                Tok::OrOr,
                Tok::Bar,
                Tok::Ident("s".into()),
                Tok::Bar,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            toks("/* x */ int // y\n i"),
            vec![Tok::KwInt, Tok::Ident("i".into()), Tok::Eof]
        );
    }

    #[test]
    fn locations_track_lines() {
        let ts = tokenize("int\n  x", &Arc::from("f")).unwrap();
        assert_eq!((ts[1].loc.line, ts[1].loc.column), (2, 3));
    }

    #[test]
    fn lexical_errors() {
        let f: Arc<str> = Arc::from("f");
        assert!(tokenize("\"abc", &f).is_err());
        assert!(tokenize("int # x", &f).is_err());
        assert!(tokenize("/* never closed", &f).is_err());
        assert!(tokenize("'ab'", &f).is_err());
    }
}
