//! Recursive-descent parser for the concrete syntax.
//!
//! ```text
//! term  := '\' VAR '.' term | ('S'|'shift') VAR '.' term | app
//! app   := atom atom*
//! atom  := VAR | '(' term ')' | '<' term '>'
//! ```
//!
//! `--` starts a comment. `λ` is accepted for `\`. An abstraction or shift
//! may also close an application (`f \x.x`), extending as far right as
//! possible. `@` is a hole, legal only when parsing contexts.

use thiserror::Error;

use super::surface::Surface;
use super::term::is_keyword;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lambda,
    Shift,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Hole,
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lambda => "`\\`".into(),
            Tok::Shift => "`S`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LAngle => "`<`".into(),
            Tok::RAngle => "`>`".into(),
            Tok::Hole => "`@`".into(),
            Tok::Ident(x) => format!("identifier `{x}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let single = match c {
            '\\' | 'λ' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '@' => Some(Tok::Hole),
            _ => None,
        };
        if let Some(tok) = single {
            bump(&mut chars);
            out.push(Spanned { tok, line: tl, column: tc });
            continue;
        }
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '-' {
            bump(&mut chars);
            if chars.peek() == Some(&'-') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            return Err(ParseError {
                line: tl,
                column: tc,
                message: "unexpected `-` (comments start with `--`)".into(),
            });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    name.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            let tok = if is_keyword(&name) { Tok::Shift } else { Tok::Ident(name) };
            out.push(Spanned { tok, line: tl, column: tc });
            continue;
        }
        return Err(ParseError { line: tl, column: tc, message: format!("unexpected character `{c}`") });
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    allow_hole: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, message }
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(x)
            }
            other => Err(self.error(format!("expected a variable, found {}", other.describe()))),
        }
    }

    fn term(&mut self) -> Result<Surface, ParseError> {
        match self.peek() {
            Tok::Lambda | Tok::Shift => self.binder(),
            _ => self.app(),
        }
    }

    fn binder(&mut self) -> Result<Surface, ParseError> {
        let is_lambda = self.advance() == Tok::Lambda;
        let x = self.ident()?;
        self.expect(Tok::Dot)?;
        let body = Box::new(self.term()?);
        Ok(if is_lambda { Surface::Lam(x, body) } else { Surface::Shift(x, body) })
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::LParen | Tok::LAngle | Tok::Hole)
    }

    fn app(&mut self) -> Result<Surface, ParseError> {
        let mut acc = self.atom()?;
        loop {
            if self.starts_atom() {
                let arg = self.atom()?;
                acc = Surface::App(Box::new(acc), Box::new(arg));
            } else if matches!(self.peek(), Tok::Lambda | Tok::Shift) {
                let arg = self.binder()?;
                return Ok(Surface::App(Box::new(acc), Box::new(arg)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(Surface::Var(x))
            }
            Tok::LParen => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LAngle => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RAngle)?;
                Ok(Surface::Reset(Box::new(t)))
            }
            Tok::Hole if self.allow_hole => {
                self.advance();
                Ok(Surface::Hole)
            }
            Tok::Hole => Err(self.error("`@` is only allowed in contexts".into())),
            other => Err(self.error(format!("expected a term, found {}", other.describe()))),
        }
    }
}

pub(crate) fn parse_surface(src: &str, allow_hole: bool) -> Result<Surface, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, allow_hole };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(t)
}
