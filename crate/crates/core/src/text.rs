//! The concrete grammar.
//!
//! Formulae: `T`, atoms `t1<=t2` / `t1==t2`, conjunctions `F /\ F`
//! (right-associative, parentheses allowed), product terms `(t . t)`.
//! Arrows: generators such as `id{F}`, `b>{F;F;F}`, `del<{F}`, `c{F;F}`,
//! `r[t]`, `t[t;t;t]`, `s[t;t]`, `a[t;t;t;t]`, composition `g o f`
//! (right-associative) and tensor `f /\ g`, which binds tighter than
//! composition. Whitespace is insignificant. Identifiers match
//! `[a-zA-Z][a-zA-Z0-9_]*`; `T` is reserved for the empty conjunction.
//!
//! Printing is the `Display` implementation on each syntax type; this
//! module owns the inverse direction.

use std::fmt;

use crate::proofterm::ArrowTerm;
use crate::syntax::{Formula, Rel, Term, Variable};

/// A failed parse, with the position of the offending token.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: expected {}, found {}",
            self.line, self.col, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Top,
    Le,
    EquivEq,
    Wedge,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Dot,
    Gt,
    Lt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Top => "`T`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::EquivEq => "`==`".to_string(),
            Tok::Wedge => "`/\\`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Span {
    offset: usize,
    line: usize,
    col: usize,
}

fn lex(input: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let err = |offset: usize, line: usize, col: usize, expected: &str, found: String| ParseError {
        offset,
        line,
        col,
        expected: expected.to_string(),
        found,
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let span = Span {
            offset: i,
            line,
            col,
        };
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                    col += 1;
                }
                let word = &input[start..i];
                if word == "T" {
                    out.push((Tok::Top, span));
                } else {
                    out.push((Tok::Ident(word.to_string()), span));
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push((Tok::Le, span));
                    i += 2;
                    col += 2;
                } else {
                    out.push((Tok::Lt, span));
                    i += 1;
                    col += 1;
                }
            }
            '>' => {
                out.push((Tok::Gt, span));
                i += 1;
                col += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push((Tok::EquivEq, span));
                    i += 2;
                    col += 2;
                } else {
                    return Err(err(i, line, col, "`==`", format!("`{c}`")));
                }
            }
            '/' => {
                if bytes.get(i + 1) == Some(&b'\\') {
                    out.push((Tok::Wedge, span));
                    i += 2;
                    col += 2;
                } else {
                    return Err(err(i, line, col, "`/\\`", format!("`{c}`")));
                }
            }
            '(' => {
                out.push((Tok::LParen, span));
                i += 1;
                col += 1;
            }
            ')' => {
                out.push((Tok::RParen, span));
                i += 1;
                col += 1;
            }
            '{' => {
                out.push((Tok::LBrace, span));
                i += 1;
                col += 1;
            }
            '}' => {
                out.push((Tok::RBrace, span));
                i += 1;
                col += 1;
            }
            '[' => {
                out.push((Tok::LBracket, span));
                i += 1;
                col += 1;
            }
            ']' => {
                out.push((Tok::RBracket, span));
                i += 1;
                col += 1;
            }
            ';' => {
                out.push((Tok::Semi, span));
                i += 1;
                col += 1;
            }
            '.' => {
                out.push((Tok::Dot, span));
                i += 1;
                col += 1;
            }
            other => {
                return Err(err(i, line, col, "a token", format!("`{other}`")));
            }
        }
    }
    out.push((
        Tok::Eof,
        Span {
            offset: input.len(),
            line,
            col,
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        let (tok, span) = &self.toks[self.pos];
        ParseError {
            offset: span.offset,
            line: span.line,
            col: span.col,
            expected: expected.to_string(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(_) => {
                let Tok::Ident(name) = self.bump() else {
                    unreachable!()
                };
                Ok(name)
            }
            _ => Err(self.error(expected)),
        }
    }

    // --- terms -----------------------------------------------------------

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Ident(_) => {
                let name = self.ident("a variable")?;
                Ok(Term::Var(Variable::new(&name)))
            }
            Tok::LParen => {
                self.bump();
                let l = self.term()?;
                self.expect(Tok::Dot, "`.`")?;
                let r = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::prod(l, r))
            }
            _ => Err(self.error("a term")),
        }
    }

    // --- formulae ---------------------------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let first = self.formula_unit()?;
        if *self.peek() == Tok::Wedge {
            self.bump();
            let rest = self.formula()?;
            Ok(Formula::conj(first, rest))
        } else {
            Ok(first)
        }
    }

    fn formula_unit(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(_) => self.atom(),
            Tok::LParen => {
                // Either a parenthesised formula or an atom whose left side
                // is a product term. Try the term reading first and fall
                // back on failure.
                let save = self.pos;
                if let Ok(atom) = self.atom() {
                    return Ok(atom);
                }
                self.pos = save;
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error("a formula")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Le => Rel::Leq,
            Tok::EquivEq => Rel::Equiv,
            _ => return Err(self.error("`<=` or `==`")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Atom(rel, lhs, rhs))
    }

    // --- arrows -----------------------------------------------------------

    fn arrow(&mut self) -> Result<ArrowTerm, ParseError> {
        let first = self.tensor()?;
        if matches!(self.peek(), Tok::Ident(name) if name == "o") {
            self.bump();
            let rest = self.arrow()?;
            Ok(ArrowTerm::compose(first, rest))
        } else {
            Ok(first)
        }
    }

    fn tensor(&mut self) -> Result<ArrowTerm, ParseError> {
        let first = self.arrow_primary()?;
        if *self.peek() == Tok::Wedge {
            self.bump();
            let rest = self.tensor()?;
            Ok(ArrowTerm::tensor(first, rest))
        } else {
            Ok(first)
        }
    }

    fn arrow_primary(&mut self) -> Result<ArrowTerm, ParseError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let inner = self.arrow()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(_) => self.generator(),
            _ => Err(self.error("an arrow")),
        }
    }

    fn generator(&mut self) -> Result<ArrowTerm, ParseError> {
        let expected = "a generator (id, b>, b<, del>, del<, sig>, sig<, c, r, t, s, a)";
        let name = self.ident(expected)?;
        match name.as_str() {
            "id" => {
                let mut args = self.brace_formulas(1)?;
                Ok(ArrowTerm::Id(args.remove(0)))
            }
            "b" => {
                let fwd = self.direction()?;
                let mut args = self.brace_formulas(3)?;
                let (a, b, c) = (args.remove(0), args.remove(0), args.remove(0));
                Ok(if fwd {
                    ArrowTerm::BFwd(a, b, c)
                } else {
                    ArrowTerm::BBwd(a, b, c)
                })
            }
            "del" => {
                let fwd = self.direction()?;
                let mut args = self.brace_formulas(1)?;
                let a = args.remove(0);
                Ok(if fwd {
                    ArrowTerm::DeltaFwd(a)
                } else {
                    ArrowTerm::DeltaBwd(a)
                })
            }
            "sig" => {
                let fwd = self.direction()?;
                let mut args = self.brace_formulas(1)?;
                let a = args.remove(0);
                Ok(if fwd {
                    ArrowTerm::SigmaFwd(a)
                } else {
                    ArrowTerm::SigmaBwd(a)
                })
            }
            "c" => {
                let mut args = self.brace_formulas(2)?;
                let (a, b) = (args.remove(0), args.remove(0));
                Ok(ArrowTerm::Sym(a, b))
            }
            "r" => {
                let mut args = self.bracket_terms(1)?;
                Ok(ArrowTerm::Refl(args.remove(0)))
            }
            "t" => {
                let mut args = self.bracket_terms(3)?;
                Ok(ArrowTerm::Trans(args.remove(0), args.remove(0), args.remove(0)))
            }
            "s" => {
                let mut args = self.bracket_terms(2)?;
                Ok(ArrowTerm::Inv(args.remove(0), args.remove(0)))
            }
            "a" => {
                let mut args = self.bracket_terms(4)?;
                Ok(ArrowTerm::Cong(
                    args.remove(0),
                    args.remove(0),
                    args.remove(0),
                    args.remove(0),
                ))
            }
            _ => {
                self.pos -= 1;
                Err(self.error(expected))
            }
        }
    }

    fn direction(&mut self) -> Result<bool, ParseError> {
        match self.peek() {
            Tok::Gt => {
                self.bump();
                Ok(true)
            }
            Tok::Lt => {
                self.bump();
                Ok(false)
            }
            _ => Err(self.error("`>` or `<`")),
        }
    }

    fn brace_formulas(&mut self, count: usize) -> Result<Vec<Formula>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.expect(Tok::Semi, "`;`")?;
            }
            out.push(self.formula()?);
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(out)
    }

    fn bracket_terms(&mut self, count: usize) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.expect(Tok::Semi, "`;`")?;
            }
            out.push(self.term()?);
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(out)
    }

    fn finish<T>(&mut self, value: T) -> Result<T, ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(value)
        } else {
            Err(self.error("end of input"))
        }
    }
}

fn parser(input: &str) -> Result<Parser, ParseError> {
    Ok(Parser {
        toks: lex(input)?,
        pos: 0,
    })
}

pub fn parse_term(input: &str) -> Result<Term, ParseError> {
    let mut p = parser(input)?;
    let t = p.term()?;
    p.finish(t)
}

pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let mut p = parser(input)?;
    let f = p.formula()?;
    p.finish(f)
}

pub fn parse_arrow(input: &str) -> Result<ArrowTerm, ParseError> {
    let mut p = parser(input)?;
    let a = p.arrow()?;
    p.finish(a)
}
