//! Formula ASTs, the concrete-syntax parser, fragment classification and the
//! size measure.
//!
//! The core constructors are atoms, turn atoms, negation, disjunction, next,
//! until and the knowledge modality. Everything else (`&`, `->`, `F`, `G`,
//! `true`/`false` sugar) is eliminated at parse time:
//! `F p` becomes `true U p` and `G p` becomes `!(true U !p)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::kripke::{Agent, Atom};
use crate::symbols::Symbols;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(Atom),
    TurnIs(Agent),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Know(Agent, Box<Formula>),
}

/// Syntactic fragments, ordered from smallest to largest.
///
/// `LtlkNoXNoKTemporal` is the fragment with no next operator and no
/// temporal operator inside a knowledge modality; it is the one the
/// announcement solver accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fragment {
    Prop,
    El,
    LtlkNoXNoKTemporal,
    Ltlk,
}

impl Formula {
    pub fn atom(p: Atom) -> Formula {
        Formula::Atom(p)
    }

    pub fn turn_is(a: Agent) -> Formula {
        Formula::TurnIs(a)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(l), Formula::not(r)))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::or(Formula::not(l), r)
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        Formula::Until(Box::new(l), Box::new(r))
    }

    pub fn know(a: Agent, f: Formula) -> Formula {
        Formula::Know(a, Box::new(f))
    }

    pub fn ff() -> Formula {
        Formula::not(Formula::True)
    }

    /// `F f`, desugared.
    pub fn finally(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    /// `G f`, desugared.
    pub fn globally(f: Formula) -> Formula {
        Formula::not(Formula::until(Formula::True, Formula::not(f)))
    }

    /// Number of AST nodes of the desugared formula.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) | Formula::TurnIs(_) => 1,
            Formula::Not(f) | Formula::Next(f) | Formula::Know(_, f) => 1 + f.size(),
            Formula::Or(l, r) | Formula::Until(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// The least fragment containing the formula.
    pub fn classify(&self) -> Fragment {
        let f = Flags::of(self);
        if !f.know && !f.next && !f.until {
            Fragment::Prop
        } else if !f.next && !f.until {
            Fragment::El
        } else if !f.next && !f.temporal_under_know {
            Fragment::LtlkNoXNoKTemporal
        } else {
            Fragment::Ltlk
        }
    }

    pub fn is_el(&self) -> bool {
        self.classify() <= Fragment::El
    }

    pub fn is_prop(&self) -> bool {
        self.classify() == Fragment::Prop
    }

    /// All subformulas including `self`, in preorder.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(f) = stack.pop() {
            out.push(f);
            match f {
                Formula::True | Formula::Atom(_) | Formula::TurnIs(_) => {}
                Formula::Not(g) | Formula::Next(g) | Formula::Know(_, g) => stack.push(g),
                Formula::Or(l, r) | Formula::Until(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Concrete syntax, re-sugaring `F`, `G` and `false` for readability.
    pub fn render(&self, sym: &Symbols) -> String {
        let mut s = String::new();
        render_prec(self, sym, 0, &mut s);
        s
    }
}

#[derive(Default)]
struct Flags {
    know: bool,
    next: bool,
    until: bool,
    temporal_under_know: bool,
}

impl Flags {
    fn of(f: &Formula) -> Flags {
        let mut fl = Flags::default();
        fl.scan(f, false);
        fl
    }

    fn scan(&mut self, f: &Formula, under_know: bool) {
        match f {
            Formula::True | Formula::Atom(_) | Formula::TurnIs(_) => {}
            Formula::Not(g) => self.scan(g, under_know),
            Formula::Or(l, r) => {
                self.scan(l, under_know);
                self.scan(r, under_know);
            }
            Formula::Next(g) => {
                self.next = true;
                if under_know {
                    self.temporal_under_know = true;
                }
                self.scan(g, under_know);
            }
            Formula::Until(l, r) => {
                self.until = true;
                if under_know {
                    self.temporal_under_know = true;
                }
                self.scan(l, under_know);
                self.scan(r, under_know);
            }
            Formula::Know(_, g) => {
                self.know = true;
                self.scan(g, true);
            }
        }
    }
}

// Precedence levels used by the printer: `|` is 1, `U` is 3, unary operators
// are 4, atoms are 5. `&` and `->` do not exist after desugaring.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::True | Formula::Atom(_) | Formula::TurnIs(_) => 5,
        Formula::Not(g) => {
            if **g == Formula::True {
                5 // printed "false"
            } else {
                4
            }
        }
        Formula::Next(_) | Formula::Know(_, _) => 4,
        Formula::Or(_, _) => 1,
        Formula::Until(l, _) => {
            if **l == Formula::True {
                4 // printed "F .."
            } else {
                3
            }
        }
    }
}

fn render_prec(f: &Formula, sym: &Symbols, min: u8, out: &mut String) {
    let p = prec(f);
    let parens = p < min;
    if parens {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::Atom(a) => out.push_str(sym.atom_name(*a)),
        Formula::TurnIs(a) => {
            out.push_str("turn=");
            out.push_str(sym.agent_name(*a));
        }
        Formula::Not(g) => match &**g {
            Formula::True => out.push_str("false"),
            Formula::Until(l, r) if **l == Formula::True => {
                if let Formula::Not(body) = &**r {
                    out.push_str("G ");
                    render_prec(body, sym, 4, out);
                } else {
                    out.push('!');
                    render_prec(g, sym, 4, out);
                }
            }
            _ => {
                out.push('!');
                render_prec(g, sym, 4, out);
            }
        },
        Formula::Or(l, r) => {
            render_prec(l, sym, 1, out);
            out.push_str(" | ");
            render_prec(r, sym, 2, out);
        }
        Formula::Next(g) => {
            out.push_str("X ");
            render_prec(g, sym, 4, out);
        }
        Formula::Until(l, r) => {
            if **l == Formula::True {
                out.push_str("F ");
                render_prec(r, sym, 4, out);
            } else {
                render_prec(l, sym, 4, out);
                out.push_str(" U ");
                render_prec(r, sym, 3, out);
            }
        }
        Formula::Know(a, g) => {
            out.push_str("K[");
            out.push_str(sym.agent_name(*a));
            out.push_str("] ");
            render_prec(g, sym, 4, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Parse error with source position (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eq,
    KwK,
    KwX,
    KwU,
    KwF,
    KwG,
    KwTrue,
    KwFalse,
    KwTurn,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => String::from("`(`"),
            Tok::RParen => String::from("`)`"),
            Tok::LBracket => String::from("`[`"),
            Tok::RBracket => String::from("`]`"),
            Tok::Bang => String::from("`!`"),
            Tok::Amp => String::from("`&`"),
            Tok::Pipe => String::from("`|`"),
            Tok::Arrow => String::from("`->`"),
            Tok::Eq => String::from("`=`"),
            Tok::KwK => String::from("`K`"),
            Tok::KwX => String::from("`X`"),
            Tok::KwU => String::from("`U`"),
            Tok::KwF => String::from("`F`"),
            Tok::KwG => String::from("`G`"),
            Tok::KwTrue => String::from("`true`"),
            Tok::KwFalse => String::from("`false`"),
            Tok::KwTurn => String::from("`turn`"),
        }
    }
}

fn lex(src: &str, line_offset: u32) -> Result<Vec<(Tok, u32, u32)>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1 + line_offset;
    let mut col = 1u32;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' | ')' | '[' | ']' | '!' | '&' | '|' | '=' => {
                chars.next();
                col += 1;
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    _ => Tok::Eq,
                };
                toks.push((t, tl, tc));
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    toks.push((Tok::Arrow, tl, tc));
                } else {
                    return Err(ParseError {
                        line: tl,
                        col: tc,
                        message: String::from("expected `->`"),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let t = match ident.as_str() {
                    "K" => Tok::KwK,
                    "X" => Tok::KwX,
                    "U" => Tok::KwU,
                    "F" => Tok::KwF,
                    "G" => Tok::KwG,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "turn" => Tok::KwTurn,
                    _ => Tok::Ident(ident),
                };
                toks.push((t, tl, tc));
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, u32, u32)>,
    pos: usize,
    sym: &'a mut Symbols,
    end: (u32, u32),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: String) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message: msg }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(got) if *got == t => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected {}, found {}", t.describe(), got.describe()))),
            None => Err(self.err(format!("expected {}, found end of input", t.describe()))),
        }
    }

    fn agent(&mut self) -> Result<Agent, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => match self.sym.agent(&name) {
                Some(a) => {
                    self.pos += 1;
                    Ok(a)
                }
                None => Err(self.err(format!("unknown agent `{name}`"))),
            },
            Some(t) => Err(self.err(format!("expected agent name, found {}", t.describe()))),
            None => Err(self.err(String::from("expected agent name, found end of input"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::KwU) {
            self.pos += 1;
            let rhs = self.until()?; // right-associative
            Ok(Formula::until(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::KwX) => {
                self.pos += 1;
                Ok(Formula::next(self.unary()?))
            }
            Some(Tok::KwF) => {
                self.pos += 1;
                Ok(Formula::finally(self.unary()?))
            }
            Some(Tok::KwG) => {
                self.pos += 1;
                Ok(Formula::globally(self.unary()?))
            }
            Some(Tok::KwK) => {
                self.pos += 1;
                self.expect(Tok::LBracket)?;
                let a = self.agent()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::know(a, self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some(Tok::LParen) => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::KwTrue) => Ok(Formula::True),
            Some(Tok::KwFalse) => Ok(Formula::ff()),
            Some(Tok::KwTurn) => {
                self.expect(Tok::Eq)?;
                let a = self.agent()?;
                Ok(Formula::TurnIs(a))
            }
            Some(Tok::Ident(name)) => Ok(Formula::Atom(self.sym.intern_atom(&name))),
            Some(t) => {
                self.pos -= 1;
                Err(self.err(format!("expected a formula, found {}", t.describe())))
            }
            None => Err(self.err(String::from("expected a formula, found end of input"))),
        }
    }
}

/// Parses `text` against the declared agents in `sym`, interning new atoms.
pub fn parse_formula(text: &str, sym: &mut Symbols) -> Result<Formula, ParseError> {
    parse_formula_at(text, sym, 0)
}

/// Like [`parse_formula`] but reporting lines starting at `line_offset + 1`,
/// for formulas embedded in larger files.
pub fn parse_formula_at(
    text: &str,
    sym: &mut Symbols,
    line_offset: u32,
) -> Result<Formula, ParseError> {
    let toks = lex(text, line_offset)?;
    let end = toks
        .last()
        .map(|&(_, l, c)| (l, c + 1))
        .unwrap_or((1 + line_offset, 1));
    let mut p = Parser { toks, pos: 0, sym, end };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(p.err(format!("unexpected {} after formula", t.describe())));
    }
    Ok(f)
}
