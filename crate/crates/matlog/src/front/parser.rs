//! Tokenizer and recursive-descent parser for the clause language.
//!
//! ```text
//! program := (clause)*
//! clause  := atom (":-" atom ("," atom)*)? "."
//! atom    := pred "(" term "," term ")"
//! ```
//!
//! `%` starts a comment running to end of line. Predicates and constants
//! are lowercase-initial identifiers or bare digit strings; variables are
//! uppercase-initial. Parsing also enforces the shape rules that make a
//! clause meaningful at all: atoms take exactly two arguments, facts are
//! ground, and every rule-head variable occurs in the body.

use super::ast::{Atom, Clause, Program, Term, MAX_CONSTANTS};
use super::symbols::{ConstantTable, PredicateTable};
use super::FrontError;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    /// Lowercase-initial identifier or digit string: predicate or constant.
    Ident(String),
    /// Uppercase-initial identifier: variable.
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Turnstile,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Var(s) => format!("variable '{s}'"),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::Turnstile => "':-'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Lexer<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, FrontError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut tokens = Vec::new();
    while let Some(c) = lx.peek() {
        let (tline, tcol) = (lx.line, lx.col);
        match c {
            '%' => {
                while let Some(c) = lx.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                lx.bump();
            }
            '(' => {
                lx.bump();
                tokens.push(Token { kind: TokenKind::LParen, line: tline, col: tcol });
            }
            ')' => {
                lx.bump();
                tokens.push(Token { kind: TokenKind::RParen, line: tline, col: tcol });
            }
            ',' => {
                lx.bump();
                tokens.push(Token { kind: TokenKind::Comma, line: tline, col: tcol });
            }
            '.' => {
                lx.bump();
                tokens.push(Token { kind: TokenKind::Dot, line: tline, col: tcol });
            }
            ':' => {
                lx.bump();
                match lx.peek() {
                    Some('-') => {
                        lx.bump();
                        tokens.push(Token { kind: TokenKind::Turnstile, line: tline, col: tcol });
                    }
                    _ => {
                        return Err(FrontError::Syntax {
                            line: tline,
                            col: tcol,
                            msg: "expected '-' after ':'".into(),
                        })
                    }
                }
            }
            c if c.is_ascii_lowercase() || c.is_ascii_digit() || c.is_ascii_uppercase() => {
                let upper = c.is_ascii_uppercase();
                let mut word = String::new();
                while let Some(c) = lx.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                let kind = if upper { TokenKind::Var(word) } else { TokenKind::Ident(word) };
                tokens.push(Token { kind, line: tline, col: tcol });
            }
            other => {
                return Err(FrontError::Syntax {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(tokens)
}

/// An atom before symbol resolution.
#[derive(Debug, Clone)]
pub(super) struct RawAtom {
    pub predicate: String,
    pub args: Vec<RawTerm>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(super) enum RawTerm {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone)]
pub(super) struct RawClause {
    pub head: RawAtom,
    pub body: Vec<RawAtom>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &TokenKind, what: &str) -> Result<Token, FrontError> {
        match self.next() {
            Some(t) if &t.kind == want => Ok(t),
            Some(t) => Err(FrontError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("expected {what}, found {}", t.kind.describe()),
            }),
            None => Err(FrontError::UnexpectedEof { expected: what.to_string() }),
        }
    }

    fn parse_atom(&mut self) -> Result<RawAtom, FrontError> {
        let (predicate, line, col) = match self.next() {
            Some(Token { kind: TokenKind::Ident(name), line, col }) => (name, line, col),
            Some(t) => {
                return Err(FrontError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected predicate name, found {}", t.kind.describe()),
                })
            }
            None => return Err(FrontError::UnexpectedEof { expected: "predicate name".into() }),
        };
        self.expect(&TokenKind::LParen, "'('")?;
        let mut args = Vec::new();
        loop {
            match self.next() {
                Some(Token { kind: TokenKind::Ident(name), .. }) => args.push(RawTerm::Const(name)),
                Some(Token { kind: TokenKind::Var(name), .. }) => args.push(RawTerm::Var(name)),
                Some(t) => {
                    return Err(FrontError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("expected term, found {}", t.kind.describe()),
                    })
                }
                None => return Err(FrontError::UnexpectedEof { expected: "term".into() }),
            }
            match self.next() {
                Some(Token { kind: TokenKind::Comma, .. }) => continue,
                Some(Token { kind: TokenKind::RParen, .. }) => break,
                Some(t) => {
                    return Err(FrontError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("expected ',' or ')', found {}", t.kind.describe()),
                    })
                }
                None => return Err(FrontError::UnexpectedEof { expected: "',' or ')'".into() }),
            }
        }
        if args.len() != 2 {
            return Err(FrontError::Arity { line, col, predicate, found: args.len() });
        }
        Ok(RawAtom { predicate, args, line, col })
    }

    fn parse_clause(&mut self) -> Result<RawClause, FrontError> {
        let head = self.parse_atom()?;
        let mut body = Vec::new();
        match self.next() {
            Some(Token { kind: TokenKind::Dot, .. }) => {}
            Some(Token { kind: TokenKind::Turnstile, .. }) => loop {
                body.push(self.parse_atom()?);
                match self.next() {
                    Some(Token { kind: TokenKind::Comma, .. }) => continue,
                    Some(Token { kind: TokenKind::Dot, .. }) => break,
                    Some(t) => {
                        return Err(FrontError::Syntax {
                            line: t.line,
                            col: t.col,
                            msg: format!("expected ',' or '.', found {}", t.kind.describe()),
                        })
                    }
                    None => return Err(FrontError::UnexpectedEof { expected: "',' or '.'".into() }),
                }
            },
            Some(t) => {
                return Err(FrontError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected ':-' or '.', found {}", t.kind.describe()),
                })
            }
            None => return Err(FrontError::UnexpectedEof { expected: "':-' or '.'".into() }),
        }
        Ok(RawClause { head, body })
    }
}

pub(super) fn parse_raw(text: &str) -> Result<Vec<RawClause>, FrontError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut clauses = Vec::new();
    while parser.peek().is_some() {
        clauses.push(parser.parse_clause()?);
    }
    Ok(clauses)
}

/// Parses a full program text into a [`Program`] with populated symbol
/// tables. Constants are indexed lexicographically over the whole text, so
/// reordering clauses does not change any constant's index.
pub fn parse_program(text: &str) -> Result<Program, FrontError> {
    let raw = parse_raw(text)?;
    resolve(raw)
}

pub(super) fn resolve(raw: Vec<RawClause>) -> Result<Program, FrontError> {
    // Shape checks first, while source positions are at hand.
    for clause in &raw {
        if clause.body.is_empty() {
            for arg in &clause.head.args {
                if let RawTerm::Var(v) = arg {
                    return Err(FrontError::NonGroundFact {
                        line: clause.head.line,
                        col: clause.head.col,
                        variable: v.clone(),
                    });
                }
            }
        } else {
            let body_vars: BTreeSet<&str> = clause
                .body
                .iter()
                .flat_map(|a| a.args.iter())
                .filter_map(|t| match t {
                    RawTerm::Var(v) => Some(v.as_str()),
                    RawTerm::Const(_) => None,
                })
                .collect();
            for arg in &clause.head.args {
                if let RawTerm::Var(v) = arg {
                    if !body_vars.contains(v.as_str()) {
                        return Err(FrontError::HeadVarNotInBody {
                            line: clause.head.line,
                            col: clause.head.col,
                            variable: v.clone(),
                        });
                    }
                }
            }
        }
    }

    let constant_names = raw.iter().flat_map(|c| {
        std::iter::once(&c.head).chain(c.body.iter()).flat_map(|a| {
            a.args.iter().filter_map(|t| match t {
                RawTerm::Const(name) => Some(name.clone()),
                RawTerm::Var(_) => None,
            })
        })
    });
    let constants = ConstantTable::from_names(constant_names);
    if constants.len() > MAX_CONSTANTS {
        return Err(FrontError::ConstantLimit { limit: MAX_CONSTANTS, requested: constants.len() });
    }

    let mut predicates = PredicateTable::new();
    let mut clauses = Vec::with_capacity(raw.len());
    for clause in &raw {
        let head = resolve_atom(&clause.head, &mut predicates, &constants);
        let body = clause.body.iter().map(|a| resolve_atom(a, &mut predicates, &constants)).collect();
        clauses.push(Clause { head, body });
    }

    let mut program = Program { clauses, predicates, constants };
    program.recompute_kinds();
    Ok(program)
}

fn resolve_atom(raw: &RawAtom, predicates: &mut PredicateTable, constants: &ConstantTable) -> Atom {
    let predicate = predicates.register(&raw.predicate);
    let mut args = raw.args.iter().map(|t| match t {
        RawTerm::Var(v) => Term::Var(v.clone()),
        RawTerm::Const(name) => {
            Term::Const(constants.lookup(name).expect("constant collected before resolve"))
        }
    });
    let a0 = args.next().expect("arity checked");
    let a1 = args.next().expect("arity checked");
    Atom { predicate, args: [a0, a1] }
}
