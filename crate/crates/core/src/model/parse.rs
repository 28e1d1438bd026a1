//! Text formats for dependencies, schemas and instances.
//!
//! Dependencies: `P(i,n,e,c), HN(i,d) -> EthDis(e,d).` One statement per
//! `.`; `#` starts a comment running to the end of the line. Schemas:
//! one `Name/arity` per line. Instances: one fact per `.`, where `*` is the
//! critical constant, `_label` a labeled null and a bare identifier a constant.

use std::collections::HashMap;

use super::{Atom, Instance, Schema, Symbol, Term, Tgd, TgdId};
use crate::error::Error;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Null(String),
    Number(usize),
    LParen,
    RParen,
    Comma,
    Arrow,
    Dot,
    Star,
    Slash,
    Newline,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, Error> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: l0, col: c0 });
        match c {
            '\n' => {
                push(&mut out, Tok::Newline);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '.' => push(&mut out, Tok::Dot),
            '*' => push(&mut out, Tok::Star),
            '/' => push(&mut out, Tok::Slash),
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push(&mut out, Tok::Arrow);
                    i += 2;
                    col += 2;
                    continue;
                }
                return Err(err(l0, c0, "expected '->'"));
            }
            c if c.is_ascii_alphabetic() || c == '_' || c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c == '_' {
                    if word.len() == 1 {
                        return Err(err(l0, c0, "empty null label"));
                    }
                    Tok::Null(word[1..].to_string())
                } else if c.is_ascii_digit() {
                    let n = word
                        .parse()
                        .map_err(|_| err(l0, c0, format!("invalid number '{word}'")))?;
                    Tok::Number(n)
                } else {
                    Tok::Ident(word)
                };
                push(&mut out, tok);
                continue;
            }
            other => return Err(err(l0, c0, format!("unexpected character '{other}'"))),
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str, keep_newlines: bool) -> Result<Self, Error> {
        let mut toks = lex(text)?;
        if !keep_newlines {
            toks.retain(|t| t.tok != Tok::Newline);
        }
        let lines = text.split('\n').count();
        let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser {
            toks,
            pos: 0,
            end: (lines, last_col),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.col))
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), Error> {
        let (line, col) = self.here();
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            Some(t) => Err(err(line, col, format!("expected {what}, found {}", describe(&t.tok)))),
            None => Err(err(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), Error> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), .. }) => Ok((s, line, col)),
            Some(t) => Err(err(line, col, format!("expected {what}, found {}", describe(&t.tok)))),
            None => Err(err(line, col, format!("expected {what}, found end of input"))),
        }
    }

    /// `Name(t1, ..., tk)` where each term is read by `term`.
    fn atom(&mut self, term: &mut dyn FnMut(Spanned) -> Result<Term, Error>) -> Result<(Atom, usize, usize), Error> {
        let (name, line, col) = self.ident("relation name")?;
        self.expect(Tok::LParen, "'('")?;
        let mut terms = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.next();
        } else {
            loop {
                let (l, c) = self.here();
                let t = self
                    .next()
                    .ok_or_else(|| err(l, c, "expected term, found end of input"))?;
                terms.push(term(t)?);
                let (l, c) = self.here();
                match self.next().map(|t| t.tok) {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    Some(t) => return Err(err(l, c, format!("expected ',' or ')', found {}", describe(&t)))),
                    None => return Err(err(l, c, "expected ')', found end of input")),
                }
            }
        }
        Ok((Atom::new(name.as_str(), terms), line, col))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Null(s) => format!("'_{s}'"),
        Tok::Number(n) => format!("'{n}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Arrow => "'->'".into(),
        Tok::Dot => "'.'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Newline => "end of line".into(),
    }
}

fn var_term(t: Spanned) -> Result<Term, Error> {
    match t.tok {
        Tok::Ident(s) => Ok(Term::var(&s)),
        other => Err(err(
            t.line,
            t.col,
            format!("expected variable, found {}", describe(&other)),
        )),
    }
}

type Located = (Atom, usize, usize);

fn conjunction(p: &mut Parser) -> Result<Vec<Located>, Error> {
    let mut atoms = vec![p.atom(&mut var_term)?];
    while p.peek() == Some(&Tok::Comma) {
        p.next();
        atoms.push(p.atom(&mut var_term)?);
    }
    Ok(atoms)
}

fn check_against(
    atoms: &[Located],
    schema: Option<&Schema>,
    inferred: &mut HashMap<Symbol, usize>,
) -> Result<(), Error> {
    for (a, line, col) in atoms {
        match schema {
            Some(s) => s.check_atom(a).map_err(|e| err(*line, *col, e.to_string()))?,
            None => {
                let k = *inferred.entry(a.relation.clone()).or_insert(a.arity());
                if k != a.arity() {
                    return Err(err(
                        *line,
                        *col,
                        format!("relation {} used with arity {} and {}", a.relation, k, a.arity()),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn strip(atoms: Vec<Located>) -> Vec<Atom> {
    atoms.into_iter().map(|(a, _, _)| a).collect()
}

/// Parses tgds, checking body atoms against `source` and head atoms against
/// `target`. Without a target schema, head arities only need to agree with
/// each other. Ids are assigned in file order starting at 0.
pub fn parse_dependencies(text: &str, source: Option<&Schema>, target: Option<&Schema>) -> Result<Vec<Tgd>, Error> {
    let mut p = Parser::new(text, false)?;
    let mut out = Vec::new();
    let (mut src_seen, mut tgt_seen) = (HashMap::new(), HashMap::new());
    while p.peek().is_some() {
        let (line, col) = p.here();
        let body = conjunction(&mut p)?;
        p.expect(Tok::Arrow, "'->'")?;
        let head = conjunction(&mut p)?;
        p.expect(Tok::Dot, "'.'")?;
        check_against(&body, source, &mut src_seen)?;
        check_against(&head, target, &mut tgt_seen)?;
        let tgd =
            Tgd::new(TgdId(out.len() as u32), strip(body), strip(head)).map_err(|e| err(line, col, e.to_string()))?;
        out.push(tgd);
    }
    Ok(out)
}

/// Parses a single tgd without schema checks; the trailing `.` is optional.
pub fn parse_tgd(text: &str) -> Result<Tgd, Error> {
    let trimmed = text.trim();
    let owned;
    let text = if trimmed.ends_with('.') {
        trimmed
    } else {
        owned = format!("{trimmed}.");
        &owned
    };
    let mut tgds = parse_dependencies(text, None, None)?;
    match tgds.len() {
        1 => Ok(tgds.remove(0)),
        n => Err(err(1, 1, format!("expected one dependency, found {n}"))),
    }
}

/// One tgd per line, each terminated by `.`.
pub fn serialize_dependencies(tgds: &[Tgd]) -> String {
    tgds.iter().map(|t| format!("{t}.\n")).collect()
}

/// Parses `Name/arity` lines.
pub fn parse_schema(text: &str) -> Result<Schema, Error> {
    let mut p = Parser::new(text, true)?;
    let mut schema = Schema::new();
    loop {
        while p.peek() == Some(&Tok::Newline) {
            p.next();
        }
        if p.peek().is_none() {
            break;
        }
        let (name, line, col) = p.ident("relation name")?;
        p.expect(Tok::Slash, "'/'")?;
        let (l, c) = p.here();
        let arity = match p.next().map(|t| t.tok) {
            Some(Tok::Number(n)) => n,
            _ => return Err(err(l, c, "expected arity")),
        };
        schema
            .add(Symbol::new(&name), arity)
            .map_err(|e| err(line, col, e.to_string()))?;
        let (l, c) = p.here();
        match p.next().map(|t| t.tok) {
            None | Some(Tok::Newline) => {}
            Some(t) => return Err(err(l, c, format!("expected end of line, found {}", describe(&t)))),
        }
    }
    Ok(schema)
}

/// Parses facts such as `R1(*, _a, c).`. Each distinct null label gets a
/// fresh id, numbered from 1 in order of first appearance.
pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let mut p = Parser::new(text, false)?;
    let mut labels: HashMap<String, u32> = HashMap::new();
    let mut inst = Instance::new();
    let mut term = |t: Spanned| -> Result<Term, Error> {
        match t.tok {
            Tok::Star => Ok(Term::Critical),
            Tok::Ident(s) => Ok(Term::constant(&s)),
            Tok::Null(l) => {
                let next = labels.len() as u32 + 1;
                Ok(Term::Null(*labels.entry(l).or_insert(next)))
            }
            other => Err(err(t.line, t.col, format!("expected term, found {}", describe(&other)))),
        }
    };
    while p.peek().is_some() {
        let (a, _, _) = p.atom(&mut term)?;
        p.expect(Tok::Dot, "'.'")?;
        inst.insert(a);
    }
    Ok(inst)
}
