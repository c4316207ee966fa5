//! Words, equations, and equation systems over a group's generators.
//!
//! The concrete syntax is a small DSL:
//!
//! ```text
//! word     ::= factor { '*' factor }
//! factor   ::= atom [ '^' int ]
//! atom     ::= gen | var | '1' | '(' word ')' | '[' word ',' word ']'
//! gen      ::= ('a' | 'b' | 'd') posint | 'c'
//! var      ::= letter { letter | digit }     -- not matching gen, not '1'
//! equation ::= word '=' word | word          -- bare word w means w = 1
//! ```
//!
//! `a1, a2, ...` are the infinite-order generators, `b1, b2, ...` the torsion
//! generators, `c` the distinguished central generator, and `d1, d2, ...` the
//! central torsion generators. `1` denotes the empty word. Any other
//! identifier is an unknown. Whitespace is insignificant.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::presentation::MalcevPresentation;

/// Which family a named generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GenKind {
    /// Infinite-order generator `a<i>`.
    A,
    /// Torsion generator `b<i>`.
    B,
    /// The distinguished central generator `c`.
    C,
    /// Central torsion generator `d<i>`.
    D,
}

impl GenKind {
    fn letter(self) -> char {
        match self {
            GenKind::A => 'a',
            GenKind::B => 'b',
            GenKind::C => 'c',
            GenKind::D => 'd',
        }
    }
}

/// One multiplicand of a word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Factor {
    /// A named generator raised to an integer power. For `C` the index is 0;
    /// for the indexed kinds it is 1-based.
    Gen { kind: GenKind, index: usize, exp: i64 },
    /// An unknown raised to an integer power.
    Var { name: String, exp: i64 },
    /// A commutator `[u, v]` raised to an integer power.
    Commutator { left: Word, right: Word, exp: i64 },
    /// A parenthesized subword raised to an integer power.
    Grouped { inner: Word, exp: i64 },
}

impl Factor {
    /// The factor with its exponent negated.
    pub fn inverse(&self) -> Factor {
        let mut f = self.clone();
        match &mut f {
            Factor::Gen { exp, .. }
            | Factor::Var { exp, .. }
            | Factor::Commutator { exp, .. }
            | Factor::Grouped { exp, .. } => *exp = -*exp,
        }
        f
    }

    pub fn exp(&self) -> i64 {
        match self {
            Factor::Gen { exp, .. }
            | Factor::Var { exp, .. }
            | Factor::Commutator { exp, .. }
            | Factor::Grouped { exp, .. } => *exp,
        }
    }
}

/// A product of factors; the empty product is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Word {
    pub factors: Vec<Factor>,
}

impl Word {
    pub fn new(factors: Vec<Factor>) -> Self {
        Word { factors }
    }

    pub fn identity() -> Self {
        Word { factors: Vec::new() }
    }

    pub fn is_identity_word(&self) -> bool {
        self.factors.is_empty()
    }

    /// The formal inverse: factors reversed, exponents negated.
    pub fn inverse(&self) -> Word {
        Word { factors: self.factors.iter().rev().map(Factor::inverse).collect() }
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Word { factors }
    }

    /// Unknown names in order of first occurrence, including nested ones.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        for f in &self.factors {
            match f {
                Factor::Var { name, .. } => {
                    if !out.iter().any(|v| v == name) {
                        out.push(name.clone());
                    }
                }
                Factor::Commutator { left, right, .. } => {
                    left.collect_variables(out);
                    right.collect_variables(out);
                }
                Factor::Grouped { inner, .. } => inner.collect_variables(out),
                Factor::Gen { .. } => {}
            }
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exp = self.exp();
        match self {
            Factor::Gen { kind, index, .. } => {
                if *kind == GenKind::C {
                    write!(f, "c")?;
                } else {
                    write!(f, "{}{}", kind.letter(), index)?;
                }
            }
            Factor::Var { name, .. } => write!(f, "{name}")?,
            Factor::Commutator { left, right, .. } => write!(f, "[{left},{right}]")?,
            Factor::Grouped { inner, .. } => write!(f, "({inner})")?,
        }
        if exp != 1 {
            write!(f, "^{exp}")?;
        }
        Ok(())
    }
}

/// `lhs = rhs`, interpreted as `lhs * rhs^-1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub lhs: Word,
    pub rhs: Word,
}

impl Equation {
    pub fn new(lhs: Word, rhs: Word) -> Self {
        Equation { lhs, rhs }
    }

    /// The single word whose triviality is equivalent to the equation.
    pub fn normalized_word(&self) -> Word {
        if self.rhs.is_identity_word() {
            self.lhs.clone()
        } else {
            self.lhs.concat(&self.rhs.inverse())
        }
    }

    /// Unknown names from both sides, in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out = self.lhs.variables();
        for v in self.rhs.variables() {
            if !out.iter().any(|w| w == &v) {
                out.push(v);
            }
        }
        out
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A finite conjunction of equations over one shared set of unknowns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquationSystem {
    pub equations: Vec<Equation>,
    /// Declared unknowns; a superset of the unknowns that actually occur.
    pub variables: Vec<String>,
}

impl EquationSystem {
    /// Builds a system, collecting undeclared unknowns by first occurrence.
    pub fn new(equations: Vec<Equation>) -> Self {
        let mut variables = Vec::new();
        for eq in &equations {
            for v in eq.variables() {
                if !variables.iter().any(|w| w == &v) {
                    variables.push(v);
                }
            }
        }
        EquationSystem { equations, variables }
    }
}

/// Position-tagged syntax or schema error for any of the text formats.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{msg} at offset {offset}")]
pub struct ParseError {
    pub msg: String,
    /// Byte offset into the input.
    pub offset: usize,
}

impl ParseError {
    pub fn new(msg: impl Into<String>, offset: usize) -> Self {
        ParseError { msg: msg.into(), offset }
    }
}

const MAX_NESTING: usize = 256;

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    One,
    Eof,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_offset(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    /// Next token. `signed` allows a leading '-' on integers (exponents).
    fn next(&mut self, signed: bool) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let ch = self.src[self.pos];
        let simple = match ch {
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if ch == b'-' && signed {
            self.pos += 1;
            let (tok, _) = self.next(false)?;
            return match tok {
                Tok::Int(n) => Ok((
                    Tok::Int(n.checked_neg().ok_or_else(|| {
                        ParseError::new("integer out of range", start)
                    })?),
                    start,
                )),
                Tok::One => Ok((Tok::Int(-1), start)),
                _ => Err(ParseError::new("expected digits after '-'", start)),
            };
        }
        if ch.is_ascii_digit() {
            let mut end = self.pos;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
            }
            let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
            self.pos = end;
            if text == "1" {
                return Ok((Tok::One, start));
            }
            let n: i64 = text
                .parse()
                .map_err(|_| ParseError::new("integer out of range", start))?;
            return Ok((Tok::Int(n), start));
        }
        if ch.is_ascii_alphabetic() {
            let mut end = self.pos;
            while end < self.src.len()
                && (self.src[end].is_ascii_alphanumeric())
            {
                end += 1;
            }
            let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
            self.pos = end;
            return Ok((Tok::Ident(text), start));
        }
        Err(ParseError::new(
            format!("unexpected character '{}'", ch as char),
            start,
        ))
    }
}

/// Splits an identifier into generator kind and index, if it names one.
///
/// `a<posint>`, `b<posint>`, `d<posint>`, and bare `c` are generator names;
/// everything else is an unknown.
pub fn classify_ident(ident: &str) -> Option<(GenKind, usize)> {
    if ident == "c" {
        return Some((GenKind::C, 0));
    }
    let mut chars = ident.chars();
    let kind = match chars.next()? {
        'a' => GenKind::A,
        'b' => GenKind::B,
        'd' => GenKind::D,
        _ => return None,
    };
    let rest: &str = &ident[1..];
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    let index: usize = rest.parse().ok()?;
    Some((kind, index))
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    pres: &'a MalcevPresentation,
    /// When set, unknowns must come from this list.
    declared: Option<&'a [String]>,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn check_gen(&self, kind: GenKind, index: usize, at: usize) -> Result<(), ParseError> {
        let ok = match kind {
            GenKind::A => index >= 1 && index <= self.pres.num_a(),
            GenKind::B => index >= 1 && index <= self.pres.num_b(),
            GenKind::C => true,
            GenKind::D => index >= 1 && index <= self.pres.num_d(),
        };
        if ok {
            Ok(())
        } else {
            Err(ParseError::new(
                format!("unknown generator {}{}", kind.letter(), index),
                at,
            ))
        }
    }

    fn parse_exponent(&mut self) -> Result<i64, ParseError> {
        // The caller has consumed '^'.
        let (tok, at) = self.lexer.next(true)?;
        match tok {
            Tok::Int(n) => Ok(n),
            Tok::One => Ok(1),
            _ => Err(ParseError::new("expected integer exponent", at)),
        }
    }

    fn parse_atom(&mut self) -> Result<Option<Word>, ParseError> {
        // Returns the atom as a word so '1' can stand for the empty product.
        let (tok, at) = self.lexer.next(false)?;
        let factor = match tok {
            Tok::One => {
                let exp = self.maybe_exponent()?;
                let _ = exp; // 1^e is still the identity
                return Ok(Some(Word::identity()));
            }
            Tok::Ident(name) => {
                if let Some((kind, index)) = classify_ident(&name) {
                    self.check_gen(kind, index, at)?;
                    let exp = self.maybe_exponent()?;
                    Factor::Gen { kind, index, exp }
                } else {
                    if let Some(declared) = self.declared {
                        if !declared.iter().any(|v| v == &name) {
                            return Err(ParseError::new(
                                format!("unknown variable {name}"),
                                at,
                            ));
                        }
                    }
                    let exp = self.maybe_exponent()?;
                    Factor::Var { name, exp }
                }
            }
            Tok::LParen => {
                self.enter(at)?;
                let inner = self.parse_word()?;
                self.expect(Tok::RParen, "expected ')'")?;
                self.depth -= 1;
                let exp = self.maybe_exponent()?;
                Factor::Grouped { inner, exp }
            }
            Tok::LBracket => {
                self.enter(at)?;
                let mut left = self.parse_word()?;
                self.expect(Tok::Comma, "expected ',' in commutator")?;
                let mut right = self.parse_word()?;
                // Extra arguments are left-normed sugar:
                // [u,v,w] parses as [[u,v],w].
                loop {
                    let save = self.lexer.pos;
                    let (tok, tok_at) = self.lexer.next(false)?;
                    match tok {
                        Tok::RBracket => break,
                        Tok::Comma => {
                            let next = self.parse_word()?;
                            left = Word::new(vec![Factor::Commutator {
                                left,
                                right,
                                exp: 1,
                            }]);
                            right = next;
                        }
                        _ => {
                            self.lexer.pos = save;
                            return Err(ParseError::new(
                                "expected ',' or ']' in commutator",
                                tok_at,
                            ));
                        }
                    }
                }
                self.depth -= 1;
                let exp = self.maybe_exponent()?;
                Factor::Commutator { left, right, exp }
            }
            other => {
                return Err(ParseError::new(
                    format!("expected a factor, found {other:?}"),
                    at,
                ))
            }
        };
        Ok(Some(Word::new(vec![factor])))
    }

    fn enter(&mut self, at: usize) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::new("nesting too deep", at));
        }
        Ok(())
    }

    fn maybe_exponent(&mut self) -> Result<i64, ParseError> {
        let save = self.lexer.pos;
        let (tok, _) = self.lexer.next(false)?;
        if tok == Tok::Caret {
            self.parse_exponent()
        } else {
            self.lexer.pos = save;
            Ok(1)
        }
    }

    fn expect(&mut self, want: Tok, msg: &str) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next(false)?;
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::new(msg, at))
        }
    }

    fn parse_word(&mut self) -> Result<Word, ParseError> {
        let mut factors = Vec::new();
        match self.parse_atom()? {
            Some(w) => factors.extend(w.factors),
            None => unreachable!(),
        }
        loop {
            let save = self.lexer.pos;
            let (tok, _) = self.lexer.next(false)?;
            if tok == Tok::Star {
                let w = self.parse_atom()?.expect("atom");
                factors.extend(w.factors);
            } else {
                self.lexer.pos = save;
                break;
            }
        }
        Ok(Word { factors })
    }
}

fn parser_for<'a>(
    text: &'a str,
    pres: &'a MalcevPresentation,
    declared: Option<&'a [String]>,
) -> Parser<'a> {
    Parser { lexer: Lexer::new(text), pres, declared, depth: 0 }
}

/// Parses one word. Generator indices are checked against `pres`.
pub fn parse_word(text: &str, pres: &MalcevPresentation) -> Result<Word, ParseError> {
    parse_word_with(text, pres, None)
}

/// Like [`parse_word`], but restricts unknowns to a declared list.
pub fn parse_word_with(
    text: &str,
    pres: &MalcevPresentation,
    declared: Option<&[String]>,
) -> Result<Word, ParseError> {
    let mut p = parser_for(text, pres, declared);
    let word = p.parse_word()?;
    let at = p.lexer.peek_offset();
    let (tok, _) = p.lexer.next(false)?;
    if tok != Tok::Eof {
        return Err(ParseError::new("trailing input after word", at));
    }
    Ok(word)
}

/// Parses `word = word` or a bare word (meaning `word = 1`).
pub fn parse_equation(text: &str, pres: &MalcevPresentation) -> Result<Equation, ParseError> {
    parse_equation_with(text, pres, None)
}

/// Like [`parse_equation`], but restricts unknowns to a declared list.
pub fn parse_equation_with(
    text: &str,
    pres: &MalcevPresentation,
    declared: Option<&[String]>,
) -> Result<Equation, ParseError> {
    let mut p = parser_for(text, pres, declared);
    let lhs = p.parse_word()?;
    let (tok, at) = p.lexer.next(false)?;
    match tok {
        Tok::Eof => Ok(Equation::new(lhs, Word::identity())),
        Tok::Equals => {
            let rhs = p.parse_word()?;
            let at = p.lexer.peek_offset();
            let (tok, _) = p.lexer.next(false)?;
            if tok != Tok::Eof {
                return Err(ParseError::new("trailing input after equation", at));
            }
            Ok(Equation::new(lhs, rhs))
        }
        _ => Err(ParseError::new("expected '=' or end of input", at)),
    }
}

/// Parses an equation system: one equation per line, `#` comments, blank
/// lines ignored. An optional leading `vars: x y z` line declares the
/// unknowns; with it, undeclared unknowns are errors.
pub fn parse_system(text: &str, pres: &MalcevPresentation) -> Result<EquationSystem, ParseError> {
    let mut declared: Option<Vec<String>> = None;
    let mut equations = Vec::new();
    let mut offset = 0usize;
    for line in text.split('\n') {
        let line_start = offset;
        offset += line.len() + 1;
        let content = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            if declared.is_some() || !equations.is_empty() {
                return Err(ParseError::new(
                    "vars: line must come first and appear once",
                    line_start,
                ));
            }
            let mut names = Vec::new();
            for name in rest.split_whitespace() {
                if classify_ident(name).is_some() || name == "1" {
                    return Err(ParseError::new(
                        format!("'{name}' cannot be a variable name"),
                        line_start,
                    ));
                }
                if !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    || !name.chars().all(|c| c.is_ascii_alphanumeric())
                {
                    return Err(ParseError::new(
                        format!("invalid variable name '{name}'"),
                        line_start,
                    ));
                }
                if names.iter().any(|v| v == name) {
                    return Err(ParseError::new(
                        format!("duplicate variable '{name}'"),
                        line_start,
                    ));
                }
                names.push(name.to_string());
            }
            declared = Some(names);
            continue;
        }
        let eq = parse_equation_with(content, pres, declared.as_deref())
            .map_err(|e| ParseError::new(e.msg, line_start + e.offset))?;
        equations.push(eq);
    }
    let mut system = EquationSystem::new(equations);
    if let Some(names) = declared {
        system.variables = names;
    }
    Ok(system)
}
