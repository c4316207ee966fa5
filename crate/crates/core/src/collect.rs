//! Normal forms by collection: a term-rewriting oracle independent of the
//! coordinate multiplication law.
//!
//! A word is a string of generator letters and their inverses. The oracle
//! sorts the non-central letters into normal-form order by repeated adjacent
//! transposition, applying `x * y = y * x * [x, y]` and pushing the emitted
//! commutator values (which are central) to the right end. Torsion powers
//! are reduced by the declared power relations. No part of [`crate::malcev`]
//! is consulted, so agreement between the two is evidence that the
//! coordinate law matches the group relations.

use thiserror::Error;

use crate::malcev::MalcevCoord;
use crate::presentation::{CentralValue, Gen, MalcevPresentation};
use crate::word::{classify_ident, GenKind, ParseError};

/// One letter of a flat word: a generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    pub kind: GenKind,
    /// 1-based for `a`/`b`/`d`; 0 for `c`.
    pub index: usize,
    /// `+1` or `-1`.
    pub sign: i64,
}

impl Letter {
    pub fn new(kind: GenKind, index: usize, sign: i64) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Letter { kind, index, sign }
    }

    fn order_key(&self) -> (u8, usize) {
        let kind_rank = match self.kind {
            GenKind::A => 0,
            GenKind::B => 1,
            GenKind::C => 2,
            GenKind::D => 3,
        };
        (kind_rank, self.index)
    }

    fn gen(&self) -> Gen {
        match self.kind {
            GenKind::A => Gen::A(self.index),
            GenKind::B => Gen::B(self.index),
            _ => unreachable!("central letters have no Gen"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CollectError {
    #[error("rewriting exceeded the step budget of {0}")]
    StepBudget(u64),
    #[error("letter out of range: {0}{1}")]
    LetterOutOfRange(char, usize),
}

/// Parses a compact letter string such as `"ba"` or `"a1B2c"`: letters with
/// optional indices, uppercase for inverses, no separators. In presentations
/// without torsion generators, bare `a` and `b` abbreviate `a1` and `a2`;
/// with torsion generators, `b` means `b1`.
pub fn parse_letters(text: &str, p: &MalcevPresentation) -> Result<Vec<Letter>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let lower = ch.to_ascii_lowercase();
        let sign = if ch.is_ascii_uppercase() { -1 } else { 1 };
        if !"abcd".contains(lower) {
            return Err(ParseError::new(format!("unexpected letter '{ch}'"), i));
        }
        let mut j = i + 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        let letter = if j > i + 1 {
            let name = format!("{}{}", lower, &text[i + 1..j]);
            match classify_ident(&name) {
                Some((kind, index)) => Letter::new(kind, index, sign),
                None => return Err(ParseError::new(format!("bad letter '{name}'"), i)),
            }
        } else {
            match lower {
                'c' => Letter::new(GenKind::C, 0, sign),
                'a' => Letter::new(GenKind::A, 1, sign),
                // Bare 'b' means the second infinite generator when there is
                // no torsion, and b1 otherwise.
                'b' => {
                    if p.num_b() == 0 {
                        Letter::new(GenKind::A, 2, sign)
                    } else {
                        Letter::new(GenKind::B, 1, sign)
                    }
                }
                'd' => Letter::new(GenKind::D, 1, sign),
                _ => unreachable!(),
            }
        };
        out.push(letter);
        i = j;
    }
    for letter in &out {
        let ok = match letter.kind {
            GenKind::A => letter.index >= 1 && letter.index <= p.num_a(),
            GenKind::B => letter.index >= 1 && letter.index <= p.num_b(),
            GenKind::C => true,
            GenKind::D => letter.index >= 1 && letter.index <= p.num_d(),
        };
        if !ok {
            return Err(ParseError::new(
                format!("letter out of range: {}{}", letter.kind_char(), letter.index),
                0,
            ));
        }
    }
    Ok(out)
}

impl Letter {
    fn kind_char(&self) -> char {
        match self.kind {
            GenKind::A => 'a',
            GenKind::B => 'b',
            GenKind::C => 'c',
            GenKind::D => 'd',
        }
    }
}

struct Collector<'a> {
    p: &'a MalcevPresentation,
    /// Sorted non-central letters, all with sign +1 for b-letters.
    body: Vec<Letter>,
    c_sum: i64,
    d_sums: Vec<i64>,
    steps: u64,
    budget: u64,
}

impl<'a> Collector<'a> {
    fn new(p: &'a MalcevPresentation, budget: u64) -> Self {
        Collector { p, body: Vec::new(), c_sum: 0, d_sums: vec![0; p.num_d()], steps: 0, budget }
    }

    fn step(&mut self) -> Result<(), CollectError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(CollectError::StepBudget(self.budget))
        } else {
            Ok(())
        }
    }

    fn emit(&mut self, v: &CentralValue, mult: i64) {
        self.c_sum += v.c_exp * mult;
        for (t, &e) in v.d_exps.iter().enumerate() {
            self.d_sums[t] += e * mult;
        }
    }

    /// Inserts one a- or b-letter at the right end and bubbles it left past
    /// every strictly larger letter, emitting `[left, new]` per swap.
    fn insert(&mut self, letter: Letter) -> Result<(), CollectError> {
        let mut pos = self.body.len();
        loop {
            self.step()?;
            if pos == 0 {
                break;
            }
            let left = self.body[pos - 1];
            if left.order_key() > letter.order_key() {
                // left * letter = letter * left * [left, letter]; the
                // commutator is central and joins the central accumulator.
                let v = self.p.commutator_value(left.gen(), letter.gen());
                self.emit(&v, left.sign * letter.sign);
                pos -= 1;
            } else if left.order_key() == letter.order_key() && left.sign == -letter.sign {
                // Adjacent inverse pair cancels.
                self.body.remove(pos - 1);
                return Ok(());
            } else {
                break;
            }
        }
        self.body.insert(pos, letter);
        // A full torsion run collapses via the power relation.
        if letter.kind == GenKind::B {
            let order = self.p.torsion_orders()[letter.index - 1] as usize;
            let run_start = self
                .body
                .iter()
                .position(|l| l.order_key() == letter.order_key())
                .unwrap();
            let run_len = self.body[run_start..]
                .iter()
                .take_while(|l| l.order_key() == letter.order_key())
                .count();
            if run_len >= order {
                self.step()?;
                self.body.drain(run_start..run_start + order);
                let v = self.p.power_value(letter.index).clone();
                self.emit(&v, 1);
            }
        }
        Ok(())
    }

    fn push(&mut self, letter: Letter) -> Result<(), CollectError> {
        match letter.kind {
            GenKind::C => {
                self.step()?;
                self.c_sum += letter.sign;
            }
            GenKind::D => {
                self.step()?;
                self.d_sums[letter.index - 1] += letter.sign;
            }
            GenKind::A => self.insert(letter)?,
            GenKind::B => {
                if letter.sign == 1 {
                    self.insert(letter)?;
                } else {
                    // b^-1 = b^(l-1) * (b^l)^-1.
                    self.step()?;
                    let order = self.p.torsion_orders()[letter.index - 1];
                    let v = self.p.power_value(letter.index).clone();
                    self.emit(&v, -1);
                    for _ in 0..(order - 1) {
                        self.insert(Letter::new(GenKind::B, letter.index, 1))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> MalcevCoord {
        let mut a = vec![0i64; self.p.num_a()];
        let mut b = vec![0u64; self.p.num_b()];
        for letter in &self.body {
            match letter.kind {
                GenKind::A => a[letter.index - 1] += letter.sign,
                GenKind::B => b[letter.index - 1] += 1,
                _ => unreachable!(),
            }
        }
        let d = self
            .d_sums
            .iter()
            .zip(self.p.central_orders())
            .map(|(&x, &m)| x.rem_euclid(m as i64) as u64)
            .collect();
        MalcevCoord { a, b, c: self.c_sum, d }
    }
}

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Collects a flat letter word into normal-form coordinates.
pub fn collection_oracle_nf(
    p: &MalcevPresentation,
    letters: &[Letter],
    step_budget: u64,
) -> Result<MalcevCoord, CollectError> {
    let mut collector = Collector::new(p, step_budget);
    for &letter in letters {
        collector.push(letter)?;
    }
    Ok(collector.finish())
}

/// Convenience wrapper: parse a compact letter string and collect it.
pub fn collect_str(p: &MalcevPresentation, text: &str) -> MalcevCoord {
    let letters = parse_letters(text, p).expect("valid letter string");
    collection_oracle_nf(p, &letters, DEFAULT_STEP_BUDGET).expect("budget")
}
