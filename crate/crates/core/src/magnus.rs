//! Exact arithmetic in free nilpotent groups via the truncated free
//! associative ring.
//!
//! The rank-q free group embeds into the ring of noncommutative polynomials
//! over X_1..X_q truncated at degree p by sending generator i to 1 + X_i;
//! two words are equal in the free p-step nilpotent group iff their images
//! agree. Commutator factors expand as u v u^-1 v^-1; in two-step groups
//! this agrees with the u^-1 v^-1 u v convention used by the coordinate
//! arithmetic, and at higher step it is the convention under which the
//! nested-commutator linearity laws hold verbatim.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::word::{Factor, GenKind, Word};

/// Parameters of a free nilpotent group N(p, q): nilpotency step `p` and
/// rank `q`, both at least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FreeNilpotentSpec {
    pub step: usize,
    pub rank: usize,
}

impl FreeNilpotentSpec {
    pub fn new(step: usize, rank: usize) -> Self {
        assert!(step >= 2, "step must be at least 2");
        assert!(rank >= 2, "rank must be at least 2");
        FreeNilpotentSpec { step, rank }
    }
}

/// Noncommutative polynomial over X_0..X_{rank-1} with monomials truncated
/// at length `cap`. Group elements have constant term 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedFreePoly {
    rank: usize,
    cap: usize,
    /// Monomial (sequence of letter indices) -> coefficient; no zeros.
    terms: BTreeMap<Vec<u8>, BigInt>,
}

impl TruncatedFreePoly {
    fn zero(rank: usize, cap: usize) -> Self {
        TruncatedFreePoly { rank, cap, terms: BTreeMap::new() }
    }

    pub fn one(spec: &FreeNilpotentSpec) -> Self {
        let mut p = Self::zero(spec.rank, spec.step);
        p.add_assign_term(Vec::new(), BigInt::one());
        p
    }

    /// The image 1 + X_index of free generator `index` (0-based).
    pub fn generator(spec: &FreeNilpotentSpec, index: usize) -> Self {
        assert!(index < spec.rank, "generator index out of range");
        let mut p = Self::one(spec);
        p.add_assign_term(vec![index as u8], BigInt::one());
        p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Vec::new()).is_some_and(|c| c.is_one())
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeff(&self, monomial: &[u8]) -> BigInt {
        self.terms.get(monomial).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &BigInt)> {
        self.terms.iter()
    }

    fn add_assign_term(&mut self, mono: Vec<u8>, delta: BigInt) {
        if delta.is_zero() || mono.len() > self.cap {
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(BigInt::zero);
        *entry += delta;
        if entry.is_zero() {
            // Re-borrow to drop the now-zero coefficient.
            let key: Vec<u8> = self
                .terms
                .iter()
                .find(|(_, c)| c.is_zero())
                .map(|(m, _)| m.clone())
                .expect("zero coefficient present");
            self.terms.remove(&key);
        }
    }

    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rank, self.cap), (other.rank, other.cap));
        let mut out = self.clone();
        for (mono, coeff) in &other.terms {
            out.add_assign_term(mono.clone(), coeff.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        TruncatedFreePoly {
            rank: self.rank,
            cap: self.cap,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rank, self.cap), (other.rank, other.cap));
        let mut out = Self::zero(self.rank, self.cap);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.len() + m2.len() <= self.cap {
                    let mut mono = m1.clone();
                    mono.extend_from_slice(m2);
                    out.add_assign_term(mono, c1 * c2);
                }
            }
        }
        out
    }

    /// Inverse of a unit with constant term 1, via the truncated geometric
    /// series: v = 1 - u*v iterated to the degree cap.
    pub fn inverse(&self) -> Self {
        assert!(self.constant_term().is_one(), "inverse needs constant term 1");
        let mut one = Self::zero(self.rank, self.cap);
        one.add_assign_term(Vec::new(), BigInt::one());
        let mut u = self.clone();
        u.add_assign_term(Vec::new(), BigInt::from(-1));
        let mut inv = one.clone();
        for _ in 0..self.cap {
            inv = one.add(&u.mul(&inv).neg());
        }
        debug_assert!(self.mul(&inv).is_one());
        inv
    }

    pub fn pow(&self, e: i64) -> Self {
        let (mut base, mut e) = if e < 0 {
            (self.inverse(), e.unsigned_abs())
        } else {
            (self.clone(), e as u64)
        };
        let mut acc = Self::zero(self.rank, self.cap);
        acc.add_assign_term(Vec::new(), BigInt::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// u v u^-1 v^-1.
    pub fn commutator(u: &Self, v: &Self) -> Self {
        u.mul(v).mul(&u.inverse()).mul(&v.inverse())
    }

    /// Left-normed nested commutator [args[0], args[1], ..., args[k-1]].
    pub fn nested_commutator(args: &[Self]) -> Self {
        assert!(args.len() >= 2, "nested commutator needs at least two arguments");
        let mut acc = Self::commutator(&args[0], &args[1]);
        for next in &args[2..] {
            acc = Self::commutator(&acc, next);
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MagnusError {
    #[error("variable {0} has no assigned value")]
    UnassignedVariable(String),
    #[error("generator {0} has no meaning in a free nilpotent group")]
    UnsupportedGenerator(String),
    #[error("assigned value for {0} does not match the group parameters")]
    ShapeMismatch(String),
    #[error("assigned value for {0} is not a group element (constant term != 1)")]
    NotAUnit(String),
}

/// Evaluates a word in N(p, q): generator a_i maps to 1 + X_i, the central
/// letter c maps to [a_1, a_2], and variables take their assigned values.
pub fn magnus_eval_word(
    word: &Word,
    assignment: &BTreeMap<String, TruncatedFreePoly>,
    spec: &FreeNilpotentSpec,
) -> Result<TruncatedFreePoly, MagnusError> {
    let mut acc = TruncatedFreePoly::one(spec);
    for factor in &word.factors {
        acc = acc.mul(&eval_factor(factor, assignment, spec)?);
    }
    Ok(acc)
}

fn eval_factor(
    factor: &Factor,
    assignment: &BTreeMap<String, TruncatedFreePoly>,
    spec: &FreeNilpotentSpec,
) -> Result<TruncatedFreePoly, MagnusError> {
    match factor {
        Factor::Gen { kind: GenKind::A, index, exp } => {
            if *index < 1 || *index > spec.rank {
                return Err(MagnusError::UnsupportedGenerator(format!("a{index}")));
            }
            Ok(TruncatedFreePoly::generator(spec, index - 1).pow(*exp))
        }
        Factor::Gen { kind: GenKind::C, exp, .. } => {
            let a1 = TruncatedFreePoly::generator(spec, 0);
            let a2 = TruncatedFreePoly::generator(spec, 1);
            Ok(TruncatedFreePoly::commutator(&a1, &a2).pow(*exp))
        }
        Factor::Gen { kind: GenKind::B, index, .. } => {
            Err(MagnusError::UnsupportedGenerator(format!("b{index}")))
        }
        Factor::Gen { kind: GenKind::D, index, .. } => {
            Err(MagnusError::UnsupportedGenerator(format!("d{index}")))
        }
        Factor::Var { name, exp } => {
            let value = assignment
                .get(name)
                .ok_or_else(|| MagnusError::UnassignedVariable(name.clone()))?;
            if value.rank() != spec.rank || value.cap() != spec.step {
                return Err(MagnusError::ShapeMismatch(name.clone()));
            }
            if !value.constant_term().is_one() {
                return Err(MagnusError::NotAUnit(name.clone()));
            }
            Ok(value.pow(*exp))
        }
        Factor::Commutator { left, right, exp } => {
            let u = magnus_eval_word(left, assignment, spec)?;
            let v = magnus_eval_word(right, assignment, spec)?;
            Ok(TruncatedFreePoly::commutator(&u, &v).pow(*exp))
        }
        Factor::Grouped { inner, exp } => {
            Ok(magnus_eval_word(inner, assignment, spec)?.pow(*exp))
        }
    }
}

/// Whether the word evaluates to the group identity.
pub fn magnus_is_identity(
    word: &Word,
    assignment: &BTreeMap<String, TruncatedFreePoly>,
    spec: &FreeNilpotentSpec,
) -> Result<bool, MagnusError> {
    Ok(magnus_eval_word(word, assignment, spec)?.is_one())
}
