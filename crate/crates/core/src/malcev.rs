//! Coordinate arithmetic for the groups described by
//! [`MalcevPresentation`].
//!
//! Every element has a unique normal form
//! `a1^A1 * ... * an^An * b1^B1 * ... * br^Br * c^C * d1^D1 * ... * ds^Ds`
//! with `0 <= Bi < li` and `0 <= Dt < kt`, so elements are coordinate
//! tuples. Products are computed by an explicit law derived from the
//! convention `[x, y] = x^-1 * y^-1 * x * y` (equivalently
//! `x * y = y * x * [x, y]`): writing `e(g, h)` for the `c`-exponent of
//! `[g, h]`,
//!
//! ```text
//! A''_i = A_i + A'_i
//! B''_i = (B_i + B'_i) mod l_i
//! C''   = C + C' - sum_{i<j} e(a_i,a_j) A'_i A_j
//!               - sum_{i<j} e(b_i,b_j) B'_i B_j
//!               - sum_{i,j} e(a_i,b_j) A'_i B_j
//!               + sum over carries (B_i + B'_i >= l_i) of the b_i^{l_i} entry
//! ```
//!
//! and each `D''_t` is the analogous expression in the `d_t`-exponents,
//! reduced mod `k_t`. The law is certified against the independent
//! rewriting oracle in [`crate::collect`] by the test suites.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::presentation::{Gen, MalcevPresentation};
use crate::word::{Factor, GenKind, Word};

/// Normal-form coordinates of one group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MalcevCoord {
    /// Exponents of `a1..an`, unconstrained.
    pub a: Vec<i64>,
    /// Exponents of `b1..br`, each in `0..l_i`.
    pub b: Vec<u64>,
    /// Exponent of `c`, unconstrained.
    pub c: i64,
    /// Exponents of `d1..ds`, each in `0..k_t`.
    pub d: Vec<u64>,
}

/// Errors from coordinate construction and word evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("coordinate shape does not match the presentation")]
    ShapeMismatch,
    #[error("torsion coordinate {index} out of range: {value}")]
    TorsionOutOfRange { index: usize, value: u64 },
    #[error("variable '{0}' has no assigned value")]
    UnassignedVariable(String),
}

impl MalcevCoord {
    /// The identity element of `p`.
    pub fn identity(p: &MalcevPresentation) -> Self {
        MalcevCoord {
            a: vec![0; p.num_a()],
            b: vec![0; p.num_b()],
            c: 0,
            d: vec![0; p.num_d()],
        }
    }

    /// Checks lengths and torsion ranges against `p`.
    pub fn validate(&self, p: &MalcevPresentation) -> Result<(), EvalError> {
        if self.a.len() != p.num_a() || self.b.len() != p.num_b() || self.d.len() != p.num_d()
        {
            return Err(EvalError::ShapeMismatch);
        }
        for (i, (&v, &m)) in self.b.iter().zip(p.torsion_orders()).enumerate() {
            if v >= m {
                return Err(EvalError::TorsionOutOfRange { index: i + 1, value: v });
            }
        }
        for (t, (&v, &m)) in self.d.iter().zip(p.central_orders()).enumerate() {
            if v >= m {
                return Err(EvalError::TorsionOutOfRange { index: t + 1, value: v });
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
            && self.b.iter().all(|&x| x == 0)
            && self.c == 0
            && self.d.iter().all(|&x| x == 0)
    }

    /// True when the element is central: trivial `a` and `b` parts.
    pub fn is_central(&self) -> bool {
        self.a.iter().all(|&x| x == 0) && self.b.iter().all(|&x| x == 0)
    }

    /// Renders the normal-form word, e.g. `a1^2*b1*c^-3`.
    pub fn to_word_string(&self) -> String {
        let mut parts = Vec::new();
        let mut push = |letter: String, e: i64| {
            if e == 1 {
                parts.push(letter);
            } else if e != 0 {
                parts.push(format!("{letter}^{e}"));
            }
        };
        for (i, &e) in self.a.iter().enumerate() {
            push(format!("a{}", i + 1), e);
        }
        for (i, &e) in self.b.iter().enumerate() {
            push(format!("b{}", i + 1), e as i64);
        }
        push("c".to_string(), self.c);
        for (t, &e) in self.d.iter().enumerate() {
            push(format!("d{}", t + 1), e as i64);
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for MalcevCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word_string())
    }
}

/// The group product `g * h` in coordinates.
pub fn multiply(p: &MalcevPresentation, g: &MalcevCoord, h: &MalcevCoord) -> MalcevCoord {
    debug_assert!(g.validate(p).is_ok() && h.validate(p).is_ok());
    let n = p.num_a();
    let r = p.num_b();

    let mut a = vec![0i64; n];
    for i in 0..n {
        a[i] = g.a[i] + h.a[i];
    }

    let mut c = g.c + h.c;
    let mut d_acc: Vec<i64> = g.d.iter().zip(&h.d).map(|(&x, &y)| x as i64 + y as i64).collect();

    // Interchange terms: moving the second factor's a-block left past the
    // first factor's b-block and merging the a- and b-blocks.
    fn add_central(
        value: &crate::presentation::CentralValue,
        mult: i64,
        c: &mut i64,
        d_acc: &mut [i64],
    ) {
        *c -= value.c_exp * mult;
        for (t, &e) in value.d_exps.iter().enumerate() {
            d_acc[t] -= e * mult;
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let mult = h.a[i] * g.a[j];
            if mult != 0 {
                let v = p.commutator_value(Gen::A(i + 1), Gen::A(j + 1));
                add_central(&v, mult, &mut c, &mut d_acc);
            }
        }
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let mult = h.b[i] as i64 * g.b[j] as i64;
            if mult != 0 {
                let v = p.commutator_value(Gen::B(i + 1), Gen::B(j + 1));
                add_central(&v, mult, &mut c, &mut d_acc);
            }
        }
    }
    for i in 0..n {
        for j in 0..r {
            let mult = h.a[i] * g.b[j] as i64;
            if mult != 0 {
                let v = p.commutator_value(Gen::A(i + 1), Gen::B(j + 1));
                add_central(&v, mult, &mut c, &mut d_acc);
            }
        }
    }

    // Torsion reduction of the merged b-block, with carries into the center.
    let mut b = vec![0u64; r];
    for i in 0..r {
        let total = g.b[i] + h.b[i];
        let order = p.torsion_orders()[i];
        if total >= order {
            b[i] = total - order;
            let v = p.power_value(i + 1);
            c += v.c_exp;
            for (t, &e) in v.d_exps.iter().enumerate() {
                d_acc[t] += e;
            }
        } else {
            b[i] = total;
        }
    }

    let d = d_acc
        .iter()
        .zip(p.central_orders())
        .map(|(&x, &m)| x.rem_euclid(m as i64) as u64)
        .collect();

    MalcevCoord { a, b, c, d }
}

/// The group inverse in coordinates.
pub fn inverse(p: &MalcevPresentation, g: &MalcevCoord) -> MalcevCoord {
    // The a- and b-parts of the inverse are forced; the central part is
    // whatever cancels the product's central residue.
    let a: Vec<i64> = g.a.iter().map(|&x| -x).collect();
    let b: Vec<u64> = g
        .b
        .iter()
        .zip(p.torsion_orders())
        .map(|(&x, &m)| if x == 0 { 0 } else { m - x })
        .collect();
    let probe = MalcevCoord { a, b, c: 0, d: vec![0; p.num_d()] };
    let residue = multiply(p, g, &probe);
    debug_assert!(residue.is_central());
    MalcevCoord {
        a: probe.a,
        b: probe.b,
        c: -residue.c,
        d: residue
            .d
            .iter()
            .zip(p.central_orders())
            .map(|(&x, &m)| if x == 0 { 0 } else { m - x })
            .collect(),
    }
}

/// `g^e` by binary exponentiation.
pub fn power(p: &MalcevPresentation, g: &MalcevCoord, e: i64) -> MalcevCoord {
    let (mut base, mut e) = if e < 0 {
        (inverse(p, g), e.unsigned_abs())
    } else {
        (g.clone(), e as u64)
    };
    let mut acc = MalcevCoord::identity(p);
    while e > 0 {
        if e & 1 == 1 {
            acc = multiply(p, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = multiply(p, &base, &base);
        }
    }
    acc
}

/// Coordinates of a single generator power.
pub fn generator_power(
    p: &MalcevPresentation,
    kind: GenKind,
    index: usize,
    e: i64,
) -> MalcevCoord {
    let mut g = MalcevCoord::identity(p);
    match kind {
        GenKind::A => g.a[index - 1] = e,
        GenKind::C => g.c = e,
        GenKind::D => {
            let m = p.central_orders()[index - 1] as i64;
            g.d[index - 1] = e.rem_euclid(m) as u64;
        }
        GenKind::B => {
            // b_i^e = (b_i^{l_i})^q * b_i^s with e = q*l_i + s, 0 <= s < l_i;
            // the first factor is the declared central value to the q.
            let m = p.torsion_orders()[index - 1] as i64;
            let q = e.div_euclid(m);
            let s = e.rem_euclid(m);
            g.b[index - 1] = s as u64;
            let v = p.power_value(index);
            g.c = v.c_exp * q;
            for (t, &de) in v.d_exps.iter().enumerate() {
                let km = p.central_orders()[t] as i64;
                g.d[t] = (de * q).rem_euclid(km) as u64;
            }
        }
    }
    g
}

/// Evaluates a word at an assignment of coordinates to its unknowns.
pub fn evaluate_word(
    p: &MalcevPresentation,
    word: &Word,
    assignment: &BTreeMap<String, MalcevCoord>,
) -> Result<MalcevCoord, EvalError> {
    let mut acc = MalcevCoord::identity(p);
    for factor in &word.factors {
        let value = evaluate_factor(p, factor, assignment)?;
        acc = multiply(p, &acc, &value);
    }
    Ok(acc)
}

fn evaluate_factor(
    p: &MalcevPresentation,
    factor: &Factor,
    assignment: &BTreeMap<String, MalcevCoord>,
) -> Result<MalcevCoord, EvalError> {
    Ok(match factor {
        Factor::Gen { kind, index, exp } => generator_power(p, *kind, *index, *exp),
        Factor::Var { name, exp } => {
            let value = assignment
                .get(name)
                .ok_or_else(|| EvalError::UnassignedVariable(name.clone()))?;
            value.validate(p)?;
            power(p, value, *exp)
        }
        Factor::Commutator { left, right, exp } => {
            let u = evaluate_word(p, left, assignment)?;
            let v = evaluate_word(p, right, assignment)?;
            let comm = multiply(
                p,
                &multiply(p, &inverse(p, &u), &inverse(p, &v)),
                &multiply(p, &u, &v),
            );
            power(p, &comm, *exp)
        }
        Factor::Grouped { inner, exp } => {
            let w = evaluate_word(p, inner, assignment)?;
            power(p, &w, *exp)
        }
    })
}

/// Evaluates a ground word (no unknowns).
pub fn evaluate_ground_word(
    p: &MalcevPresentation,
    word: &Word,
) -> Result<MalcevCoord, EvalError> {
    evaluate_word(p, word, &BTreeMap::new())
}
