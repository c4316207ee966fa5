//! Integer polynomials of degree at most two over a shared table of named
//! unknowns.
//!
//! Terms are kept in a sorted map under a canonical monomial order
//! (constant, then linear by index, then quadratic lexicographically) with
//! no zero coefficients, so equal polynomials are structurally equal.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// A monomial of degree <= 2. `Quad(i, j)` keeps `i <= j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Monomial {
    One,
    Lin(usize),
    Quad(usize, usize),
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        match self {
            Monomial::One => 0,
            Monomial::Lin(_) => 1,
            Monomial::Quad(_, _) => 2,
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        match (*self, *other) {
            (Monomial::One, m) | (m, Monomial::One) => m,
            (Monomial::Lin(i), Monomial::Lin(j)) => {
                Monomial::Quad(i.min(j), i.max(j))
            }
            _ => panic!("polynomial degree would exceed 2"),
        }
    }
}

/// Names for the unknowns referenced by polynomial variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct VarTable {
    pub names: Vec<String>,
}

impl VarTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        VarTable { names: names.into_iter().map(Into::into).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }
}

/// Sparse integer polynomial of degree <= 2.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntPoly {
    terms: BTreeMap<Monomial, i64>,
}

/// Serializes as a list of `[[var indices], coefficient]` pairs in monomial
/// order, e.g. `[[[], -1], [[0, 0], 2]]` for `2*y0^2 - 1`.
impl Serialize for IntPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (m, c) in &self.terms {
            let indices: Vec<usize> = match *m {
                Monomial::One => vec![],
                Monomial::Lin(i) => vec![i],
                Monomial::Quad(i, j) => vec![i, j],
            };
            seq.serialize_element(&(indices, c))?;
        }
        seq.end()
    }
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly::default()
    }

    pub fn constant(value: i64) -> Self {
        let mut p = IntPoly::zero();
        p.add_term(Monomial::One, value);
        p
    }

    pub fn var(index: usize) -> Self {
        let mut p = IntPoly::zero();
        p.add_term(Monomial::Lin(index), 1);
        p
    }

    pub fn add_term(&mut self, m: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn constant_part(&self) -> i64 {
        self.terms.get(&Monomial::One).copied().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, -c);
        }
        out
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly::zero().sub(self)
    }

    pub fn scale(&self, k: i64) -> IntPoly {
        let mut out = IntPoly::zero();
        for (&m, &c) in &self.terms {
            out.add_term(m, c * k);
        }
        out
    }

    /// Product; panics if the result would exceed degree 2, which the
    /// collection pipeline guarantees never happens.
    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = IntPoly::zero();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Reduces every coefficient into `0..m`.
    pub fn reduce_mod(&self, m: u64) -> IntPoly {
        let mut out = IntPoly::zero();
        for (&mon, &c) in &self.terms {
            out.add_term(mon, c.rem_euclid(m as i64));
        }
        out
    }

    pub fn eval(&self, point: &[i64]) -> i64 {
        let mut total = 0i64;
        for (&m, &c) in &self.terms {
            total += c * match m {
                Monomial::One => 1,
                Monomial::Lin(i) => point[i],
                Monomial::Quad(i, j) => point[i] * point[j],
            };
        }
        total
    }

    pub fn eval_mod(&self, point: &[i64], modulus: u64) -> i64 {
        let m = modulus as i64;
        let mut total = 0i64;
        for (&mon, &c) in &self.terms {
            let v = match mon {
                Monomial::One => 1,
                Monomial::Lin(i) => point[i].rem_euclid(m),
                Monomial::Quad(i, j) => (point[i].rem_euclid(m) * point[j].rem_euclid(m)).rem_euclid(m),
            };
            total = (total + c.rem_euclid(m) * v).rem_euclid(m);
        }
        total
    }

    /// Variable indices that occur with nonzero coefficient.
    pub fn used_vars(&self) -> Vec<usize> {
        let mut seen = std::collections::BTreeSet::new();
        for m in self.terms.keys() {
            match *m {
                Monomial::One => {}
                Monomial::Lin(i) => {
                    seen.insert(i);
                }
                Monomial::Quad(i, j) => {
                    seen.insert(i);
                    seen.insert(j);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Substitutes `var i := forms[i]` where each form is affine (degree
    /// <= 1 over the new unknowns). The result is again degree <= 2.
    pub fn substitute_affine(&self, forms: &[IntPoly]) -> IntPoly {
        let mut out = IntPoly::zero();
        for (&m, &c) in &self.terms {
            let term = match m {
                Monomial::One => IntPoly::constant(1),
                Monomial::Lin(i) => forms[i].clone(),
                Monomial::Quad(i, j) => forms[i].mul(&forms[j]),
            };
            out = out.add(&term.scale(c));
        }
        out
    }

    /// The coefficient row `(coeffs, constant)` of a degree <= 1 polynomial.
    pub fn as_linear_row(&self, num_vars: usize) -> Option<(Vec<i64>, i64)> {
        if self.degree() > 1 {
            return None;
        }
        let mut coeffs = vec![0i64; num_vars];
        for (&m, &c) in &self.terms {
            match m {
                Monomial::One => {}
                Monomial::Lin(i) => coeffs[i] = c,
                Monomial::Quad(_, _) => unreachable!(),
            }
        }
        Some((coeffs, self.constant_part()))
    }

    /// Renders against a variable table, e.g. `2*x.a1*x.a2 - x.c + 3`.
    pub fn display<'a>(&'a self, vars: &'a VarTable) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a IntPoly,
    vars: &'a VarTable,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        // Constants last reads more naturally for constraint rows.
        let mut terms: Vec<(&Monomial, &i64)> = self.poly.terms().collect();
        terms.sort_by_key(|(m, _)| std::cmp::Reverse(m.degree()));
        for (idx, (m, &c)) in terms.iter().enumerate() {
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if idx == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let name = |i: usize| self.vars.name(i).to_string();
            match **m {
                Monomial::One => write!(f, "{mag}")?,
                Monomial::Lin(i) => {
                    if mag != 1 {
                        write!(f, "{mag}*")?;
                    }
                    write!(f, "{}", name(i))?;
                }
                Monomial::Quad(i, j) => {
                    if mag != 1 {
                        write!(f, "{mag}*")?;
                    }
                    if i == j {
                        write!(f, "{}^2", name(i))?;
                    } else {
                        write!(f, "{}*{}", name(i), name(j))?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> IntPoly {
        IntPoly::var(0)
    }

    fn y() -> IntPoly {
        IntPoly::var(1)
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let p = x().add(&x().neg());
        assert!(p.is_zero());
        let q = x().mul(&y()).sub(&y().mul(&x()));
        assert!(q.is_zero());
    }

    #[test]
    fn quad_monomials_are_ordered() {
        let p = x().mul(&y());
        let q = y().mul(&x());
        assert_eq!(p, q);
        assert_eq!(p.coeff(&Monomial::Quad(0, 1)), 1);
    }

    #[test]
    #[should_panic(expected = "degree would exceed 2")]
    fn degree_overflow_panics() {
        let q = x().mul(&y());
        let _ = q.mul(&x());
    }

    #[test]
    fn evaluation() {
        // 2xy - x + 3 at (2, 5) = 20 - 2 + 3 = 21.
        let p = x().mul(&y()).scale(2).sub(&x()).add(&IntPoly::constant(3));
        assert_eq!(p.eval(&[2, 5]), 21);
        assert_eq!(p.eval_mod(&[2, 5], 4), 1);
    }

    #[test]
    fn affine_substitution_keeps_degree() {
        // Q = y0 * y1 - 1 under y0 = 1 + t, y1 = 1 - t gives -t^2.
        let q = x().mul(&y()).sub(&IntPoly::constant(1));
        let forms = vec![
            IntPoly::constant(1).add(&IntPoly::var(0)),
            IntPoly::constant(1).sub(&IntPoly::var(0)),
        ];
        let sub = q.substitute_affine(&forms);
        let expected = IntPoly::var(0).mul(&IntPoly::var(0)).neg();
        assert_eq!(sub, expected);
    }

    #[test]
    fn linear_row_extraction() {
        let p = x().scale(2).sub(&IntPoly::constant(1));
        assert_eq!(p.as_linear_row(2), Some((vec![2, 0], -1)));
        assert_eq!(x().mul(&x()).as_linear_row(2), None);
    }

    #[test]
    fn display_is_readable() {
        let vars = VarTable::new(["x.a1", "x.c"]);
        let p = IntPoly::var(1)
            .scale(2)
            .sub(&IntPoly::var(0).mul(&IntPoly::var(0)))
            .sub(&IntPoly::constant(1));
        assert_eq!(p.display(&vars).to_string(), "-x.a1^2 + 2*x.c - 1");
        assert_eq!(IntPoly::zero().display(&vars).to_string(), "0");
    }
}
