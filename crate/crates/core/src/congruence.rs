//! Congruence systems solved by exhaustive residue enumeration.
//!
//! Solutions of a list of polynomial congruences are represented as the set
//! of residue vectors mod M, where M is the lcm of the individual moduli.
//! Quadratic congruences make the solution set a genuine union of classes
//! rather than a single affine pattern, so the representation is a plain
//! list.

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::poly::IntPoly;

/// All solutions of a congruence system, as residue vectors mod `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueClassSet {
    pub modulus: u64,
    /// Sorted, duplicate-free vectors with entries in `0..modulus`.
    pub classes: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("residue enumeration needs {points} points, over the budget of {budget}")]
    Budget { points: u128, budget: u64 },
}

/// Enumerates every vector in `(Z_M)^num_vars` satisfying all congruences,
/// with `M` the lcm of the moduli. The moduli divide `M`, so checking each
/// congruence at a mod-`M` representative is well-defined.
pub fn enumerate_congruence_classes(
    congruences: &[(IntPoly, u64)],
    num_vars: usize,
    residue_budget: u64,
) -> Result<ResidueClassSet, CongruenceError> {
    let mut modulus: u64 = 1;
    for &(_, m) in congruences {
        assert!(m > 0, "congruence modulus must be positive");
        modulus = modulus.lcm(&m);
    }

    let points = (modulus as u128)
        .checked_pow(num_vars as u32)
        .unwrap_or(u128::MAX);
    if points > residue_budget as u128 {
        return Err(CongruenceError::Budget { points, budget: residue_budget });
    }

    let mut classes = Vec::new();
    let mut point = vec![0i64; num_vars];
    loop {
        if congruences
            .iter()
            .all(|(poly, m)| poly.eval_mod(&point, *m) == 0)
        {
            classes.push(point.clone());
        }
        let mut pos = num_vars;
        loop {
            if pos == 0 {
                return Ok(ResidueClassSet { modulus, classes });
            }
            pos -= 1;
            point[pos] += 1;
            if point[pos] < modulus as i64 {
                break;
            }
            point[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;

    fn linear(coeff: i64, konst: i64) -> IntPoly {
        let mut p = IntPoly::var(0).scale(coeff);
        p.add_term(Monomial::One, konst);
        p
    }

    #[test]
    fn single_odd_congruence() {
        // y ≡ 1 (mod 2), written y - 1 ≡ 0.
        let set =
            enumerate_congruence_classes(&[(linear(1, -1), 2)], 1, 1000).unwrap();
        assert_eq!(set.modulus, 2);
        assert_eq!(set.classes, vec![vec![1]]);
    }

    #[test]
    fn square_divisible_by_four() {
        let mut poly = IntPoly::zero();
        poly.add_term(Monomial::Quad(0, 0), 1);
        let set = enumerate_congruence_classes(&[(poly, 4)], 1, 1000).unwrap();
        assert_eq!(set.modulus, 4);
        assert_eq!(set.classes, vec![vec![0], vec![2]]);
    }

    #[test]
    fn contradictory_congruences_give_empty_set() {
        let set = enumerate_congruence_classes(
            &[(linear(1, 0), 2), (linear(1, -1), 2)],
            1,
            1000,
        )
        .unwrap();
        assert_eq!(set.modulus, 2);
        assert!(set.classes.is_empty());
    }

    #[test]
    fn lcm_lifts_mixed_moduli() {
        // y ≡ 1 (mod 2) and y ≡ 2 (mod 3): unique class 5 mod 6.
        let set = enumerate_congruence_classes(
            &[(linear(1, -1), 2), (linear(1, -2), 3)],
            1,
            1000,
        )
        .unwrap();
        assert_eq!(set.modulus, 6);
        assert_eq!(set.classes, vec![vec![5]]);
    }

    #[test]
    fn empty_system_has_one_class() {
        let set = enumerate_congruence_classes(&[], 3, 1000).unwrap();
        assert_eq!(set.modulus, 1);
        assert_eq!(set.classes, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_congruence_classes(&[(linear(1, 0), 10)], 8, 1000)
            .unwrap_err();
        assert_eq!(err, CongruenceError::Budget { points: 100_000_000, budget: 1000 });
    }

    #[test]
    fn multivariate_classes_are_lexicographic() {
        // y1 + y2 ≡ 0 (mod 2).
        let mut poly = IntPoly::var(0);
        poly = poly.add(&IntPoly::var(1));
        let set = enumerate_congruence_classes(&[(poly, 2)], 2, 1000).unwrap();
        assert_eq!(set.classes, vec![vec![0, 0], vec![1, 1]]);
    }
}
