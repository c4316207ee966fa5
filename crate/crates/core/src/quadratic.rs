//! Partial decision procedure for a single quadratic equation over the
//! integers.
//!
//! Backends run in a fixed order: constant, linear, exact univariate,
//! a small witness probe, definite-form exhaustion, modular obstruction
//! scan, and finally bounded box search. Sat always carries a re-verified
//! witness; Unsat always carries a recheckable certificate; everything else
//! is an honest Unknown with the exhausted bound.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::SolverConfig;
use crate::decide::{Certificate, DecisionResult, Witness};
use crate::linear::{solve_linear_system, LinearOutcome};
use crate::poly::{IntPoly, Monomial};

/// Decides `q = 0` over integer points of `Z^num_vars`.
pub fn decide_quadratic(q: &IntPoly, num_vars: usize, cfg: &SolverConfig) -> DecisionResult {
    let used = q.used_vars();
    let expand = |w: &[i64]| -> Vec<i64> {
        let mut full = vec![0i64; num_vars];
        for (&v, &x) in used.iter().zip(w) {
            full[v] = x;
        }
        full
    };
    let sat = |w: &[i64]| -> DecisionResult {
        let full = expand(w);
        assert_eq!(q.eval(&full), 0, "witness failed re-verification");
        DecisionResult::Sat(Witness::Integers(full))
    };

    let k = used.len();
    let qc = compact(q, &used);

    if k == 0 {
        let c = qc.constant_part();
        if c == 0 {
            return sat(&[]);
        }
        return DecisionResult::Unsat(Certificate::GcdFailure(
            crate::linear::GcdCertificate {
                rows: vec![(Vec::new(), c)],
                multipliers: vec![1],
                modulus: 0,
            },
        ));
    }

    if qc.degree() <= 1 {
        let row = qc.as_linear_row(k).expect("degree <= 1");
        return match solve_linear_system(&[row], k) {
            LinearOutcome::Solvable(lat) => sat(&lat.offset),
            LinearOutcome::Infeasible(cert) => {
                DecisionResult::Unsat(Certificate::GcdFailure(cert))
            }
        };
    }

    if k == 1 {
        return match univariate_integer_root(&qc) {
            Some(x) => sat(&[x]),
            None => DecisionResult::Unsat(Certificate::DefiniteExhaustion {
                bound: definite_radius(q).expect("univariate radius"),
                poly: q.clone(),
            }),
        };
    }

    // Cheap witness probe before the heavier analyses.
    let probe = cfg.search_bound.min(4);
    if let Some(w) = shell_search(&qc, k, probe) {
        return sat(&w);
    }

    if let Some(radius) = definite_radius(q) {
        if box_points(radius, k).is_some_and(|n| n <= cfg.residue_budget as u128) {
            return match cube_zero(&qc, k, radius) {
                Some(w) => sat(&w),
                None => DecisionResult::Unsat(Certificate::DefiniteExhaustion {
                    bound: radius,
                    poly: q.clone(),
                }),
            };
        }
    }

    let mut spent: u128 = 0;
    for m in prime_powers_up_to(cfg.modulus_limit) {
        let points = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if spent + points > cfg.residue_budget as u128 {
            break;
        }
        spent += points;
        if modular_unsat(&qc, m) {
            return DecisionResult::Unsat(Certificate::ModularObstruction {
                modulus: m,
                poly: q.clone(),
            });
        }
    }

    let mut bound = cfg.search_bound;
    while bound > 0
        && box_points(bound, k).is_none_or(|n| n > cfg.residue_budget as u128)
    {
        bound -= 1;
    }
    if let Some(w) = shell_search(&qc, k, bound) {
        return sat(&w);
    }
    DecisionResult::Unknown { search_bound: bound, reason: None }
}

/// Renames variable `used[i]` to `i`.
fn compact(q: &IntPoly, used: &[usize]) -> IntPoly {
    let pos = |v: usize| used.binary_search(&v).expect("var in used set");
    let mut out = IntPoly::zero();
    for (mono, coeff) in q.terms() {
        let renamed = match *mono {
            Monomial::One => Monomial::One,
            Monomial::Lin(v) => Monomial::Lin(pos(v)),
            Monomial::Quad(a, b) => Monomial::Quad(pos(a), pos(b)),
        };
        out.add_term(renamed, *coeff);
    }
    out
}

/// Exact integer-root test for `a x^2 + b x + c` with `a != 0`.
fn univariate_integer_root(qc: &IntPoly) -> Option<i64> {
    let a = qc.coeff(&Monomial::Quad(0, 0));
    let b = qc.coeff(&Monomial::Lin(0));
    let c = qc.constant_part();
    debug_assert_ne!(a, 0);
    let disc = b as i128 * b as i128 - 4 * a as i128 * c as i128;
    if disc < 0 {
        return None;
    }
    let s = (disc as u128).isqrt() as i128;
    if s * s != disc {
        return None;
    }
    for num in [-(b as i128) - s, -(b as i128) + s] {
        let den = 2 * a as i128;
        if num % den == 0 {
            return Some(i64::try_from(num / den).expect("root fits in i64"));
        }
    }
    None
}

/// A radius outside which `q` provably has no integer zeros, when one of
/// the supported arguments applies: Cauchy's root bound for univariate
/// polynomials, or a definite quadratic part with an exact rational lower
/// bound on its minimum eigenvalue. Deterministic, so certificates can be
/// rechecked by recomputation.
pub(crate) fn definite_radius(q: &IntPoly) -> Option<u64> {
    let used = q.used_vars();
    let k = used.len();
    if k == 0 || q.degree() < 2 {
        return None;
    }
    let qc = compact(q, &used);

    if k == 1 {
        let a = qc.coeff(&Monomial::Quad(0, 0)).unsigned_abs();
        let b = qc.coeff(&Monomial::Lin(0)).unsigned_abs();
        let c = qc.constant_part().unsigned_abs();
        // All real roots satisfy |x| <= 1 + max(|b|, |c|) / |a|.
        return Some(1 + b.max(c).div_ceil(a));
    }

    // Gram matrix of twice the quadratic part.
    let mut a = vec![vec![BigInt::zero(); k]; k];
    for i in 0..k {
        a[i][i] = BigInt::from(2 * qc.coeff(&Monomial::Quad(i, i)));
        for j in (i + 1)..k {
            let x = BigInt::from(qc.coeff(&Monomial::Quad(i, j)));
            a[i][j] = x.clone();
            a[j][i] = x;
        }
    }
    let (matrix, flipped) = if is_positive_definite(&a) {
        (a, false)
    } else {
        let neg: Vec<Vec<BigInt>> =
            a.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
        if is_positive_definite(&neg) {
            (neg, true)
        } else {
            return None;
        }
    };
    // Zeros of q and -q coincide; flip the lower-order terms along with the
    // quadratic part.
    let sign = if flipped { -1 } else { 1 };

    let (mu_num, mu_den) = min_eigenvalue_lower_bound(&matrix);
    debug_assert!(mu_num > BigInt::zero());

    // With mu = mu_num/(2*mu_den) a lower bound for the form x^T S x over
    // the unit sphere, q(x) >= mu r^2 - b1 r - |gamma| at r = max |x_i|.
    // The radius is one past the largest root of that parabola.
    let b1: i64 = (0..k)
        .map(|i| (sign * qc.coeff(&Monomial::Lin(i))).abs())
        .sum();
    let gamma = (sign * qc.constant_part()).abs();
    let p = mu_num;
    let qden = BigInt::from(2) * mu_den;
    let b1 = BigInt::from(b1);
    let gamma = BigInt::from(gamma);
    let disc = (&qden * &b1) * (&qden * &b1) + BigInt::from(4) * &p * &qden * gamma;
    let radius = ((&qden * &b1 + disc.sqrt()) / (BigInt::from(2) * p)) + BigInt::one();
    radius.to_u64()
}

/// Leading-principal-minor positivity via fraction-free elimination; the
/// running pivots are exactly the leading minors.
fn is_positive_definite(a: &[Vec<BigInt>]) -> bool {
    let k = a.len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut prev = BigInt::one();
    for t in 0..k {
        if m[t][t] <= BigInt::zero() {
            return false;
        }
        for i in (t + 1)..k {
            for j in (t + 1)..k {
                let num = &m[t][t] * &m[i][j] - &m[i][t] * &m[t][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[t][t].clone();
    }
    true
}

/// Determinant of a positive-definite matrix (the final elimination pivot).
fn determinant_pd(a: &[Vec<BigInt>]) -> BigInt {
    let k = a.len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut prev = BigInt::one();
    for t in 0..k {
        debug_assert!(m[t][t] > BigInt::zero());
        for i in (t + 1)..k {
            for j in (t + 1)..k {
                let num = &m[t][t] * &m[i][j] - &m[i][t] * &m[t][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[t][t].clone();
    }
    prev
}

/// Exact rational lower bound `num/den` for the least eigenvalue of a
/// positive-definite integer matrix: the coarse bound det/trace^(k-1),
/// sharpened by bisection with exact shifted-definiteness tests.
fn min_eigenvalue_lower_bound(a: &[Vec<BigInt>]) -> (BigInt, BigInt) {
    let k = a.len();
    let det = determinant_pd(a);
    let trace: BigInt = (0..k).map(|i| a[i][i].clone()).sum();
    let coarse = (det, trace.pow(k as u32 - 1));

    let scale: i64 = 1 << 20;
    let shifted_pd = |s: &BigInt| -> bool {
        let m: Vec<Vec<BigInt>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let x = &a[i][j] * scale;
                        if i == j { x - s } else { x }
                    })
                    .collect()
            })
            .collect();
        is_positive_definite(&m)
    };
    let min_diag = (0..k).map(|i| a[i][i].clone()).min().unwrap();
    let mut lo = BigInt::zero();
    let mut hi = min_diag * scale + BigInt::one();
    // Invariant: shifted_pd holds at lo (vacuously at 0); fails at hi.
    while &hi - &lo > BigInt::one() {
        let mid = (&lo + &hi) / 2;
        if shifted_pd(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fine = (lo, BigInt::from(scale));

    // Pick the larger of the two positive lower bounds.
    if fine.0 > BigInt::zero() && &fine.0 * &coarse.1 > &coarse.0 * &fine.1 {
        fine
    } else {
        coarse
    }
}

/// Whether `q ≡ 0 (mod m)` has no solution over residues of its variables.
pub(crate) fn modular_unsat(qc: &IntPoly, m: u64) -> bool {
    let k = match qc.used_vars().last() {
        Some(&v) => v + 1,
        None => return qc.constant_part().rem_euclid(m as i64) != 0,
    };
    let mut point = vec![0i64; k];
    loop {
        if qc.eval_mod(&point, m) == 0 {
            return false;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            point[pos] += 1;
            if point[pos] < m as i64 {
                break;
            }
            point[pos] = 0;
        }
    }
}

pub(crate) fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in 2..=limit {
        if (2..p).all(|d| p % d != 0) {
            let mut pw = p;
            while pw <= limit {
                out.push(pw);
                match pw.checked_mul(p) {
                    Some(next) => pw = next,
                    None => break,
                }
            }
        }
    }
    out.sort_unstable();
    out
}

pub(crate) fn box_points(bound: u64, k: usize) -> Option<u128> {
    (2 * bound as u128 + 1).checked_pow(k as u32)
}

/// First zero of `qc` in the cube `max |x_i| <= bound`, scanning shells of
/// increasing radius, lexicographically within a shell.
pub(crate) fn shell_search(qc: &IntPoly, k: usize, bound: u64) -> Option<Vec<i64>> {
    let terms: Vec<(Monomial, i64)> = qc.terms().map(|(m, c)| (*m, *c)).collect();
    let mut point = vec![0i64; k];
    for r in 0..=(bound as i64) {
        if shell_rec(&terms, &mut point, 0, r, r == 0) {
            return Some(point);
        }
    }
    None
}

fn shell_rec(
    terms: &[(Monomial, i64)],
    point: &mut Vec<i64>,
    pos: usize,
    r: i64,
    touched: bool,
) -> bool {
    if pos == point.len() {
        return touched && eval_terms(terms, point) == 0;
    }
    // Untouched tails can never reach the shell once no positions remain;
    // the leaf check enforces it, this loop just enumerates.
    for x in -r..=r {
        point[pos] = x;
        if shell_rec(terms, point, pos + 1, r, touched || x.abs() == r) {
            return true;
        }
    }
    false
}

/// First zero in the full cube, lexicographic order.
pub(crate) fn cube_zero(qc: &IntPoly, k: usize, bound: u64) -> Option<Vec<i64>> {
    let terms: Vec<(Monomial, i64)> = qc.terms().map(|(m, c)| (*m, *c)).collect();
    let b = bound as i64;
    let mut point = vec![-b; k];
    loop {
        if eval_terms(&terms, &point) == 0 {
            return Some(point);
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            point[pos] += 1;
            if point[pos] <= b {
                break;
            }
            point[pos] = -b;
        }
    }
}

fn eval_terms(terms: &[(Monomial, i64)], x: &[i64]) -> i128 {
    let mut acc: i128 = 0;
    for (mono, c) in terms {
        let c = *c as i128;
        acc += match *mono {
            Monomial::One => c,
            Monomial::Lin(i) => c * x[i] as i128,
            Monomial::Quad(i, j) => c * x[i] as i128 * x[j] as i128,
        };
    }
    acc
}

/// Recheck helper for definite-exhaustion certificates: no integer zeros of
/// `q` in the cube of the given radius over its used variables.
pub(crate) fn no_zeros_in_cube(q: &IntPoly, bound: u64) -> bool {
    let used = q.used_vars();
    let qc = compact(q, &used);
    cube_zero(&qc, used.len(), bound).is_none()
}
