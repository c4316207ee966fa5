//! Reduction of one group equation to integer constraint branches.
//!
//! The torsion coordinates of each unknown range over finite sets, so they
//! are enumerated concretely; the unbounded coordinates (`a`-exponents and
//! the `c`-exponent of each unknown) stay symbolic. Collecting the equation
//! word with this mixed representation yields, per torsion assignment:
//!
//! * one linear row per `a`-coordinate of the group (degree <= 1),
//! * one congruence per `d`-coordinate (degree <= 2, modulus `k_t`),
//! * exactly one quadratic from the `c`-coordinate (degree <= 2),
//!
//! plus concrete `b`-coordinate residues that must vanish for the branch to
//! survive.

use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::malcev::MalcevCoord;
use crate::poly::{IntPoly, VarTable};
use crate::presentation::{Gen, MalcevPresentation};
use crate::word::{Equation, Factor, Word};

/// Concrete torsion coordinates chosen for one unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionAssignment {
    pub b: Vec<u64>,
    pub d: Vec<u64>,
}

/// One branch of integer constraints. A group solution with the branch's
/// torsion coordinates exists iff the constraints have an integer solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintBranch {
    /// Torsion coordinates per unknown, keyed by unknown name.
    pub assignment: BTreeMap<String, TorsionAssignment>,
    /// Degree <= 1 rows required to be 0 (the `a`-coordinate equations).
    pub linear: Vec<IntPoly>,
    /// Degree <= 2 rows required to vanish mod the paired modulus (the
    /// `d`-coordinate equations).
    pub congruences: Vec<(IntPoly, u64)>,
    /// The single `c`-coordinate equation, degree <= 2.
    pub quadratic: IntPoly,
}

/// Output of [`reduce_equation`]: shared unknown table plus the surviving
/// branches in deterministic (lexicographic assignment) order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedEquation {
    /// Unknown names: `x.a1 .. x.an, x.c` per equation variable `x`.
    pub unknowns: VarTable,
    /// Equation variables in order of first occurrence.
    pub variables: Vec<String>,
    pub branches: Vec<ConstraintBranch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("torsion branch count {count} exceeds the budget of {budget}")]
    BranchBudget { count: u128, budget: u64 },
}

/// Group-element coordinates with symbolic unbounded parts.
#[derive(Clone, Debug)]
struct SymCoord {
    a: Vec<IntPoly>,
    b: Vec<u64>,
    c: IntPoly,
    d: Vec<IntPoly>,
}

impl SymCoord {
    fn identity(p: &MalcevPresentation) -> Self {
        SymCoord {
            a: vec![IntPoly::zero(); p.num_a()],
            b: vec![0; p.num_b()],
            c: IntPoly::zero(),
            d: vec![IntPoly::zero(); p.num_d()],
        }
    }

    fn from_concrete(p: &MalcevPresentation, g: &MalcevCoord) -> Self {
        let _ = p;
        SymCoord {
            a: g.a.iter().map(|&x| IntPoly::constant(x)).collect(),
            b: g.b.clone(),
            c: IntPoly::constant(g.c),
            d: g.d.iter().map(|&x| IntPoly::constant(x as i64)).collect(),
        }
    }
}

/// Same product law as `malcev::multiply`, with polynomial a/c/d parts.
fn sym_multiply(p: &MalcevPresentation, g: &SymCoord, h: &SymCoord) -> SymCoord {
    let n = p.num_a();
    let r = p.num_b();

    let a: Vec<IntPoly> = (0..n).map(|i| g.a[i].add(&h.a[i])).collect();
    let mut c = g.c.add(&h.c);
    let mut d: Vec<IntPoly> = g.d.iter().zip(&h.d).map(|(x, y)| x.add(y)).collect();

    let add_central = |v: &crate::presentation::CentralValue,
                           mult: &IntPoly,
                           c: &mut IntPoly,
                           d: &mut Vec<IntPoly>| {
        if v.c_exp != 0 {
            *c = c.sub(&mult.scale(v.c_exp));
        }
        for (t, &e) in v.d_exps.iter().enumerate() {
            if e != 0 {
                d[t] = d[t].sub(&mult.scale(e));
            }
        }
    };

    for i in 0..n {
        for j in (i + 1)..n {
            let mult = h.a[i].mul(&g.a[j]);
            if !mult.is_zero() {
                let v = p.commutator_value(Gen::A(i + 1), Gen::A(j + 1));
                add_central(&v, &mult, &mut c, &mut d);
            }
        }
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let mult = IntPoly::constant(h.b[i] as i64 * g.b[j] as i64);
            if !mult.is_zero() {
                let v = p.commutator_value(Gen::B(i + 1), Gen::B(j + 1));
                add_central(&v, &mult, &mut c, &mut d);
            }
        }
    }
    for i in 0..n {
        for j in 0..r {
            let mult = h.a[i].scale(g.b[j] as i64);
            if !mult.is_zero() {
                let v = p.commutator_value(Gen::A(i + 1), Gen::B(j + 1));
                add_central(&v, &mult, &mut c, &mut d);
            }
        }
    }

    let mut b = vec![0u64; r];
    for i in 0..r {
        let total = g.b[i] + h.b[i];
        let order = p.torsion_orders()[i];
        if total >= order {
            b[i] = total - order;
            let v = p.power_value(i + 1);
            c = c.add(&IntPoly::constant(v.c_exp));
            for (t, &e) in v.d_exps.iter().enumerate() {
                d[t] = d[t].add(&IntPoly::constant(e));
            }
        } else {
            b[i] = total;
        }
    }

    SymCoord { a, b, c, d }
}

fn sym_inverse(p: &MalcevPresentation, g: &SymCoord) -> SymCoord {
    let probe = SymCoord {
        a: g.a.iter().map(IntPoly::neg).collect(),
        b: g.b
            .iter()
            .zip(p.torsion_orders())
            .map(|(&x, &m)| if x == 0 { 0 } else { m - x })
            .collect(),
        c: IntPoly::zero(),
        d: vec![IntPoly::zero(); p.num_d()],
    };
    let residue = sym_multiply(p, g, &probe);
    debug_assert!(residue.a.iter().all(IntPoly::is_zero));
    debug_assert!(residue.b.iter().all(|&x| x == 0));
    SymCoord {
        a: probe.a,
        b: probe.b,
        c: residue.c.neg(),
        d: residue.d.iter().map(IntPoly::neg).collect(),
    }
}

fn sym_power(p: &MalcevPresentation, g: &SymCoord, e: i64) -> SymCoord {
    let (mut base, mut e) = if e < 0 {
        (sym_inverse(p, g), e.unsigned_abs())
    } else {
        (g.clone(), e as u64)
    };
    let mut acc = SymCoord::identity(p);
    while e > 0 {
        if e & 1 == 1 {
            acc = sym_multiply(p, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = sym_multiply(p, &base, &base);
        }
    }
    acc
}

/// Where each unknown's symbolic coordinates live in the shared table.
struct UnknownLayout {
    /// var name -> index of `x.a1`; `x.c` is at `base + n`.
    base: BTreeMap<String, usize>,
    n: usize,
}

impl UnknownLayout {
    fn new(variables: &[String], n: usize) -> (Self, VarTable) {
        let mut base = BTreeMap::new();
        let mut names = Vec::new();
        for (vi, var) in variables.iter().enumerate() {
            base.insert(var.clone(), vi * (n + 1));
            for i in 1..=n {
                names.push(format!("{var}.a{i}"));
            }
            names.push(format!("{var}.c"));
        }
        (UnknownLayout { base, n }, VarTable::new(names))
    }
}

fn sym_evaluate_word(
    p: &MalcevPresentation,
    word: &Word,
    layout: &UnknownLayout,
    assignment: &BTreeMap<String, TorsionAssignment>,
) -> SymCoord {
    let mut acc = SymCoord::identity(p);
    for factor in &word.factors {
        let value = sym_evaluate_factor(p, factor, layout, assignment);
        acc = sym_multiply(p, &acc, &value);
    }
    acc
}

fn sym_evaluate_factor(
    p: &MalcevPresentation,
    factor: &Factor,
    layout: &UnknownLayout,
    assignment: &BTreeMap<String, TorsionAssignment>,
) -> SymCoord {
    match factor {
        Factor::Gen { kind, index, exp } => {
            let g = crate::malcev::generator_power(p, *kind, *index, *exp);
            SymCoord::from_concrete(p, &g)
        }
        Factor::Var { name, exp } => {
            let base = layout.base[name];
            let torsion = &assignment[name];
            let sym = SymCoord {
                a: (0..layout.n).map(|i| IntPoly::var(base + i)).collect(),
                b: torsion.b.clone(),
                c: IntPoly::var(base + layout.n),
                d: torsion.d.iter().map(|&x| IntPoly::constant(x as i64)).collect(),
            };
            sym_power(p, &sym, *exp)
        }
        Factor::Commutator { left, right, exp } => {
            let u = sym_evaluate_word(p, left, layout, assignment);
            let v = sym_evaluate_word(p, right, layout, assignment);
            let comm = sym_multiply(
                p,
                &sym_multiply(p, &sym_inverse(p, &u), &sym_inverse(p, &v)),
                &sym_multiply(p, &u, &v),
            );
            sym_power(p, &comm, *exp)
        }
        Factor::Grouped { inner, exp } => {
            let w = sym_evaluate_word(p, inner, layout, assignment);
            sym_power(p, &w, *exp)
        }
    }
}

/// Collects the normalized equation word symbolically under one fixed
/// torsion assignment, producing that branch's constraints. Branch survival
/// (the `b`-residue check) is the caller's job; this function always emits
/// the branch, folding violated `b`-residues into unsatisfiable constant
/// linear rows.
pub fn symbolic_collect(
    p: &MalcevPresentation,
    equation: &Equation,
    assignment: &BTreeMap<String, TorsionAssignment>,
) -> ConstraintBranch {
    let variables = equation.variables();
    let (layout, _) = UnknownLayout::new(&variables, p.num_a());
    let word = equation.normalized_word();
    let result = sym_evaluate_word(p, &word, &layout, assignment);

    let mut linear: Vec<IntPoly> = Vec::new();
    for row in &result.a {
        debug_assert!(row.degree() <= 1);
        linear.push(row.clone());
    }
    for &residue in &result.b {
        if residue != 0 {
            linear.push(IntPoly::constant(residue as i64));
        }
    }
    let congruences = result
        .d
        .iter()
        .zip(p.central_orders())
        .map(|(poly, &m)| (poly.reduce_mod(m), m))
        .collect();

    ConstraintBranch {
        assignment: assignment.clone(),
        linear,
        congruences,
        quadratic: result.c,
    }
}

/// Whether the branch's `b`-coordinate residues vanish.
fn b_residues_vanish(
    p: &MalcevPresentation,
    equation: &Equation,
    assignment: &BTreeMap<String, TorsionAssignment>,
) -> bool {
    let variables = equation.variables();
    let (layout, _) = UnknownLayout::new(&variables, p.num_a());
    let word = equation.normalized_word();
    sym_evaluate_word(p, &word, &layout, assignment)
        .b
        .iter()
        .all(|&x| x == 0)
}

/// Enumerates torsion assignments lexicographically and collects one
/// constraint branch per survivor. Assignments whose `b`-residues fail are
/// discarded, except that an equation with no unknowns keeps its single
/// branch (the violation shows up as an unsatisfiable constant row).
pub fn reduce_equation(
    p: &MalcevPresentation,
    equation: &Equation,
    branch_budget: u64,
) -> Result<ReducedEquation, ReduceError> {
    let variables = equation.variables();
    let (_, unknowns) = UnknownLayout::new(&variables, p.num_a());

    let per_var: u128 = p
        .torsion_orders()
        .iter()
        .chain(p.central_orders())
        .map(|&m| m as u128)
        .product();
    let count = per_var
        .checked_pow(variables.len() as u32)
        .unwrap_or(u128::MAX);
    if count > branch_budget as u128 {
        return Err(ReduceError::BranchBudget { count, budget: branch_budget });
    }

    let orders: Vec<u64> = p
        .torsion_orders()
        .iter()
        .chain(p.central_orders())
        .copied()
        .collect();
    let r = p.num_b();

    let mut branches = Vec::new();
    let mut odometer = vec![0u64; orders.len() * variables.len()];
    loop {
        let mut assignment = BTreeMap::new();
        for (vi, var) in variables.iter().enumerate() {
            let chunk = &odometer[vi * orders.len()..(vi + 1) * orders.len()];
            assignment.insert(
                var.clone(),
                TorsionAssignment { b: chunk[..r].to_vec(), d: chunk[r..].to_vec() },
            );
        }
        let keep = if variables.is_empty() {
            true
        } else {
            b_residues_vanish(p, equation, &assignment)
        };
        if keep {
            branches.push(symbolic_collect(p, equation, &assignment));
        }

        // Advance the odometer; the rightmost coordinate moves fastest, so
        // branches come out in lexicographic order.
        let mut pos = odometer.len();
        loop {
            if pos == 0 {
                return Ok(ReducedEquation { unknowns, variables, branches });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < orders[pos % orders.len()] {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// Converts an integer point over the reduced unknowns back into group
/// coordinates for each unknown.
pub fn point_to_coords(
    p: &MalcevPresentation,
    variables: &[String],
    assignment: &BTreeMap<String, TorsionAssignment>,
    point: &[i64],
) -> BTreeMap<String, MalcevCoord> {
    let n = p.num_a();
    let mut out = BTreeMap::new();
    for (vi, var) in variables.iter().enumerate() {
        let base = vi * (n + 1);
        let torsion = &assignment[var];
        out.insert(
            var.clone(),
            MalcevCoord {
                a: point[base..base + n].to_vec(),
                b: torsion.b.clone(),
                c: point[base + n],
                d: torsion.d.clone(),
            },
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::malcev::evaluate_word;
    use crate::poly::Monomial;
    use crate::presentation::test_groups;
    use crate::word::parse_equation;

    fn reduce(p: &MalcevPresentation, text: &str) -> ReducedEquation {
        let eq = parse_equation(text, p).unwrap();
        reduce_equation(p, &eq, 1_000_000).unwrap()
    }

    #[test]
    fn commutator_equation_gives_unit_quadratic() {
        // [a1, x] = c over the Heisenberg group: with x = (p, q, r) the
        // c-coordinate of [a1, x] * c^-1 is q - 1; the a-rows vanish.
        let p = test_groups::heisenberg();
        let red = reduce(&p, "[a1,x]*c^-1 = 1");
        assert_eq!(red.branches.len(), 1);
        let branch = &red.branches[0];
        assert!(branch.linear.iter().all(IntPoly::is_zero));
        assert!(branch.congruences.is_empty());
        let mut expected = IntPoly::var(1);
        expected.add_term(Monomial::One, -1);
        assert_eq!(branch.quadratic, expected);
        assert_eq!(red.unknowns.names, vec!["x.a1", "x.a2", "x.c"]);
    }

    #[test]
    fn square_equation_gives_linear_rows_and_quadratic() {
        let p = test_groups::heisenberg();
        let red = reduce(&p, "x^2 = a1");
        assert_eq!(red.branches.len(), 1);
        let branch = &red.branches[0];
        // Rows: 2p - 1 = 0 and 2q = 0.
        let rows: Vec<_> = branch
            .linear
            .iter()
            .map(|poly| poly.as_linear_row(3).unwrap())
            .collect();
        assert_eq!(rows[0], (vec![2, 0, 0], -1));
        assert_eq!(rows[1], (vec![0, 2, 0], 0));
        // The c-row is genuinely quadratic (2r - pq shape); its pointwise
        // agreement with evaluation is covered below.
        assert_eq!(branch.quadratic.degree(), 2);
        check_branch_semantics(&p, "x^2 = a1");
    }

    #[test]
    fn trivial_equation_reduces_to_zero_constraints() {
        let p = test_groups::heisenberg();
        let red = reduce(&p, "x*x^-1 = 1");
        assert_eq!(red.branches.len(), 1);
        let branch = &red.branches[0];
        assert!(branch.linear.iter().all(IntPoly::is_zero));
        assert!(branch.quadratic.is_zero());
    }

    #[test]
    fn torsion_assignments_split_branches() {
        // In the (inconsistent-on-purpose) order-2 torsion group, x^2 =
        // a1^2*c branches over x's b-coordinate.
        let p = test_groups::inconsistent_z2();
        let red = reduce(&p, "x^2 = a1^2*c");
        assert_eq!(red.branches.len(), 2);

        let b0 = &red.branches[0];
        assert_eq!(b0.assignment["x"].b, vec![0]);
        let rows0: Vec<_> =
            b0.linear.iter().filter(|r| !r.is_zero()).map(|r| r.as_linear_row(2).unwrap()).collect();
        assert_eq!(rows0, vec![(vec![2, 0], -2)]);
        // beta = 0: quadratic 2r - 1 = 0.
        let mut q0 = IntPoly::var(1).scale(2);
        q0.add_term(Monomial::One, -1);
        assert_eq!(b0.quadratic, q0);

        let b1 = &red.branches[1];
        assert_eq!(b1.assignment["x"].b, vec![1]);
        // beta = 1: quadratic 2r - p - 1 = 0.
        let mut q1 = IntPoly::var(1).scale(2);
        q1.add_term(Monomial::Lin(0), -1);
        q1.add_term(Monomial::One, -1);
        assert_eq!(b1.quadratic, q1);
    }

    #[test]
    fn heisenberg_always_has_one_branch() {
        let p = test_groups::heisenberg();
        for text in ["x = 1", "x*y = a1", "[x,y]*c^3 = 1"] {
            assert_eq!(reduce(&p, text).branches.len(), 1, "{text}");
        }
    }

    #[test]
    fn variable_free_false_equation_keeps_unsat_branch() {
        let p = test_groups::z2_torsion();
        let red = reduce(&p, "b1 = 1");
        assert_eq!(red.branches.len(), 1);
        let branch = &red.branches[0];
        // The b-residue 1 mod 2 lands as an unsatisfiable constant row.
        assert!(branch.linear.iter().any(|row| {
            row.degree() == 0 && !row.is_zero()
        }));
        assert!(branch.quadratic.is_zero());
    }

    #[test]
    fn violating_assignments_are_discarded() {
        // x * b1 = 1 forces x's torsion coordinate to be 1, not 0.
        let p = test_groups::z2_torsion();
        let red = reduce(&p, "x*b1 = 1");
        assert_eq!(red.branches.len(), 1);
        assert_eq!(red.branches[0].assignment["x"].b, vec![1]);
    }

    #[test]
    fn branch_budget_is_enforced() {
        let p = test_groups::two_torsion_mixed();
        let eq = parse_equation("x*y*z = 1", &p).unwrap();
        // (2 * 2)^3 = 64 branches > 10.
        let err = reduce_equation(&p, &eq, 10).unwrap_err();
        assert_eq!(err, ReduceError::BranchBudget { count: 64, budget: 10 });
    }

    /// Soundness and completeness of the collected constraints against
    /// direct coordinate evaluation over a small box.
    fn check_branch_semantics(p: &MalcevPresentation, text: &str) {
        let eq = parse_equation(text, p).unwrap();
        let red = reduce_equation(p, &eq, 1_000_000).unwrap();
        let word = eq.normalized_word();
        let n = p.num_a();
        let per_var = n + 1;
        let dims = red.variables.len() * per_var;

        // Walk all integer points with entries in [-2, 2].
        let mut point = vec![-2i64; dims];
        loop {
            for branch in &red.branches {
                let constraints_hold = branch
                    .linear
                    .iter()
                    .all(|row| row.eval(&point) == 0)
                    && branch
                        .congruences
                        .iter()
                        .all(|(poly, m)| poly.eval(&point).rem_euclid(*m as i64) == 0)
                    && branch.quadratic.eval(&point) == 0;
                let coords =
                    point_to_coords(p, &red.variables, &branch.assignment, &point);
                let actual = evaluate_word(p, &word, &coords).unwrap().is_identity();
                assert_eq!(
                    constraints_hold, actual,
                    "{text}: disagreement at {point:?} assignment {:?}",
                    branch.assignment
                );
            }
            let mut pos = dims;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                point[pos] += 1;
                if point[pos] <= 2 {
                    break;
                }
                point[pos] = -2;
            }
        }
    }

    #[test]
    fn collected_constraints_match_evaluation() {
        let h = test_groups::heisenberg();
        check_branch_semantics(&h, "[a1,x]*c^-1 = 1");
        check_branch_semantics(&h, "x^2 = a1");
        check_branch_semantics(&h, "x^2*a2^-2 = 1");

        let t = test_groups::two_torsion_mixed();
        check_branch_semantics(&t, "x^2 = b1");
        check_branch_semantics(&t, "[a1,x] = d1");
    }

    #[test]
    fn multi_variable_constraints_match_evaluation() {
        let h = test_groups::heisenberg();
        check_branch_semantics(&h, "[x,y] = c");
        let t = test_groups::two_b_torsion();
        check_branch_semantics(&t, "x*b2*x = b1");
    }
}
