//! Integer linear systems: full solution lattices and infeasibility
//! certificates.
//!
//! Systems are solved by unimodular diagonalization (row and column
//! operations with tracked transforms), so the result is either the complete
//! solution set as an affine lattice or an integer row combination
//! witnessing infeasibility.

use serde::Serialize;

use crate::poly::IntPoly;

/// One equation `coeffs . y + constant = 0`.
pub type LinearRow = (Vec<i64>, i64);

/// The integer solution set of a linear system: `offset + sum c_i basis_i`
/// over integer `c_i`. Basis vectors are independent over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineLattice {
    pub offset: Vec<i64>,
    pub basis: Vec<Vec<i64>>,
}

impl AffineLattice {
    /// All of `Z^m`.
    pub fn full(m: usize) -> Self {
        let basis = (0..m)
            .map(|i| {
                let mut v = vec![0; m];
                v[i] = 1;
                v
            })
            .collect();
        AffineLattice { offset: vec![0; m], basis }
    }

    pub fn point(offset: Vec<i64>) -> Self {
        AffineLattice { offset, basis: Vec::new() }
    }

    /// Number of ambient coordinates.
    pub fn num_vars(&self) -> usize {
        self.offset.len()
    }

    /// Lattice dimension (number of free parameters).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether `point` lies on the lattice, decided by solving for the
    /// parameters.
    pub fn contains(&self, point: &[i64]) -> bool {
        assert_eq!(point.len(), self.num_vars());
        let rows: Vec<LinearRow> = (0..self.num_vars())
            .map(|i| {
                let coeffs: Vec<i64> = self.basis.iter().map(|v| v[i]).collect();
                (coeffs, self.offset[i] - point[i])
            })
            .collect();
        matches!(solve_linear_system(&rows, self.dim()), LinearOutcome::Solvable(_))
    }

    /// Each ambient coordinate as an affine polynomial in the lattice
    /// parameters, suitable for `IntPoly::substitute_affine`.
    pub fn substitution_polys(&self) -> Vec<IntPoly> {
        (0..self.num_vars())
            .map(|i| {
                let mut poly = IntPoly::constant(self.offset[i]);
                for (j, v) in self.basis.iter().enumerate() {
                    poly = poly.add(&IntPoly::var(j).scale(v[i]));
                }
                poly
            })
            .collect()
    }

    /// The lattice point for a given parameter vector.
    pub fn point_at(&self, params: &[i64]) -> Vec<i64> {
        assert_eq!(params.len(), self.dim());
        let mut out = self.offset.clone();
        for (c, v) in params.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

/// Infeasibility witness: an integer combination of the rows whose
/// coefficient vector vanishes mod `modulus` while the constant does not
/// (`modulus = 0` means exact vanishing with nonzero constant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdCertificate {
    pub rows: Vec<LinearRow>,
    pub multipliers: Vec<i64>,
    pub modulus: u64,
}

impl GcdCertificate {
    /// Re-verifies the certificate from scratch.
    pub fn check(&self) -> bool {
        if self.multipliers.len() != self.rows.len() {
            return false;
        }
        let width = self.rows.first().map_or(0, |(c, _)| c.len());
        let mut combo = vec![0i128; width];
        let mut konst = 0i128;
        for (&u, (coeffs, k)) in self.multipliers.iter().zip(&self.rows) {
            for (acc, &c) in combo.iter_mut().zip(coeffs) {
                *acc += u as i128 * c as i128;
            }
            konst += u as i128 * *k as i128;
        }
        let m = self.modulus as i128;
        if m == 0 {
            combo.iter().all(|&c| c == 0) && konst != 0
        } else {
            combo.iter().all(|&c| c % m == 0) && konst % m != 0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LinearOutcome {
    Solvable(AffineLattice),
    Infeasible(GcdCertificate),
}

/// Working state for unimodular diagonalization: `mat = u_t * A * v_t`
/// where `u_t`, `v_t` track the accumulated row and column operations.
struct Diag {
    mat: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
    rank: usize,
}

fn diagonalize(a: Vec<Vec<i128>>, n: usize) -> Diag {
    let m = a.len();
    let mut mat = a;
    let mut u: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();

    let mut t = 0;
    while t < m && t < n {
        // Move a minimal-magnitude nonzero entry of the trailing block to
        // the pivot; repeated remainder reduction terminates because the
        // pivot magnitude strictly decreases.
        let Some((pi, pj)) = min_nonzero(&mat, t) else { break };
        swap_rows(&mut mat, &mut u, t, pi);
        swap_cols(&mut mat, &mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in (t + 1)..m {
                if mat[i][t] != 0 {
                    let q = div_round(mat[i][t], mat[t][t]);
                    row_sub(&mut mat, &mut u, i, t, q);
                    if mat[i][t] != 0 {
                        swap_rows(&mut mat, &mut u, t, i);
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..n {
                if mat[t][j] != 0 {
                    let q = div_round(mat[t][j], mat[t][t]);
                    col_sub(&mut mat, &mut v, j, t, q);
                    if mat[t][j] != 0 {
                        swap_cols(&mut mat, &mut v, t, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        if mat[t][t] < 0 {
            for x in &mut mat[t] {
                *x = -*x;
            }
            for x in &mut u[t] {
                *x = -*x;
            }
        }
        t += 1;
    }
    Diag { mat, u, v, rank: t }
}

fn min_nonzero(mat: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in mat.iter().enumerate().skip(t) {
        for (j, &x) in row.iter().enumerate().skip(t) {
            if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < mat[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Quotient minimizing |a - q*b|.
fn div_round(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + r.signum() * b.signum()
    } else {
        q
    }
}

fn swap_rows(mat: &mut [Vec<i128>], u: &mut [Vec<i128>], a: usize, b: usize) {
    if a != b {
        mat.swap(a, b);
        u.swap(a, b);
    }
}

fn swap_cols(mat: &mut [Vec<i128>], v: &mut [Vec<i128>], a: usize, b: usize) {
    if a != b {
        for row in mat.iter_mut() {
            row.swap(a, b);
        }
        v.swap(a, b);
    }
}

/// row_i -= q * row_t
fn row_sub(mat: &mut [Vec<i128>], u: &mut [Vec<i128>], i: usize, t: usize, q: i128) {
    for j in 0..mat[t].len() {
        let x = mat[t][j];
        mat[i][j] -= q * x;
    }
    for j in 0..u[t].len() {
        let x = u[t][j];
        u[i][j] -= q * x;
    }
}

/// col_j -= q * col_t (v is stored as columns, i.e. v[j] is column j of V).
fn col_sub(mat: &mut [Vec<i128>], v: &mut [Vec<i128>], j: usize, t: usize, q: i128) {
    for row in mat.iter_mut() {
        row[j] -= q * row[t];
    }
    for idx in 0..v[t].len() {
        let x = v[t][idx];
        v[j][idx] -= q * x;
    }
}

fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("linear solver coefficient exceeds 64 bits")
}

/// Solves `coeffs . y + constant = 0` for all rows simultaneously.
pub fn solve_linear_system(rows: &[LinearRow], num_vars: usize) -> LinearOutcome {
    let m = rows.len();
    let a: Vec<Vec<i128>> = rows
        .iter()
        .map(|(coeffs, _)| {
            assert_eq!(coeffs.len(), num_vars, "row width mismatch");
            coeffs.iter().map(|&c| c as i128).collect()
        })
        .collect();
    let b: Vec<i128> = rows.iter().map(|(_, k)| -(*k as i128)).collect();

    let diag = diagonalize(a, num_vars);

    // With D = U A V, solve D z = U b; y = V z.
    let ub: Vec<i128> = diag
        .u
        .iter()
        .map(|row| row.iter().zip(&b).map(|(&u, &x)| u * x).sum())
        .collect();

    let mut z = vec![0i128; num_vars];
    for t in 0..m {
        if t < diag.rank {
            let d = diag.mat[t][t];
            if ub[t] % d != 0 {
                return LinearOutcome::Infeasible(GcdCertificate {
                    rows: rows.to_vec(),
                    multipliers: diag.u[t].iter().map(|&x| narrow(x)).collect(),
                    modulus: narrow(d) as u64,
                });
            }
            z[t] = ub[t] / d;
        } else if ub[t] != 0 {
            return LinearOutcome::Infeasible(GcdCertificate {
                rows: rows.to_vec(),
                multipliers: diag.u[t].iter().map(|&x| narrow(x)).collect(),
                modulus: 0,
            });
        }
    }

    // y = V z with free parameters in columns rank..num_vars.
    let offset: Vec<i64> = (0..num_vars)
        .map(|i| narrow((0..num_vars).map(|j| diag.v[j][i] * z[j]).sum::<i128>()))
        .collect();
    let basis: Vec<Vec<i64>> = (diag.rank..num_vars)
        .map(|j| diag.v[j].iter().map(|&x| narrow(x)).collect())
        .collect();
    LinearOutcome::Solvable(AffineLattice { offset, basis })
}

/// Independent basis of the lattice generated by `vectors`, via integer row
/// elimination. Zero vectors and dependencies drop out.
fn row_lattice_basis(mut vectors: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    vectors.retain(|v| v.iter().any(|&x| x != 0));
    if vectors.is_empty() {
        return vectors;
    }
    let width = vectors[0].len();
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut head = 0;
    for col in 0..width {
        loop {
            let mut pivot: Option<usize> = None;
            for (i, row) in rows.iter().enumerate().skip(head) {
                if row[col] != 0
                    && pivot.is_none_or(|p| row[col].abs() < rows[p][col].abs())
                {
                    pivot = Some(i);
                }
            }
            let Some(p) = pivot else { break };
            rows.swap(head, p);
            let mut dirty = false;
            for i in (head + 1)..rows.len() {
                if rows[i][col] != 0 {
                    let q = div_round(rows[i][col], rows[head][col]);
                    for j in 0..width {
                        let x = rows[head][j];
                        rows[i][j] -= q * x;
                    }
                    if rows[i][col] != 0 {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                head += 1;
                break;
            }
        }
        if head == rows.len() {
            break;
        }
    }
    rows.truncate(head);
    rows.retain(|v| v.iter().any(|&x| x != 0));
    rows.into_iter()
        .map(|v| v.into_iter().map(narrow).collect())
        .collect()
}

/// Intersects the lattice with the residue class `y ≡ rep (mod modulus)`,
/// by solving `offset + sum c_i basis_i ≡ rep` for the parameters and
/// mapping the parameter sub-lattice back to ambient space. The error
/// certificate (over parameter-and-wrap-count unknowns) witnesses that the
/// class misses the lattice.
pub fn restrict_to_class(
    lat: &AffineLattice,
    rep: &[i64],
    modulus: u64,
) -> Result<AffineLattice, GcdCertificate> {
    let m = lat.num_vars();
    let d = lat.dim();
    assert_eq!(rep.len(), m);
    assert!(modulus > 0);

    // Unknowns: d lattice parameters, then m wrap counts.
    let rows: Vec<LinearRow> = (0..m)
        .map(|i| {
            let mut coeffs = Vec::with_capacity(d + m);
            for v in &lat.basis {
                coeffs.push(v[i]);
            }
            for j in 0..m {
                coeffs.push(if j == i { modulus as i64 } else { 0 });
            }
            (coeffs, lat.offset[i] - rep[i])
        })
        .collect();

    match solve_linear_system(&rows, d + m) {
        LinearOutcome::Infeasible(cert) => Err(cert),
        LinearOutcome::Solvable(params) => {
            let offset = lat.point_at(&params.offset[..d]);
            let generators: Vec<Vec<i64>> = params
                .basis
                .iter()
                .map(|pv| {
                    let mut y = vec![0i64; m];
                    for (c, v) in pv[..d].iter().zip(&lat.basis) {
                        for (o, x) in y.iter_mut().zip(v) {
                            *o += c * x;
                        }
                    }
                    y
                })
                .collect();
            Ok(AffineLattice { offset, basis: row_lattice_basis(generators) })
        }
    }
}

/// Rewrites `q` in the lattice's parameters (degree stays <= 2 because the
/// substitution is affine).
pub fn substitute_lattice(lat: &AffineLattice, q: &IntPoly) -> IntPoly {
    q.substitute_affine(&lat.substitution_polys())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;

    fn solutions_in_box(rows: &[LinearRow], num_vars: usize, bound: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut point = vec![-bound; num_vars];
        loop {
            if rows.iter().all(|(coeffs, k)| {
                coeffs.iter().zip(&point).map(|(c, y)| c * y).sum::<i64>() + k == 0
            }) {
                out.push(point.clone());
            }
            let mut pos = num_vars;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                point[pos] += 1;
                if point[pos] <= bound {
                    break;
                }
                point[pos] = -bound;
            }
        }
    }

    fn lattice_points_in_box(lat: &AffineLattice, bound: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut point = vec![-bound; lat.num_vars()];
        loop {
            if lat.contains(&point) {
                out.push(point.clone());
            }
            let mut pos = lat.num_vars();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                point[pos] += 1;
                if point[pos] <= bound {
                    break;
                }
                point[pos] = -bound;
            }
        }
    }

    #[test]
    fn odd_constant_is_infeasible() {
        // 2y - 1 = 0 has no integer solution.
        let rows = vec![(vec![2], -1)];
        match solve_linear_system(&rows, 1) {
            LinearOutcome::Infeasible(cert) => {
                assert_eq!(cert.modulus, 2);
                assert!(cert.check());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn sum_equation_parametrizes_a_line() {
        // y1 + y2 - 2 = 0.
        let rows = vec![(vec![1, 1], -2)];
        let LinearOutcome::Solvable(lat) = solve_linear_system(&rows, 2) else {
            panic!("expected solvable");
        };
        assert_eq!(lat.dim(), 1);
        assert_eq!(lat.offset[0] + lat.offset[1], 2);
        assert_eq!(lattice_points_in_box(&lat, 5), solutions_in_box(&rows, 2, 5));
        assert!(lat.contains(&[1, 1]));
        assert!(!lat.contains(&[1, 2]));
    }

    #[test]
    fn empty_system_is_all_of_z() {
        let LinearOutcome::Solvable(lat) = solve_linear_system(&[], 2) else {
            panic!("expected solvable");
        };
        assert_eq!(lat, AffineLattice::full(2));
    }

    #[test]
    fn pinned_values_give_a_point() {
        let rows = vec![(vec![1, 0], -3), (vec![0, 1], 1)];
        let LinearOutcome::Solvable(lat) = solve_linear_system(&rows, 2) else {
            panic!("expected solvable");
        };
        assert_eq!(lat, AffineLattice::point(vec![3, -1]));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let rows = vec![(vec![1], 0), (vec![1], -1)];
        match solve_linear_system(&rows, 1) {
            LinearOutcome::Infeasible(cert) => {
                assert_eq!(cert.modulus, 0);
                assert!(cert.check());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn random_small_systems_match_brute_force() {
        // Deterministic pseudo-random sweep; keeps the test hermetic.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let num_vars = (next() % 3 + 1) as usize;
            let num_rows = (next() % 3) as usize;
            let rows: Vec<LinearRow> = (0..num_rows)
                .map(|_| {
                    let coeffs: Vec<i64> =
                        (0..num_vars).map(|_| (next() % 7) as i64 - 3).collect();
                    (coeffs, (next() % 7) as i64 - 3)
                })
                .collect();
            let brute = solutions_in_box(&rows, num_vars, 6);
            match solve_linear_system(&rows, num_vars) {
                LinearOutcome::Solvable(lat) => {
                    assert_eq!(lattice_points_in_box(&lat, 6), brute, "{rows:?}");
                    // Forward check: offset and basis satisfy the rows.
                    for (coeffs, k) in &rows {
                        let at_offset: i64 = coeffs
                            .iter()
                            .zip(&lat.offset)
                            .map(|(c, y)| c * y)
                            .sum();
                        assert_eq!(at_offset + k, 0);
                        for v in &lat.basis {
                            let hom: i64 = coeffs.iter().zip(v).map(|(c, y)| c * y).sum();
                            assert_eq!(hom, 0);
                        }
                    }
                }
                LinearOutcome::Infeasible(cert) => {
                    assert!(brute.is_empty(), "{rows:?}");
                    assert!(cert.check(), "{rows:?}");
                }
            }
        }
    }

    #[test]
    fn class_restriction_matches_brute_force() {
        // y1 + y2 = 2 intersected with y ≡ (0,0) mod 2.
        let rows = vec![(vec![1, 1], -2)];
        let LinearOutcome::Solvable(lat) = solve_linear_system(&rows, 2) else {
            panic!("expected solvable");
        };
        let restricted = restrict_to_class(&lat, &[0, 0], 2).unwrap();
        let mut expected = Vec::new();
        for p in lattice_points_in_box(&lat, 6) {
            if p.iter().all(|x| x.rem_euclid(2) == 0) {
                expected.push(p);
            }
        }
        assert_eq!(lattice_points_in_box(&restricted, 6), expected);
    }

    #[test]
    fn class_restriction_of_full_space_is_the_class() {
        let lat = AffineLattice::full(2);
        let restricted = restrict_to_class(&lat, &[1, 2], 3).unwrap();
        for p in lattice_points_in_box(&restricted, 7) {
            assert_eq!(p[0].rem_euclid(3), 1);
            assert_eq!(p[1].rem_euclid(3), 2);
        }
        assert_eq!(restricted.dim(), 2);
        assert!(restricted.contains(&[1, 2]));
        assert!(restricted.contains(&[4, -1]));
        assert!(!restricted.contains(&[2, 2]));
    }

    #[test]
    fn class_restriction_can_be_empty() {
        let lat = AffineLattice::point(vec![3]);
        let cert = restrict_to_class(&lat, &[0], 2).unwrap_err();
        assert!(cert.check());
        assert_eq!(restrict_to_class(&lat, &[1], 2), Ok(lat.clone()));
    }

    #[test]
    fn substitution_collapses_product_minus_one() {
        // L = {(1+t, 1-t)}, Q = y1*y2 - 1 -> -t^2.
        let lat = AffineLattice { offset: vec![1, 1], basis: vec![vec![1, -1]] };
        let mut q = IntPoly::zero();
        q.add_term(Monomial::Quad(0, 1), 1);
        q.add_term(Monomial::One, -1);
        let sub = substitute_lattice(&lat, &q);
        let mut expected = IntPoly::zero();
        expected.add_term(Monomial::Quad(0, 0), -1);
        assert_eq!(sub, expected);
    }

    #[test]
    fn substitution_through_full_lattice_is_identity() {
        let lat = AffineLattice::full(3);
        let mut q = IntPoly::zero();
        q.add_term(Monomial::Quad(0, 2), 2);
        q.add_term(Monomial::Lin(1), -5);
        q.add_term(Monomial::One, 7);
        assert_eq!(substitute_lattice(&lat, &q), q);
    }

    #[test]
    fn substitution_at_a_point_evaluates() {
        let lat = AffineLattice::point(vec![3]);
        let mut q = IntPoly::zero();
        q.add_term(Monomial::Quad(0, 0), 1);
        q.add_term(Monomial::One, -9);
        assert_eq!(substitute_lattice(&lat, &q), IntPoly::zero());
    }

    #[test]
    fn generator_reduction_drops_dependencies() {
        let basis = row_lattice_basis(vec![vec![2, 0], vec![4, 0], vec![0, 0]]);
        assert_eq!(basis, vec![vec![2, 0]]);
        let basis = row_lattice_basis(vec![vec![2, 2], vec![3, 3]]);
        assert_eq!(basis, vec![vec![1, 1]]);
    }
}
