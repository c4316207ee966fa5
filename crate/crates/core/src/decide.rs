//! Decision pipeline for single group equations, with the mixed integer
//! constraint pipeline it rests on.
//!
//! Verdicts are three-valued. Sat always carries a witness that has been
//! re-verified before returning; Unsat always carries a certificate that
//! can be rechecked from scratch via [`Certificate::check`]; Unknown
//! reports the search bound that was actually exhausted.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::config::SolverConfig;
use crate::congruence::enumerate_congruence_classes;
use crate::linear::{
    restrict_to_class, solve_linear_system, substitute_lattice, GcdCertificate,
    LinearOutcome, LinearRow,
};
use crate::malcev::{evaluate_word, MalcevCoord};
use crate::poly::IntPoly;
use crate::presentation::MalcevPresentation;
use crate::quadratic::{decide_quadratic, definite_radius, modular_unsat, no_zeros_in_cube};
use crate::reduce::{point_to_coords, reduce_equation};
use crate::word::Equation;

/// A satisfying assignment: integer points for constraint systems, group
/// elements (by variable name) for group equations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Witness {
    Integers(Vec<i64>),
    Group(BTreeMap<String, MalcevCoord>),
}

/// Machine-checkable refutation. Leaf certificates embed what they refute,
/// so `check` needs no outside context; the aggregate variant attests each
/// listed case, while case coverage itself is the pipeline's contract
/// (exercised by the oracle-agreement tests).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// An integer row combination with no solution (see [`GcdCertificate`]).
    GcdFailure(GcdCertificate),
    /// The congruence system has no residue classes mod `modulus` at all.
    EmptyCongruence {
        modulus: u64,
        congruences: Vec<(IntPoly, u64)>,
    },
    /// `poly ≡ 0 (mod modulus)` has no solution.
    ModularObstruction { modulus: u64, poly: IntPoly },
    /// `poly` has no zeros outside the cube of this radius (definite
    /// quadratic part, or univariate root bound), and none inside either.
    DefiniteExhaustion { bound: u64, poly: IntPoly },
    /// Every torsion branch or residue class is separately refuted.
    AllBranchesUnsat { branches: Vec<Certificate> },
}

impl Certificate {
    /// Re-verifies the certificate by recomputation.
    pub fn check(&self) -> bool {
        match self {
            Certificate::GcdFailure(cert) => cert.check(),
            Certificate::EmptyCongruence { modulus, congruences } => {
                let mut lcm: u64 = 1;
                for &(_, m) in congruences {
                    if m == 0 {
                        return false;
                    }
                    lcm = num_integer::lcm(lcm, m);
                }
                if lcm != *modulus {
                    return false;
                }
                let num_vars = congruences
                    .iter()
                    .flat_map(|(p, _)| p.used_vars())
                    .max()
                    .map_or(0, |v| v + 1);
                match enumerate_congruence_classes(congruences, num_vars, u64::MAX) {
                    Ok(set) => set.classes.is_empty(),
                    Err(_) => false,
                }
            }
            Certificate::ModularObstruction { modulus, poly } => {
                *modulus > 1 && modular_unsat(poly, *modulus)
            }
            Certificate::DefiniteExhaustion { bound, poly } => {
                definite_radius(poly).is_some_and(|r| r <= *bound)
                    && no_zeros_in_cube(poly, *bound)
            }
            Certificate::AllBranchesUnsat { branches } => {
                branches.iter().all(Certificate::check)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecisionResult {
    Sat(Witness),
    Unsat(Certificate),
    Unknown {
        search_bound: u64,
        reason: Option<String>,
    },
}

impl DecisionResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, DecisionResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, DecisionResult::Unsat(_))
    }
}

/// A conjunction of linear rows, polynomial congruences, and one quadratic,
/// over a shared integer unknown vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MixedSystem {
    pub num_vars: usize,
    pub linear: Vec<LinearRow>,
    pub congruences: Vec<(IntPoly, u64)>,
    pub quadratic: IntPoly,
}

impl MixedSystem {
    pub fn satisfied_by(&self, point: &[i64]) -> bool {
        self.linear.iter().all(|(coeffs, k)| {
            coeffs
                .iter()
                .zip(point)
                .map(|(&c, &y)| c as i128 * y as i128)
                .sum::<i128>()
                + *k as i128
                == 0
        }) && self
            .congruences
            .iter()
            .all(|(poly, m)| poly.eval_mod(point, *m) == 0)
            && self.quadratic.eval(point) == 0
    }
}

fn collapse(mut leafs: Vec<Certificate>) -> Certificate {
    if leafs.len() == 1 {
        leafs.pop().unwrap()
    } else {
        Certificate::AllBranchesUnsat { branches: leafs }
    }
}

/// Decides a mixed system: linear stage, residue classes, then per class a
/// lattice restriction and the quadratic backend.
pub fn decide_mixed_system(sys: &MixedSystem, cfg: &SolverConfig) -> DecisionResult {
    let lat = match solve_linear_system(&sys.linear, sys.num_vars) {
        LinearOutcome::Infeasible(cert) => {
            return DecisionResult::Unsat(Certificate::GcdFailure(cert));
        }
        LinearOutcome::Solvable(lat) => lat,
    };

    let classes = match enumerate_congruence_classes(
        &sys.congruences,
        sys.num_vars,
        cfg.residue_budget,
    ) {
        Ok(classes) => classes,
        Err(err) => {
            return DecisionResult::Unknown {
                search_bound: 0,
                reason: Some(err.to_string()),
            };
        }
    };
    if classes.classes.is_empty() {
        return DecisionResult::Unsat(Certificate::EmptyCongruence {
            modulus: classes.modulus,
            congruences: sys.congruences.clone(),
        });
    }

    let mut leafs = Vec::new();
    let mut unknown: Option<u64> = None;
    for class in &classes.classes {
        let restricted = match restrict_to_class(&lat, class, classes.modulus) {
            Err(cert) => {
                leafs.push(Certificate::GcdFailure(cert));
                continue;
            }
            Ok(restricted) => restricted,
        };
        let qsub = substitute_lattice(&restricted, &sys.quadratic);
        match decide_quadratic(&qsub, restricted.dim(), cfg) {
            DecisionResult::Sat(Witness::Integers(params)) => {
                let point = restricted.point_at(&params);
                assert!(sys.satisfied_by(&point), "witness failed re-verification");
                return DecisionResult::Sat(Witness::Integers(point));
            }
            DecisionResult::Sat(_) => unreachable!("integer witness expected"),
            DecisionResult::Unsat(cert) => leafs.push(cert),
            DecisionResult::Unknown { search_bound, .. } => {
                unknown = Some(unknown.map_or(search_bound, |b| b.min(search_bound)));
            }
        }
    }
    match unknown {
        Some(search_bound) => DecisionResult::Unknown { search_bound, reason: None },
        None => DecisionResult::Unsat(collapse(leafs)),
    }
}

/// Decides a single group equation. Torsion branches are reduced to mixed
/// systems; a Sat verdict reconstructs the group assignment and re-verifies
/// it against the equation word before returning.
pub fn decide_equation(
    eq: &Equation,
    p: &MalcevPresentation,
    cfg: &SolverConfig,
) -> DecisionResult {
    let red = match reduce_equation(p, eq, cfg.branch_budget) {
        Ok(red) => red,
        Err(err) => {
            return DecisionResult::Unknown {
                search_bound: 0,
                reason: Some(err.to_string()),
            };
        }
    };
    let num_unknowns = red.unknowns.names.len();
    let word = eq.normalized_word();

    let mut leafs = Vec::new();
    let mut unknown: Option<u64> = None;
    for branch in &red.branches {
        let sys = MixedSystem {
            num_vars: num_unknowns,
            linear: branch
                .linear
                .iter()
                .map(|poly| poly.as_linear_row(num_unknowns).expect("linear row"))
                .collect(),
            congruences: branch.congruences.clone(),
            quadratic: branch.quadratic.clone(),
        };
        match decide_mixed_system(&sys, cfg) {
            DecisionResult::Sat(Witness::Integers(point)) => {
                let coords = point_to_coords(p, &red.variables, &branch.assignment, &point);
                let value = evaluate_word(p, &word, &coords)
                    .expect("witness coordinates evaluate");
                assert!(value.is_identity(), "witness failed re-verification");
                return DecisionResult::Sat(Witness::Group(coords));
            }
            DecisionResult::Sat(_) => unreachable!("integer witness expected"),
            DecisionResult::Unsat(cert) => leafs.push(cert),
            DecisionResult::Unknown { search_bound, .. } => {
                unknown = Some(unknown.map_or(search_bound, |b| b.min(search_bound)));
            }
        }
    }
    match unknown {
        Some(search_bound) => DecisionResult::Unknown { search_bound, reason: None },
        None => DecisionResult::Unsat(match leafs.len() {
            0 => Certificate::AllBranchesUnsat { branches: Vec::new() },
            _ => collapse(leafs),
        }),
    }
}
