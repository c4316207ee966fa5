//! Translations of quadratic Diophantine systems into equation systems over
//! free nilpotent groups, with solution lifting and projection.
//!
//! Writing a = a1, b = a2, c = [a,b]: a system of equations
//! alpha + sum_j beta_j x_j + sum_jk gamma_jk x_j x_k = 0 becomes, over a
//! two-step group, the equations
//!
//! ```text
//! [a,b]^alpha * prod_j [a,yp_j]^beta_j * prod_jk [y_j,yp_k]^gamma_jk = 1
//! ```
//!
//! plus, for each j, the three auxiliaries [a,y_j] = 1, [b,yp_j] = 1,
//! [b,y_j] = [yp_j,a] forcing y_j = a^r * (central), yp_j = b^r * (central)
//! with one shared exponent r. Over a p-step group with p >= 3 the same
//! coefficients attach to the weight-p commutators [R,b,b], [R,b,y_j],
//! [R,y_j,y_k] with R the left-normed commutator [a,b,...,b] of weight p-2,
//! and no auxiliaries are needed.
//!
//! Integer solutions lift by y_j = a^{x_j}, yp_j = b^{x_j} (two-step) or
//! y_j = b^{x_j} (higher step); two-step group solutions project back to
//! integers by reading the a-exponent of y_j.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::magnus::{
    magnus_eval_word, magnus_is_identity, FreeNilpotentSpec, MagnusError,
    TruncatedFreePoly,
};
use crate::word::{Equation, EquationSystem, Factor, GenKind, ParseError, Word};

/// One quadratic Diophantine equation
/// `alpha + sum_j beta[j]*x_j + sum_jk gamma[j][k]*x_j*x_k = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophEquation {
    #[serde(default)]
    pub alpha: i64,
    #[serde(default)]
    pub beta: Vec<i64>,
    #[serde(default)]
    pub gamma: Vec<Vec<i64>>,
}

impl DiophEquation {
    /// Left side value at `x`; the equation holds when this is zero.
    pub fn eval(&self, x: &[i64]) -> i128 {
        let mut total = self.alpha as i128;
        for (j, &b) in self.beta.iter().enumerate() {
            total += b as i128 * x[j] as i128;
        }
        for (j, row) in self.gamma.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                total += g as i128 * x[j] as i128 * x[k] as i128;
            }
        }
        total
    }
}

/// A finite system of quadratic Diophantine equations over x_1..x_n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophSystem {
    /// Number of unknowns n >= 1.
    pub variables: usize,
    pub equations: Vec<DiophEquation>,
}

impl DiophSystem {
    pub fn is_solution(&self, x: &[i64]) -> bool {
        self.equations.iter().all(|eq| eq.eval(x) == 0)
    }
}

/// Parses a JSON system: `{ "variables": n, "equations": [ { "alpha": ...,
/// "beta": [...], "gamma": [[...]] } ] }`. Missing coefficients default to
/// zero; coefficient lists shorter than n are padded.
pub fn parse_dioph_system(text: &str) -> Result<DiophSystem, ParseError> {
    let mut sys: DiophSystem = serde_json::from_str(text)
        .map_err(|e| ParseError::new(format!("invalid Diophantine system: {e}"), 0))?;
    let n = sys.variables;
    if n == 0 {
        return Err(ParseError::new("system needs at least one unknown", 0));
    }
    for (i, eq) in sys.equations.iter_mut().enumerate() {
        if eq.beta.len() > n || eq.gamma.len() > n || eq.gamma.iter().any(|r| r.len() > n)
        {
            return Err(ParseError::new(
                format!("equation {} has coefficients beyond unknown x{n}", i + 1),
                0,
            ));
        }
        eq.beta.resize(n, 0);
        eq.gamma.resize(n, Vec::new());
        for row in &mut eq.gamma {
            row.resize(n, 0);
        }
    }
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("higher-step encoding needs step >= 3, got {0}")]
    StepTooLow(usize),
    #[error("assignment fails auxiliary equation {0}")]
    AuxiliaryFailed(String),
    #[error("unknown {0} has an a-exponent outside the integer range")]
    ExponentOverflow(String),
    #[error(transparent)]
    Eval(#[from] MagnusError),
}

/// Which encoding a lifted assignment is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingTarget {
    TwoStep,
    HigherStep,
}

fn gen_a() -> Word {
    Word::new(vec![Factor::Gen { kind: GenKind::A, index: 1, exp: 1 }])
}

fn gen_b() -> Word {
    Word::new(vec![Factor::Gen { kind: GenKind::A, index: 2, exp: 1 }])
}

fn var(name: String) -> Word {
    Word::new(vec![Factor::Var { name, exp: 1 }])
}

fn y(j: usize) -> String {
    format!("y{}", j + 1)
}

fn yp(j: usize) -> String {
    format!("yp{}", j + 1)
}

/// `[left, right]^exp` as a one-factor word.
fn comm(left: Word, right: Word, exp: i64) -> Word {
    Word::new(vec![Factor::Commutator { left, right, exp }])
}

/// Left-normed `[args[0], args[1], ..., args[k-1]]^exp`.
fn nested_comm(mut args: Vec<Word>, exp: i64) -> Word {
    assert!(args.len() >= 2, "nested commutator needs two arguments");
    let last = args.pop().expect("nonempty argument list");
    let mut acc = args.remove(0);
    for mid in args {
        acc = comm(acc, mid, 1);
    }
    comm(acc, last, exp)
}

/// The three auxiliary equations for unknown index `j`.
fn auxiliary_equations(j: usize) -> [Equation; 3] {
    [
        Equation::new(comm(gen_a(), var(y(j)), 1), Word::identity()),
        Equation::new(comm(gen_b(), var(yp(j)), 1), Word::identity()),
        Equation::new(comm(gen_b(), var(y(j)), 1), comm(var(yp(j)), gen_a(), 1)),
    ]
}

/// Encodes the system over a two-step free nilpotent group of the given
/// rank: one main equation per input equation plus three auxiliaries per
/// unknown.
pub fn encode_two_step(sigma: &DiophSystem, rank: usize) -> EquationSystem {
    assert!(rank >= 2, "two-step encoding needs rank >= 2");
    let n = sigma.variables;
    let mut equations = Vec::new();
    for eq in &sigma.equations {
        let mut lhs = Word::identity();
        if eq.alpha != 0 {
            lhs = lhs.concat(&comm(gen_a(), gen_b(), eq.alpha));
        }
        for (j, &b) in eq.beta.iter().enumerate() {
            if b != 0 {
                lhs = lhs.concat(&comm(gen_a(), var(yp(j)), b));
            }
        }
        for (j, row) in eq.gamma.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                if g != 0 {
                    lhs = lhs.concat(&comm(var(y(j)), var(yp(k)), g));
                }
            }
        }
        equations.push(Equation::new(lhs, Word::identity()));
    }
    for j in 0..n {
        equations.extend(auxiliary_equations(j));
    }
    let variables = (0..n).flat_map(|j| [y(j), yp(j)]).collect();
    EquationSystem { equations, variables }
}

/// The base commutator R = [a,b,...,b] of weight `step - 2`; R = a when
/// step = 3.
fn base_commutator(step: usize) -> Word {
    if step == 3 {
        gen_a()
    } else {
        nested_comm(
            std::iter::once(gen_a())
                .chain(std::iter::repeat_n(gen_b(), step - 3))
                .collect(),
            1,
        )
    }
}

/// Encodes the system over a p-step free nilpotent group, p >= 3: the
/// coefficients attach to weight-p commutators and no auxiliaries are
/// needed.
pub fn encode_higher_step(
    sigma: &DiophSystem,
    spec: &FreeNilpotentSpec,
) -> Result<EquationSystem, EncodeError> {
    if spec.step < 3 {
        return Err(EncodeError::StepTooLow(spec.step));
    }
    let r = base_commutator(spec.step);
    let mut equations = Vec::new();
    for eq in &sigma.equations {
        let mut lhs = Word::identity();
        if eq.alpha != 0 {
            lhs = lhs.concat(&nested_comm(vec![r.clone(), gen_b(), gen_b()], eq.alpha));
        }
        for (j, &b) in eq.beta.iter().enumerate() {
            if b != 0 {
                lhs = lhs.concat(&nested_comm(vec![r.clone(), gen_b(), var(y(j))], b));
            }
        }
        for (j, row) in eq.gamma.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                if g != 0 {
                    lhs = lhs.concat(&nested_comm(
                        vec![r.clone(), var(y(j)), var(y(k))],
                        g,
                    ));
                }
            }
        }
        equations.push(Equation::new(lhs, Word::identity()));
    }
    let variables = (0..sigma.variables).map(y).collect();
    Ok(EquationSystem { equations, variables })
}

/// Lifts an integer solution to a group assignment: y_j = a^{x_j} and
/// yp_j = b^{x_j} for the two-step encoding, y_j = b^{x_j} for the higher
/// step.
pub fn lift_solution(
    x: &[i64],
    target: EncodingTarget,
    spec: &FreeNilpotentSpec,
) -> BTreeMap<String, TruncatedFreePoly> {
    let a = TruncatedFreePoly::generator(spec, 0);
    let b = TruncatedFreePoly::generator(spec, 1);
    let mut out = BTreeMap::new();
    for (j, &xj) in x.iter().enumerate() {
        match target {
            EncodingTarget::TwoStep => {
                out.insert(y(j), a.pow(xj));
                out.insert(yp(j), b.pow(xj));
            }
            EncodingTarget::HigherStep => {
                out.insert(y(j), b.pow(xj));
            }
        }
    }
    out
}

/// Reads an integer solution back from a two-step group assignment: checks
/// the auxiliary equations, then takes x_j = the a-exponent of y_j, i.e.
/// the X_1-coefficient of its series.
pub fn project_solution(
    assignment: &BTreeMap<String, TruncatedFreePoly>,
    sigma: &DiophSystem,
    spec: &FreeNilpotentSpec,
) -> Result<Vec<i64>, EncodeError> {
    for j in 0..sigma.variables {
        for aux in auxiliary_equations(j) {
            let word = aux.normalized_word();
            if !magnus_is_identity(&word, assignment, spec)? {
                return Err(EncodeError::AuxiliaryFailed(aux.to_string()));
            }
        }
    }
    let mut x = Vec::with_capacity(sigma.variables);
    for j in 0..sigma.variables {
        let name = y(j);
        let value = magnus_eval_word(&var(name.clone()), assignment, spec)?;
        let exponent = value.coeff(&[0]);
        x.push(
            i64::try_from(&exponent)
                .map_err(|_| EncodeError::ExponentOverflow(name))?,
        );
    }
    Ok(x)
}
