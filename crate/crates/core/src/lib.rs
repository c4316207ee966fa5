//! Equation solving over two-step nilpotent groups whose commutator subgroup
//! has a single infinite cyclic factor.
//!
//! The crate is organized as a pipeline:
//!
//! * [`word`]: the input language, with words, equations, and systems over
//!   a group's generators and a set of unknowns.
//! * [`presentation`]: group descriptions (generator counts, torsion orders,
//!   structure constants) with a consistency checker.
//! * [`malcev`]: coordinate arithmetic; every group element is a tuple of
//!   integers, multiplied by an explicit polynomial law.
//! * [`collect`]: an independent normal-form oracle that rewrites letter
//!   strings directly from the group relations; it certifies [`malcev`].
//! * [`poly`]: small integer polynomials of degree at most two.
//! * [`reduce`]: turns one group equation into finitely many branches of
//!   integer constraints (linear rows, congruences, one quadratic).
//! * [`linear`], [`congruence`], [`quadratic`], [`decide`]: the integer
//!   constraint solvers and the end-to-end decision pipeline.
//! * [`magnus`]: arithmetic in free nilpotent groups of any step via
//!   truncated free power series; used as a second, independent oracle.
//! * [`search`]: brute-force solution search over coordinate boxes.
//! * [`encode`]: translations of quadratic Diophantine systems into
//!   equation systems over free nilpotent groups, with solution lifting
//!   and projection.

pub mod collect;
pub mod config;
pub mod congruence;
pub mod decide;
pub mod encode;
pub mod linear;
pub mod magnus;
pub mod malcev;
pub mod poly;
pub mod presentation;
pub mod quadratic;
pub mod reduce;
pub mod search;
pub mod word;

pub use config::SolverConfig;
pub use decide::{decide_equation, DecisionResult};
pub use malcev::MalcevCoord;
pub use presentation::MalcevPresentation;
pub use word::{Equation, EquationSystem, Factor, Word};
