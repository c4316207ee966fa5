//! Brute-force solution search over boxes of normal-form coordinates.
//!
//! Every unknown ranges over coordinates with free entries (a and c) in
//! [-bound, bound] and torsion entries over their full residue ranges. The
//! joint space is visited in increasing max-norm of the free entries, and
//! within a shell in lexicographic order with each free entry ordered
//! 0, 1, -1, 2, -2, ...; the first satisfying assignment wins, so results
//! are deterministic.

use std::collections::BTreeMap;
use thiserror::Error;

use crate::malcev::{evaluate_word, MalcevCoord};
use crate::presentation::MalcevPresentation;
use crate::word::{EquationSystem, Word};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search space of {states} assignments exceeds the budget of {budget}")]
    Budget { states: u128, budget: u128 },
}

/// Ceiling on assignments visited by [`bounded_search`] unless the caller
/// picks a different budget.
pub const DEFAULT_STATE_BUDGET: u128 = 100_000_000;

/// One coordinate slot of the joint assignment vector.
#[derive(Clone, Copy)]
enum Slot {
    /// Unbounded coordinate, searched over [-r, r].
    Free,
    /// Torsion coordinate with the given order, always fully enumerated.
    Torsion(u64),
}

/// Exhaustively searches assignments of the system's unknowns and returns
/// the first one satisfying every equation, or None when the box holds no
/// solution.
pub fn bounded_search(
    system: &EquationSystem,
    p: &MalcevPresentation,
    bound: u64,
    budget: u128,
) -> Result<Option<BTreeMap<String, MalcevCoord>>, SearchError> {
    let vars = &system.variables;
    let per_var: Vec<Slot> = (0..p.num_a())
        .map(|_| Slot::Free)
        .chain(p.torsion_orders().iter().map(|&o| Slot::Torsion(o)))
        .chain(std::iter::once(Slot::Free))
        .chain(p.central_orders().iter().map(|&o| Slot::Torsion(o)))
        .collect();
    let slots: Vec<Slot> = per_var
        .iter()
        .copied()
        .cycle()
        .take(per_var.len() * vars.len())
        .collect();

    let mut states: Option<u128> = Some(1);
    for slot in &slots {
        let count = match slot {
            Slot::Free => 2 * bound as u128 + 1,
            Slot::Torsion(o) => *o as u128,
        };
        states = states.and_then(|s| s.checked_mul(count));
    }
    match states {
        Some(states) if states <= budget => {}
        _ => {
            return Err(SearchError::Budget {
                states: states.unwrap_or(u128::MAX),
                budget,
            })
        }
    }

    let words: Vec<Word> = system.equations.iter().map(|eq| eq.normalized_word()).collect();
    let mut assignment: BTreeMap<String, MalcevCoord> = vars
        .iter()
        .map(|v| (v.clone(), MalcevCoord::identity(p)))
        .collect();

    let free_count = slots.iter().filter(|s| matches!(s, Slot::Free)).count();
    let mut values = vec![0i64; slots.len()];
    for radius in 0..=bound {
        // Index vector over per-slot value lists; free slots use the ranked
        // order 0, 1, -1, ..., radius, -radius.
        let sizes: Vec<usize> = slots
            .iter()
            .map(|slot| match slot {
                Slot::Free => 2 * radius as usize + 1,
                Slot::Torsion(o) => *o as usize,
            })
            .collect();
        let mut idx = vec![0usize; slots.len()];
        'tuples: loop {
            let mut touched = radius == 0;
            for (k, slot) in slots.iter().enumerate() {
                let v = match slot {
                    Slot::Free => ranked_value(idx[k]),
                    Slot::Torsion(_) => idx[k] as i64,
                };
                values[k] = v;
                if matches!(slot, Slot::Free) && v.unsigned_abs() == radius {
                    touched = true;
                }
            }
            if touched {
                write_assignment(&values, &per_var, vars, p, &mut assignment);
                if words.iter().all(|w| {
                    evaluate_word(p, w, &assignment)
                        .expect("search assigns every unknown")
                        .is_identity()
                }) {
                    return Ok(Some(assignment));
                }
            }
            // Advance the odometer, last slot fastest.
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    continue 'tuples;
                }
                idx[k] = 0;
            }
            break;
        }
        if free_count == 0 {
            // Larger shells only re-enumerate torsion values.
            break;
        }
    }
    Ok(None)
}

/// The k-th value in the magnitude-then-sign order 0, 1, -1, 2, -2, ...
fn ranked_value(k: usize) -> i64 {
    let half = k.div_ceil(2) as i64;
    if k % 2 == 1 {
        half
    } else {
        -half
    }
}

fn write_assignment(
    values: &[i64],
    per_var: &[Slot],
    vars: &[String],
    p: &MalcevPresentation,
    assignment: &mut BTreeMap<String, MalcevCoord>,
) {
    let n = p.num_a();
    let r = p.num_b();
    for (v, chunk) in vars.iter().zip(values.chunks(per_var.len())) {
        let coord = assignment.get_mut(v).expect("assignment covers all unknowns");
        coord.a.copy_from_slice(&chunk[..n]);
        for (b, &x) in coord.b.iter_mut().zip(&chunk[n..n + r]) {
            *b = x as u64;
        }
        coord.c = chunk[n + r];
        for (d, &x) in coord.d.iter_mut().zip(&chunk[n + r + 1..]) {
            *d = x as u64;
        }
    }
}
