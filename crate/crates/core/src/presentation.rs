//! Group presentations: generator counts, torsion orders, and structure
//! constants.
//!
//! A group is described by:
//!
//! * `n` infinite-order generators `a1..an`,
//! * torsion generators `b1..br` with orders `l = [l1..lr]` (each >= 2) in
//!   the abelianization,
//! * one infinite-order central generator `c`,
//! * central torsion generators `d1..ds` with orders `k = [k1..ks]`,
//! * commutator entries `[g, h] = c^e * d1^e1 * ...` for generator pairs
//!   `(a_i, a_j)` with `i < j`, `(b_i, b_j)` with `i < j`, and `(a_i, b_j)`,
//! * power entries `b_i^{l_i} = c^e * d1^e1 * ...`.
//!
//! Omitted commutator and power entries default to the identity.
//!
//! Two interchangeable text forms are supported: a line-based form
//!
//! ```text
//! # Discrete Heisenberg group
//! n = 2
//! l = []
//! k = []
//! [a1, a2] = c
//! ```
//!
//! and a JSON form (detected by a leading `{`):
//!
//! ```text
//! { "n": 2, "l": [], "k": [],
//!   "comm": [ { "pair": ["a1", "a2"], "c": 1, "d": [] } ],
//!   "pow": [] }
//! ```

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::word::{classify_ident, GenKind, ParseError};

/// A generator that can appear on the left side of a commutator entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gen {
    /// `a<i>`, 1-based.
    A(usize),
    /// `b<i>`, 1-based.
    B(usize),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::A(i) => write!(f, "a{i}"),
            Gen::B(i) => write!(f, "b{i}"),
        }
    }
}

/// Central value `c^c_exp * d1^{d_exps[0]} * ...` attached to a commutator
/// or power entry.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct CentralValue {
    pub c_exp: i64,
    /// One exponent per `d` generator; entries are kept reduced mod `k_t`.
    pub d_exps: Vec<i64>,
}

impl CentralValue {
    pub fn is_trivial(&self) -> bool {
        self.c_exp == 0 && self.d_exps.iter().all(|&e| e == 0)
    }
}

/// A validated-shape presentation. Structure-constant consistency is checked
/// separately by [`validate_presentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MalcevPresentation {
    n: usize,
    l: Vec<u64>,
    k: Vec<u64>,
    comm: BTreeMap<(Gen, Gen), CentralValue>,
    /// Central value of `b_i^{l_i}`, indexed by `i - 1`.
    pow: Vec<CentralValue>,
}

impl MalcevPresentation {
    /// Builds a presentation programmatically. Entries are normalized the
    /// same way the parser normalizes them; shape errors are reported with
    /// offset 0.
    pub fn build(
        n: usize,
        l: Vec<u64>,
        k: Vec<u64>,
        comm: Vec<((Gen, Gen), CentralValue)>,
        pow: Vec<(usize, CentralValue)>,
    ) -> Result<Self, ParseError> {
        let mut p = MalcevPresentation {
            n,
            pow: vec![CentralValue { c_exp: 0, d_exps: vec![0; k.len()] }; l.len()],
            l,
            k,
            comm: BTreeMap::new(),
        };
        for order in p.l.iter().chain(p.k.iter()) {
            if *order < 1 {
                return Err(ParseError::new("torsion order < 1", 0));
            }
        }
        for ((g, h), v) in comm {
            p.insert_comm(g, h, v, 0)?;
        }
        for (i, v) in pow {
            p.insert_pow(i, v, 0)?;
        }
        Ok(p)
    }

    /// Relation-free presentation with `n` a-generators and no torsion.
    /// Words over free nilpotent groups are parsed against this shell; the
    /// defaulted structure constants are never consulted there.
    pub fn free_shell(n: usize) -> Self {
        MalcevPresentation::build(n, vec![], vec![], vec![], vec![])
            .expect("shell presentation is well formed")
    }

    pub fn num_a(&self) -> usize {
        self.n
    }

    pub fn num_b(&self) -> usize {
        self.l.len()
    }

    pub fn num_d(&self) -> usize {
        self.k.len()
    }

    pub fn torsion_orders(&self) -> &[u64] {
        &self.l
    }

    pub fn central_orders(&self) -> &[u64] {
        &self.k
    }

    fn check_gen(&self, g: Gen, at: usize) -> Result<(), ParseError> {
        let ok = match g {
            Gen::A(i) => i >= 1 && i <= self.n,
            Gen::B(i) => i >= 1 && i <= self.l.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(ParseError::new(format!("unknown generator {g}"), at))
        }
    }

    fn normalize_central(&self, mut v: CentralValue) -> CentralValue {
        v.d_exps.resize(self.k.len(), 0);
        for (e, &m) in v.d_exps.iter_mut().zip(&self.k) {
            *e = e.rem_euclid(m as i64);
        }
        v
    }

    fn insert_comm(
        &mut self,
        g: Gen,
        h: Gen,
        v: CentralValue,
        at: usize,
    ) -> Result<(), ParseError> {
        self.check_gen(g, at)?;
        self.check_gen(h, at)?;
        let valid = match (g, h) {
            (Gen::A(i), Gen::A(j)) | (Gen::B(i), Gen::B(j)) => i < j,
            (Gen::A(_), Gen::B(_)) => true,
            (Gen::B(_), Gen::A(_)) => false,
        };
        if !valid {
            return Err(ParseError::new(
                format!("commutator entry [{g},{h}] is not in canonical order"),
                at,
            ));
        }
        let v = self.normalize_central(v);
        if self.comm.insert((g, h), v).is_some() {
            return Err(ParseError::new(
                format!("duplicate commutator entry [{g},{h}]"),
                at,
            ));
        }
        Ok(())
    }

    fn insert_pow(&mut self, i: usize, v: CentralValue, at: usize) -> Result<(), ParseError> {
        self.check_gen(Gen::B(i), at)?;
        let v = self.normalize_central(v);
        let slot = &mut self.pow[i - 1];
        if !slot.is_trivial() {
            return Err(ParseError::new(format!("duplicate power entry for b{i}"), at));
        }
        *slot = v;
        Ok(())
    }

    /// The central value of `[g, h]` for any ordering of any two distinct
    /// `a`/`b` generators, using `[h, g] = [g, h]^-1`.
    pub fn commutator_value(&self, g: Gen, h: Gen) -> CentralValue {
        let (key, flip) = match (g, h) {
            (Gen::A(i), Gen::A(j)) => {
                if i < j {
                    ((g, h), false)
                } else {
                    ((h, g), true)
                }
            }
            (Gen::B(i), Gen::B(j)) => {
                if i < j {
                    ((g, h), false)
                } else {
                    ((h, g), true)
                }
            }
            (Gen::A(_), Gen::B(_)) => ((g, h), false),
            (Gen::B(_), Gen::A(_)) => ((h, g), true),
        };
        let mut v = match self.comm.get(&key) {
            Some(v) => v.clone(),
            None => CentralValue { c_exp: 0, d_exps: vec![0; self.k.len()] },
        };
        if flip {
            v.c_exp = -v.c_exp;
            for (e, &m) in v.d_exps.iter_mut().zip(&self.k) {
                *e = (-*e).rem_euclid(m as i64);
            }
        }
        v
    }

    /// The central value of `b_i^{l_i}`.
    pub fn power_value(&self, i: usize) -> &CentralValue {
        &self.pow[i - 1]
    }

    /// Declared (non-defaulted) commutator entries, in canonical order.
    pub fn comm_entries(&self) -> impl Iterator<Item = (&(Gen, Gen), &CentralValue)> {
        self.comm.iter()
    }
}

/// One consistency violation found by [`validate_presentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub what: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.what)
    }
}

/// Checks the structure constants against the relation `[g^m, h] = [g, h]^m`
/// that holds for central commutators: a torsion generator `b_i` of order
/// `l_i` forces `l_i * [b_i, g]` to vanish, i.e. the `c` part must be 0 in
/// the integers and each `d_t` part must vanish mod `k_t`. Torsion orders
/// must also be at least 2.
pub fn validate_presentation(p: &MalcevPresentation) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, &order) in p.l.iter().enumerate() {
        if order < 2 {
            out.push(Violation {
                what: format!("torsion order l{} = {} is below 2", i + 1, order),
            });
        }
    }
    for (t, &order) in p.k.iter().enumerate() {
        if order < 2 {
            out.push(Violation {
                what: format!("torsion order k{} = {} is below 2", t + 1, order),
            });
        }
    }
    for ((g, h), v) in p.comm.iter() {
        let mut torsion_orders = Vec::new();
        for gen in [*g, *h] {
            if let Gen::B(i) = gen {
                torsion_orders.push(p.l[i - 1]);
            }
        }
        for order in torsion_orders {
            if v.c_exp != 0 {
                out.push(Violation {
                    what: format!(
                        "[{g},{h}] has c-exponent {}, but {} * {} != 0 in Z",
                        v.c_exp, order, v.c_exp
                    ),
                });
            }
            for (t, &e) in v.d_exps.iter().enumerate() {
                let m = p.k[t] as i64;
                if (order as i64 * e).rem_euclid(m) != 0 {
                    out.push(Violation {
                        what: format!(
                            "[{g},{h}] has d{}-exponent {}, but {} * {} != 0 mod {}",
                            t + 1,
                            e,
                            order,
                            e,
                            m
                        ),
                    });
                }
            }
        }
    }
    out
}

#[derive(Deserialize)]
struct JsonComm {
    pair: [String; 2],
    #[serde(default)]
    c: i64,
    #[serde(default)]
    d: Vec<i64>,
}

#[derive(Deserialize)]
struct JsonPow {
    gen: String,
    #[serde(default)]
    c: i64,
    #[serde(default)]
    d: Vec<i64>,
}

#[derive(Deserialize)]
struct JsonPresentation {
    n: usize,
    #[serde(default)]
    l: Vec<i64>,
    #[serde(default)]
    k: Vec<i64>,
    #[serde(default)]
    comm: Vec<JsonComm>,
    #[serde(default)]
    pow: Vec<JsonPow>,
}

fn gen_from_name(name: &str, at: usize) -> Result<Gen, ParseError> {
    match classify_ident(name) {
        Some((GenKind::A, i)) => Ok(Gen::A(i)),
        Some((GenKind::B, i)) => Ok(Gen::B(i)),
        _ => Err(ParseError::new(
            format!("'{name}' is not an a- or b-generator"),
            at,
        )),
    }
}

fn orders_from(raw: &[i64], what: &str, at: usize) -> Result<Vec<u64>, ParseError> {
    raw.iter()
        .map(|&o| {
            if o < 1 {
                Err(ParseError::new(format!("torsion order {o} < 1 in {what}"), at))
            } else {
                Ok(o as u64)
            }
        })
        .collect()
}

/// Parses either text form of a presentation. JSON input is detected by a
/// leading `{`.
pub fn parse_presentation(text: &str) -> Result<MalcevPresentation, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_presentation_json(text)
    } else {
        parse_presentation_lines(text)
    }
}

fn parse_presentation_json(text: &str) -> Result<MalcevPresentation, ParseError> {
    let raw: JsonPresentation = serde_json::from_str(text)
        .map_err(|e| ParseError::new(format!("invalid JSON presentation: {e}"), 0))?;
    let l = orders_from(&raw.l, "l", 0)?;
    let k = orders_from(&raw.k, "k", 0)?;
    let mut comm = Vec::new();
    for entry in raw.comm {
        let g = gen_from_name(&entry.pair[0], 0)?;
        let h = gen_from_name(&entry.pair[1], 0)?;
        comm.push(((g, h), CentralValue { c_exp: entry.c, d_exps: entry.d }));
    }
    let mut pow = Vec::new();
    for entry in raw.pow {
        match gen_from_name(&entry.gen, 0)? {
            Gen::B(i) => pow.push((i, CentralValue { c_exp: entry.c, d_exps: entry.d })),
            Gen::A(_) => {
                return Err(ParseError::new(
                    format!("power entry for {} must name a b-generator", entry.gen),
                    0,
                ))
            }
        }
    }
    MalcevPresentation::build(raw.n, l, k, comm, pow)
}

/// Parses the right side of an entry: `1` or a `*`-product of `c^e` and
/// `d<i>^e` factors.
fn parse_central_word(text: &str, num_d: usize, at: usize) -> Result<CentralValue, ParseError> {
    let mut v = CentralValue { c_exp: 0, d_exps: vec![0; num_d] };
    let trimmed = text.trim();
    if trimmed == "1" {
        return Ok(v);
    }
    for part in trimmed.split('*') {
        let part = part.trim();
        let (base, exp) = match part.find('^') {
            Some(i) => {
                let e: i64 = part[i + 1..].trim().parse().map_err(|_| {
                    ParseError::new(format!("invalid exponent in '{part}'"), at)
                })?;
                (part[..i].trim(), e)
            }
            None => (part, 1),
        };
        match classify_ident(base) {
            Some((GenKind::C, _)) => v.c_exp += exp,
            Some((GenKind::D, i)) => {
                if i < 1 || i > num_d {
                    return Err(ParseError::new(format!("unknown generator d{i}"), at));
                }
                v.d_exps[i - 1] += exp;
            }
            _ => {
                return Err(ParseError::new(
                    format!("'{base}' is not central; entries take values in c and d generators"),
                    at,
                ))
            }
        }
    }
    Ok(v)
}

fn parse_order_list(text: &str, at: usize) -> Result<Vec<u64>, ParseError> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ParseError::new("expected a list like [2, 3]", at))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let raw: Vec<i64> = inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| ParseError::new(format!("invalid order '{}'", s.trim()), at))
        })
        .collect::<Result<_, _>>()?;
    orders_from(&raw, "order list", at)
}

fn parse_presentation_lines(text: &str) -> Result<MalcevPresentation, ParseError> {
    let mut n: Option<usize> = None;
    let mut l: Vec<u64> = Vec::new();
    let mut k: Vec<u64> = Vec::new();
    // Right sides mention d-generators, so they are parsed in a second pass
    // once the counts are known.
    let mut comm_raw: Vec<((Gen, Gen), String, usize)> = Vec::new();
    let mut pow_raw: Vec<(usize, i64, String, usize)> = Vec::new();

    let mut offset = 0usize;
    for line in text.split('\n') {
        let line_start = offset;
        offset += line.len() + 1;
        let content = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (lhs, rhs) = trimmed
            .split_once('=')
            .ok_or_else(|| ParseError::new("expected 'lhs = rhs'", line_start))?;
        let lhs = lhs.trim();
        let rhs = rhs.trim();
        if lhs == "n" {
            let value: usize = rhs
                .parse()
                .map_err(|_| ParseError::new(format!("invalid n '{rhs}'"), line_start))?;
            if n.replace(value).is_some() {
                return Err(ParseError::new("duplicate n line", line_start));
            }
        } else if lhs == "l" {
            l = parse_order_list(rhs, line_start)?;
        } else if lhs == "k" {
            k = parse_order_list(rhs, line_start)?;
        } else if let Some(inner) = lhs.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let (g, h) = inner
                .split_once(',')
                .ok_or_else(|| ParseError::new("expected '[g, h]'", line_start))?;
            let g = gen_from_name(g.trim(), line_start)?;
            let h = gen_from_name(h.trim(), line_start)?;
            comm_raw.push(((g, h), rhs.to_string(), line_start));
        } else if let Some((base, exp)) = lhs.split_once('^') {
            let i = match classify_ident(base.trim()) {
                Some((GenKind::B, i)) => i,
                _ => {
                    return Err(ParseError::new(
                        format!("power entry '{lhs}' must be b<i>^<order>"),
                        line_start,
                    ))
                }
            };
            let e: i64 = exp.trim().parse().map_err(|_| {
                ParseError::new(format!("invalid power exponent '{exp}'"), line_start)
            })?;
            pow_raw.push((i, e, rhs.to_string(), line_start));
        } else {
            return Err(ParseError::new(
                format!("unrecognized presentation line '{trimmed}'"),
                line_start,
            ));
        }
    }

    let n = n.ok_or_else(|| ParseError::new("missing 'n = <count>' line", 0))?;
    let num_d = k.len();

    let mut comm = Vec::new();
    for ((g, h), rhs, at) in comm_raw {
        let v = parse_central_word(&rhs, num_d, at)?;
        comm.push(((g, h), v));
    }
    let mut pow = Vec::new();
    for (i, e, rhs, at) in pow_raw {
        if i >= 1 && i <= l.len() && e != l[i - 1] as i64 {
            return Err(ParseError::new(
                format!("power entry b{i}^{e} does not match declared order {}", l[i - 1]),
                at,
            ));
        }
        let v = parse_central_word(&rhs, num_d, at)?;
        pow.push((i, v));
    }
    MalcevPresentation::build(n, l, k, comm, pow)
}

/// Renders the line-based text form; `parse_presentation` inverts it.
pub fn format_presentation(p: &MalcevPresentation) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", p.n));
    out.push_str(&format!(
        "l = [{}]\n",
        p.l.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")
    ));
    out.push_str(&format!(
        "k = [{}]\n",
        p.k.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", ")
    ));
    for ((g, h), v) in p.comm.iter() {
        out.push_str(&format!("[{g}, {h}] = {}\n", format_central(v)));
    }
    for (i, v) in p.pow.iter().enumerate() {
        if !v.is_trivial() {
            out.push_str(&format!("b{}^{} = {}\n", i + 1, p.l[i], format_central(v)));
        }
    }
    out
}

fn format_central(v: &CentralValue) -> String {
    let mut parts = Vec::new();
    if v.c_exp != 0 {
        if v.c_exp == 1 {
            parts.push("c".to_string());
        } else {
            parts.push(format!("c^{}", v.c_exp));
        }
    }
    for (t, &e) in v.d_exps.iter().enumerate() {
        if e != 0 {
            if e == 1 {
                parts.push(format!("d{}", t + 1));
            } else {
                parts.push(format!("d{}^{e}", t + 1));
            }
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Fixed presentations used across the test suites.
pub mod test_groups {
    use super::*;

    /// The discrete Heisenberg group: `n = 2`, `[a1, a2] = c`.
    pub fn heisenberg() -> MalcevPresentation {
        MalcevPresentation::build(
            2,
            vec![],
            vec![],
            vec![(
                (Gen::A(1), Gen::A(2)),
                CentralValue { c_exp: 1, d_exps: vec![] },
            )],
            vec![],
        )
        .unwrap()
    }

    /// `n = 1`, one order-2 torsion generator, no interaction: Z x Z2 x Z.
    pub fn z2_torsion() -> MalcevPresentation {
        MalcevPresentation::build(1, vec![2], vec![], vec![], vec![]).unwrap()
    }

    /// `n = 1`, `l = [2]`, `k = [2]`, `[a1, b1] = d1`, `b1^2 = d1`.
    pub fn two_torsion_mixed() -> MalcevPresentation {
        MalcevPresentation::build(
            1,
            vec![2],
            vec![2],
            vec![(
                (Gen::A(1), Gen::B(1)),
                CentralValue { c_exp: 0, d_exps: vec![1] },
            )],
            vec![(1, CentralValue { c_exp: 0, d_exps: vec![1] })],
        )
        .unwrap()
    }

    /// `n = 2`, `l = [3]`, `k = [3]`, richer structure constants.
    pub fn three_torsion_rich() -> MalcevPresentation {
        MalcevPresentation::build(
            2,
            vec![3],
            vec![3],
            vec![
                (
                    (Gen::A(1), Gen::A(2)),
                    CentralValue { c_exp: 1, d_exps: vec![1] },
                ),
                (
                    (Gen::A(1), Gen::B(1)),
                    CentralValue { c_exp: 0, d_exps: vec![1] },
                ),
                (
                    (Gen::A(2), Gen::B(1)),
                    CentralValue { c_exp: 0, d_exps: vec![2] },
                ),
            ],
            vec![(1, CentralValue { c_exp: 1, d_exps: vec![2] })],
        )
        .unwrap()
    }

    /// Two torsion generators interacting with each other: `l = [2, 2]`,
    /// `k = [2]`, `[b1, b2] = d1`, `[a1, b1] = d1`.
    pub fn two_b_torsion() -> MalcevPresentation {
        MalcevPresentation::build(
            1,
            vec![2, 2],
            vec![2],
            vec![
                (
                    (Gen::B(1), Gen::B(2)),
                    CentralValue { c_exp: 0, d_exps: vec![1] },
                ),
                (
                    (Gen::A(1), Gen::B(1)),
                    CentralValue { c_exp: 0, d_exps: vec![1] },
                ),
            ],
            vec![],
        )
        .unwrap()
    }

    /// Inconsistent on purpose: `l = [2]` with `[a1, b1] = c`.
    pub fn inconsistent_z2() -> MalcevPresentation {
        MalcevPresentation::build(
            1,
            vec![2],
            vec![],
            vec![(
                (Gen::A(1), Gen::B(1)),
                CentralValue { c_exp: 1, d_exps: vec![] },
            )],
            vec![],
        )
        .unwrap()
    }
}
