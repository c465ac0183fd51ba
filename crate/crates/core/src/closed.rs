//! Closed forms for `(P^2, line)` and `(P^2, conic)` and the functional
//! equations they come from.
//!
//! With `F^L = sum Nbar_d^L q^{2d} / (2d-1)!`, `F^C = sum 16 Nbar_d^C q^d / (d-1)!`
//! and `A = (d/dq - 1/q) F`, the invariants satisfy
//!
//! ```text
//! A^L exp(W(A^L / 2i) + W(-A^L / 2i)) = q
//! A^C exp(2 W(-A^C / 8))              = 16 q
//! ```
//!
//! and Lagrange inversion turns these into sums over ordered compositions
//! `a_1 + ... + a_s = d`:
//!
//! ```text
//! Nbar_{d+1}^L = (2d)!/(2d+1) sum_s sum_a (-1)^{d-s} (2d+1)^s / s! prod a_i^{2a_i-1} / (2a_i)!
//! Nbar_{d+2}^C = d!/(d+1)     sum_s sum_a (-1)^{d-s} 2^{d+s} (d+1)^s / s! prod a_i^{a_i-1} / a_i!
//! ```
//!
//! [`closed_line`] and [`closed_conic`] enumerate the compositions literally.
//! [`closed_fast`] uses `sum_{s} (-1)^{d-s} c^s/s! sum_{|a|=s} prod g(a_i) = (-1)^d [x^d] exp(-c G(x))`
//! with `G = sum g(a) x^a`, which costs `O(d^2)` per degree.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{factorial, int, ratio, Rational};
use crate::engine::{Engine, EngineError, InvariantTable};
use crate::pair::{builtin_conic, builtin_line, RankOnePair};
use crate::series::{a_from_f, b_from_f, lambert_w, w_even_combo, SeriesError, TruncatedSeries};

/// Above this degree the composition enumeration is not run by default.
pub const DEFAULT_BRUTE_FORCE_CAP: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosedFormError {
    #[error("order {0} is too small to be informative (need at least 3)")]
    OrderTooSmall(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    Line,
    Conic,
}

impl PairKind {
    pub fn pair(self) -> RankOnePair {
        match self {
            PairKind::Line => builtin_line(),
            PairKind::Conic => builtin_conic(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PairKind::Line => "line",
            PairKind::Conic => "conic",
        }
    }

    /// Recognizes a built-in pair by its data, whatever its name.
    pub fn detect(pair: &RankOnePair) -> Option<Self> {
        [PairKind::Line, PairKind::Conic].into_iter().find(|k| {
            let b = k.pair();
            (b.delta(), b.kappa(), b.sigma(), b.seeds())
                == (pair.delta(), pair.kappa(), pair.sigma(), pair.seeds())
        })
    }

    /// Degree of the invariant produced by the closed form at index `d`.
    pub fn degree_of(self, d: u32) -> u32 {
        match self {
            PairKind::Line => d + 1,
            PairKind::Conic => d + 2,
        }
    }

    /// `M` in `A = M q exp(B)`.
    pub fn m_constant(self) -> Rational {
        match self {
            PairKind::Line => int(1),
            PairKind::Conic => int(16),
        }
    }

    /// Highest invariant degree that contributes to `F` up to `q^order`.
    pub fn degree_for_order(self, order: usize) -> u32 {
        match self {
            PairKind::Line => (order / 2) as u32,
            PairKind::Conic => order as u32,
        }
    }

    // weights of the composition sums: g(a), c, and the prefactor
    fn part_weight(self, a: u32) -> Rational {
        let a_big = BigInt::from(a);
        match self {
            PairKind::Line => Rational::new(
                Pow::pow(&a_big, 2 * a - 1),
                factorial(2 * a as i64).expect("nonnegative"),
            ),
            PairKind::Conic => Rational::new(
                Pow::pow(&a_big, a - 1),
                factorial(a as i64).expect("nonnegative"),
            ),
        }
    }

    /// Per-part multiplier `c` so that the `s`-part term carries `c^s`.
    fn part_multiplier(self, d: u32) -> Rational {
        match self {
            PairKind::Line => int(2 * d as i64 + 1),
            PairKind::Conic => int(2 * (d as i64 + 1)),
        }
    }

    fn prefactor(self, d: u32) -> Rational {
        match self {
            PairKind::Line => {
                Rational::new(factorial(2 * d as i64).expect("nonnegative"), BigInt::from(2 * d + 1))
            }
            PairKind::Conic => {
                let two_d: BigInt = Pow::pow(&BigInt::from(2), d);
                Rational::new(factorial(d as i64).expect("nonnegative") * two_d, BigInt::from(d + 1))
            }
        }
    }
}

/// Ordered compositions of `n` (tuples of positive integers summing to `n`),
/// `2^{n-1}` of them for `n >= 1`. The empty composition is yielded once for `n = 0`.
pub fn compositions(n: u32) -> impl Iterator<Item = Vec<u32>> {
    assert!(n < 64, "composition enumeration is limited to n < 64");
    let count: u64 = if n == 0 { 1 } else { 1u64 << (n - 1) };
    (0..count).map(move |mask| {
        if n == 0 {
            return Vec::new();
        }
        // bit i set: cut after position i + 1
        let mut parts = Vec::new();
        let mut run = 1;
        for i in 0..n - 1 {
            if mask >> i & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        parts
    })
}

/// `by_parts[s] = sum over compositions of d with s parts of prod g(a_i)`,
/// by depth-first enumeration sharing prefix products.
fn composition_sums(d: u32, weights: &[Rational]) -> Vec<Rational> {
    fn walk(rest: u32, parts: usize, prod: &Rational, w: &[Rational], acc: &mut [Rational]) {
        if rest == 0 {
            acc[parts] += prod;
            return;
        }
        for a in 1..=rest {
            walk(rest - a, parts + 1, &(prod * &w[a as usize]), w, acc);
        }
    }
    let mut acc = vec![Rational::zero(); d as usize + 1];
    walk(d, 0, &Rational::one(), weights, &mut acc);
    acc
}

fn closed_by_enumeration(kind: PairKind, d: u32) -> Rational {
    assert!(d >= 1, "closed forms are indexed from d = 1");
    let weights: Vec<Rational> =
        (0..=d).map(|a| if a == 0 { Rational::zero() } else { kind.part_weight(a) }).collect();
    let by_parts = composition_sums(d, &weights);
    let c = kind.part_multiplier(d);
    let mut total = Rational::zero();
    let mut c_pow = Rational::one();
    for (s, sum) in by_parts.iter().enumerate().skip(1) {
        c_pow *= &c;
        if sum.is_zero() {
            continue;
        }
        let sign = if (d as usize - s).is_multiple_of(2) { int(1) } else { int(-1) };
        let s_fact = Rational::from_integer(factorial(s as i64).expect("nonnegative"));
        total += sign * &c_pow / s_fact * sum;
    }
    kind.prefactor(d) * total
}

/// `Nbar_{d+1}` of `(P^2, line)` by explicit composition enumeration.
pub fn closed_line(d: u32) -> Rational {
    closed_by_enumeration(PairKind::Line, d)
}

/// `Nbar_{d+2}` of `(P^2, conic)` by explicit composition enumeration.
pub fn closed_conic(d: u32) -> Rational {
    closed_by_enumeration(PairKind::Conic, d)
}

/// Closed-form values for `d = 1..=d_max`, keyed by the invariant's degree
/// (`d + 1` for the line, `d + 2` for the conic).
pub fn closed_fast(kind: PairKind, d_max: u32) -> BTreeMap<u32, Rational> {
    let g = TruncatedSeries::from_fn(d_max as usize, |a| {
        if a == 0 { Rational::zero() } else { kind.part_weight(a as u32) }
    });
    (1..=d_max)
        .map(|d| {
            let c = kind.part_multiplier(d);
            let e = g.truncate(d as usize).scale(&-c).exp().expect("G has zero constant term");
            let sign = if d % 2 == 0 { int(1) } else { int(-1) };
            let v = kind.prefactor(d) * sign * e.coeff(d as usize);
            (kind.degree_of(d), v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub index: u64,
    #[serde(with = "crate::arith::serde_rational")]
    pub expected: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub got: Rational,
}

/// Outcome of one identity check. `pass` holds exactly when there is no discrepancy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub order: u64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<Discrepancy>,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, order: u64, discrepancy: Option<Discrepancy>) -> Self {
        Self { identity: identity.into(), order, pass: discrepancy.is_none(), discrepancy }
    }

    /// Compares two series coefficient by coefficient up to `order`.
    pub fn from_series(
        identity: impl Into<String>,
        order: usize,
        expected: &TruncatedSeries,
        got: &TruncatedSeries,
    ) -> Self {
        let expected = expected.truncate(order);
        let got = got.truncate(order);
        let discrepancy = expected.first_difference(&got).map(|i| Discrepancy {
            index: i as u64,
            expected: expected.coeff(i).clone(),
            got: got.coeff(i).clone(),
        });
        Self::new(identity, order as u64, discrepancy)
    }

    /// Compares `(index, expected, got)` triples, reporting the first mismatch.
    pub fn from_pairs(
        identity: impl Into<String>,
        order: u64,
        pairs: impl IntoIterator<Item = (u64, Rational, Rational)>,
    ) -> Self {
        let discrepancy = pairs
            .into_iter()
            .find(|(_, e, g)| e != g)
            .map(|(index, expected, got)| Discrepancy { index, expected, got });
        Self::new(identity, order, discrepancy)
    }
}

/// `F` of the given pair, known to `q^order`. The table must cover
/// [`PairKind::degree_for_order`].
pub fn generating_series(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<TruncatedSeries, EngineError> {
    let needed = kind.degree_for_order(order);
    if table.max_degree() < needed {
        return Err(EngineError::Gap(table.max_degree() + 1));
    }
    Ok(TruncatedSeries::from_fn(order, |n| match kind {
        PairKind::Line if n % 2 == 0 && n > 0 => {
            let d = (n / 2) as u32;
            table.nbar(d).expect("covered") / Rational::from_integer(
                factorial(2 * d as i64 - 1).expect("nonnegative"),
            )
        }
        PairKind::Conic if n > 0 => {
            let d = n as u32;
            table.nbar(d).expect("covered") * int(16)
                / Rational::from_integer(factorial(d as i64 - 1).expect("nonnegative"))
        }
        _ => Rational::zero(),
    }))
}

/// Extends `table` with the recursion so it covers `F` to `q^order`.
pub(crate) fn covering_table(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<InvariantTable, EngineError> {
    let needed = kind.degree_for_order(order).max(1);
    if table.max_degree() >= needed {
        return Ok(table.clone());
    }
    Engine::from_table(table.clone()).table(needed)
}

/// Both sides `(lhs, rhs)` of the functional equation as series to `q^order`.
pub fn functional_eq_sides(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<(TruncatedSeries, TruncatedSeries), ClosedFormError> {
    let table = covering_table(kind, table, order + 1)?;
    let f = generating_series(kind, &table, order + 1)?;
    let a = a_from_f(&f)?;
    let kernel = match kind {
        PairKind::Line => w_even_combo(order, &ratio(1, 2)),
        PairKind::Conic => lambert_w(order).dilate(&ratio(-1, 8)).scale(&int(2)),
    };
    let lhs = &a * &kernel.compose(&a)?.exp()?;
    let rhs = TruncatedSeries::monomial(kind.m_constant(), 1, order);
    Ok((lhs, rhs))
}

/// Checks the functional equation of `kind` with invariants taken from `table`
/// (extended by the recursion where it is too short).
pub fn check_functional_eq_table(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<VerificationReport, ClosedFormError> {
    if order < 3 {
        return Err(ClosedFormError::OrderTooSmall(order));
    }
    let (lhs, rhs) = functional_eq_sides(kind, table, order)?;
    Ok(VerificationReport::from_series("functional-equation", order, &rhs, &lhs))
}

/// Checks the functional equation of `kind` against freshly computed invariants.
pub fn check_functional_eq(kind: PairKind, order: usize) -> Result<VerificationReport, ClosedFormError> {
    let table = Engine::new(kind.pair()).table(kind.degree_for_order(order + 1).max(1))?;
    check_functional_eq_table(kind, &table, order)
}

/// `A = M q exp(B)` with `B = (q d/dq) F / 4`, to `q^order`.
pub fn check_m_constant(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<VerificationReport, ClosedFormError> {
    let table = covering_table(kind, table, order + 1)?;
    let f = generating_series(kind, &table, order + 1)?;
    let a = a_from_f(&f)?;
    let b = b_from_f(&f);
    let rhs = b.exp()?.shift_up(1).scale(&kind.m_constant());
    Ok(VerificationReport::from_series("m-constant", order, &a, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::table;

    #[test]
    fn composition_counts_and_sums() {
        assert_eq!(compositions(0).collect::<Vec<_>>(), vec![Vec::<u32>::new()]);
        assert_eq!(compositions(3).count(), 4);
        for n in 1..=12 {
            let all: Vec<Vec<u32>> = compositions(n).collect();
            assert_eq!(all.len(), 1 << (n - 1));
            assert!(all.iter().all(|c| c.iter().sum::<u32>() == n && c.iter().all(|&a| a > 0)));
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    /// Oracle that multiplies out every composition from scratch.
    fn literal_sum(kind: PairKind, d: u32) -> Rational {
        let c = kind.part_multiplier(d);
        let mut total = Rational::zero();
        for comp in compositions(d) {
            let s = comp.len();
            let mut term = Rational::from_integer(if (d as usize - s).is_multiple_of(2) { 1.into() } else { (-1).into() });
            for _ in 0..s {
                term *= &c;
            }
            term /= Rational::from_integer(factorial(s as i64).unwrap());
            for &a in &comp {
                term *= kind.part_weight(a);
            }
            total += term;
        }
        kind.prefactor(d) * total
    }

    #[test]
    fn enumeration_matches_literal_oracle() {
        for d in 1..=9 {
            assert_eq!(closed_line(d), literal_sum(PairKind::Line, d));
            assert_eq!(closed_conic(d), literal_sum(PairKind::Conic, d));
        }
    }

    #[test]
    fn hand_expanded_values() {
        // (2)!/3 * 3 * 1/2! = 1
        assert_eq!(closed_line(1), int(1));
        // 24/5 * (25/8 - 5/3) = 7
        assert_eq!(ratio(24, 5) * (ratio(25, 8) - ratio(5, 3)), int(7));
        assert_eq!(closed_line(2), int(7));
        assert_eq!(closed_conic(1), int(4));
        // 2/3 * (72 - 24) = 32
        assert_eq!(ratio(2, 3) * int(72 - 24), int(32));
        assert_eq!(closed_conic(2), int(32));
    }

    #[test]
    fn fast_path_examples() {
        assert_eq!(closed_fast(PairKind::Line, 2), BTreeMap::from([(2, int(1)), (3, int(7))]));
        assert_eq!(closed_fast(PairKind::Conic, 2), BTreeMap::from([(3, int(4)), (4, int(32))]));
        let fast = closed_fast(PairKind::Line, 12);
        for d in 1..=12 {
            assert_eq!(fast[&(d + 1)], closed_line(d));
        }
    }

    #[test]
    fn closed_forms_match_recursion() {
        let line = table(&builtin_line(), 10).unwrap();
        let conic = table(&builtin_conic(), 11).unwrap();
        for d in 1..=9 {
            assert_eq!(line.nbar(d + 1).unwrap(), &closed_line(d));
            assert_eq!(conic.nbar(d + 2).unwrap(), &closed_conic(d));
        }
    }

    #[test]
    fn functional_equations_hold() {
        assert!(check_functional_eq(PairKind::Line, 20).unwrap().pass);
        assert!(check_functional_eq(PairKind::Conic, 20).unwrap().pass);
        assert_eq!(check_functional_eq(PairKind::Line, 2), Err(ClosedFormError::OrderTooSmall(2)));
    }

    #[test]
    fn corrupted_line_table_fails_at_q5() {
        // Nbar_3 enters A^L first at q^5 with weight (6-1)/5! = 1/24, and
        // the kernel is even, so raising Nbar_3 by one moves that
        // coefficient from 0 to 1/24.
        let pair = builtin_line();
        let mut values = table(&pair, 3).unwrap().to_map();
        values.insert(3, int(8));
        let corrupted = InvariantTable::from_values(pair, values).unwrap();
        let r = check_functional_eq_table(PairKind::Line, &corrupted, 20).unwrap();
        assert!(!r.pass);
        assert_eq!(
            r.discrepancy,
            Some(Discrepancy { index: 5, expected: int(0), got: ratio(1, 24) })
        );
    }

    #[test]
    fn verdict_is_monotone_in_order() {
        for order in 3..=12 {
            assert!(check_functional_eq(PairKind::Conic, order).unwrap().pass);
        }
        let pair = builtin_line();
        let mut values = table(&pair, 3).unwrap().to_map();
        values.insert(3, int(8));
        let corrupted = InvariantTable::from_values(pair, values).unwrap();
        for order in 3..=10 {
            let r = check_functional_eq_table(PairKind::Line, &corrupted, order).unwrap();
            assert_eq!(r.pass, order < 5, "order {order}");
        }
    }

    #[test]
    fn m_constants() {
        for kind in [PairKind::Line, PairKind::Conic] {
            let t = table(&kind.pair(), 1).unwrap();
            assert!(check_m_constant(kind, &t, 16).unwrap().pass);
        }
    }

    #[test]
    fn detection() {
        assert_eq!(PairKind::detect(&builtin_line()), Some(PairKind::Line));
        assert_eq!(PairKind::detect(&builtin_conic()), Some(PairKind::Conic));
    }
}
