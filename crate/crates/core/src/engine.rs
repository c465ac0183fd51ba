//! Degree-splitting recursion for maximal-tangency relative invariants.
//!
//! For `beta = d * g` write `n = -K_log . beta`. Once `n >= 3` the invariant
//! with fixed tangency point satisfies (taking `H = D`)
//!
//! ```text
//! (D.D) Nbar_d = sum_{d1 + d2 = d} [ (D.b1)(D.b2)^2 C(n-3, n1-2) - (D.b1)^3 C(n-3, n1) ] Nbar_d1 Nbar_d2
//! ```
//!
//! and the general-`H` form, written with the unfixed invariants `N = (D.beta) Nbar`,
//!
//! ```text
//! (H.D) N_b / (D.b) = sum_{b1 + b2 = b} [ e1^2 (H.b2) C(n-3, n1-1) + e1 e2 (H.b2) C(n-3, n1-2)
//!                                      - e1^2 (H.b1) C(n-3, n1)   - e1 e2 (H.b1) C(n-3, n1-1) ]
//!                                      * (N_b1 / e1) (N_b2 / e2),      e_i = D.b_i
//! ```
//!
//! Both sums range over `d1, d2 >= 1`. Binomials outside their range are zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::arith::{binomial_row, Rational};
use crate::pair::RankOnePair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("missing initial condition for degree {degree} (-K_log.beta = {points} < 3)")]
    MissingInitialCondition { degree: u32, points: i64 },
    #[error("degree {degree}: -K_log.beta = {points} is not positive")]
    Hypothesis { degree: u32, points: i64 },
    #[error("h multiple must be positive")]
    ZeroHMultiple,
    #[error("table values are not contiguous: degree {0} missing")]
    Gap(u32),
    #[error("table value at seed degree {0} disagrees with the pair's seed")]
    SeedMismatch(u32),
}

/// Memoized `Nbar_d` for one pair.
#[derive(Debug, Clone)]
pub struct InvariantTable {
    pair: RankOnePair,
    // values[i] = Nbar_{i+1}
    values: Vec<Rational>,
}

impl InvariantTable {
    /// Wraps externally supplied values (e.g. from a cache). Checks that the
    /// degrees are `1..=max` and agree with the seeds; the recursion itself is
    /// not re-checked, see [`InvariantTable::first_recursion_violation`].
    pub fn from_values(
        pair: RankOnePair,
        values: BTreeMap<u32, Rational>,
    ) -> Result<Self, EngineError> {
        let mut out = Vec::with_capacity(values.len());
        for (i, (d, v)) in values.into_iter().enumerate() {
            let expected = i as u32 + 1;
            if d != expected {
                return Err(EngineError::Gap(expected));
            }
            if pair.seed(d).is_some_and(|s| *s != v) {
                return Err(EngineError::SeedMismatch(d));
            }
            out.push(v);
        }
        Ok(Self { pair, values: out })
    }

    pub fn pair(&self) -> &RankOnePair {
        &self.pair
    }

    pub fn max_degree(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn nbar(&self, d: u32) -> Option<&Rational> {
        d.checked_sub(1).and_then(|i| self.values.get(i as usize))
    }

    /// `N_d = (D . beta) Nbar_d`.
    pub fn n_unfixed(&self, d: u32) -> Option<Rational> {
        self.nbar(d)
            .map(|v| v * Rational::from_integer(self.pair.contact_order(d).into()))
    }

    /// `(d, Nbar_d)` in increasing degree.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.values.iter().enumerate().map(|(i, v)| (i as u32 + 1, v))
    }

    pub fn to_map(&self) -> BTreeMap<u32, Rational> {
        self.iter().map(|(d, v)| (d, v.clone())).collect()
    }

    /// First non-seed degree whose entry does not satisfy the `H = D`
    /// recursion against the lower entries, with (expected, stored).
    pub fn first_recursion_violation(&self) -> Option<(u32, Rational, Rational)> {
        let lookup = |d: u32| &self.values[d as usize - 1];
        (1..=self.max_degree())
            .filter(|&d| self.pair.seed(d).is_none())
            .find_map(|d| {
                let expected = simple_recursion(&self.pair, d, lookup);
                let got = lookup(d);
                (expected != *got).then(|| (d, expected, got.clone()))
            })
    }
}

impl PartialEq for InvariantTable {
    fn eq(&self, other: &Self) -> bool {
        self.pair == other.pair && self.values == other.values
    }
}

/// Right-hand side of the `H = D` recursion divided by `D.D`, evaluated
/// against `lookup` for the lower degrees.
pub(crate) fn simple_recursion<'a>(
    pair: &RankOnePair,
    d: u32,
    lookup: impl Fn(u32) -> &'a Rational,
) -> Rational {
    let n = pair.points_unfixed(d);
    let row = binomial_row(n - 3);
    let choose = |k: i64| -> BigInt {
        usize::try_from(k).ok().and_then(|k| row.get(k)).cloned().unwrap_or_default()
    };
    let mut sum = Rational::zero();
    for d1 in 1..d {
        let d2 = d - d1;
        let e1 = BigInt::from(pair.contact_order(d1));
        let e2 = BigInt::from(pair.contact_order(d2));
        let n1 = pair.points_unfixed(d1);
        let coef = &e1 * &e2 * &e2 * choose(n1 - 2) - &e1 * &e1 * &e1 * choose(n1);
        if coef.is_zero() {
            continue;
        }
        sum += Rational::from_integer(coef) * (lookup(d1) * lookup(d2));
    }
    sum / Rational::from_integer(pair.sigma().into())
}

fn check_degree(pair: &RankOnePair, d: u32) -> Result<(), EngineError> {
    if d == 0 {
        return Err(EngineError::ZeroDegree);
    }
    let points = pair.points_unfixed(d);
    if pair.seed(d).is_none() && points < 3 {
        return Err(EngineError::MissingInitialCondition { degree: d, points });
    }
    Ok(())
}

/// Memoizing evaluator for the `H = D` recursion.
///
/// Fills degrees bottom-up, so each new degree costs `O(d)` term
/// evaluations against already stored values.
#[derive(Debug, Clone)]
pub struct Engine {
    table: InvariantTable,
}

impl Engine {
    pub fn new(pair: RankOnePair) -> Self {
        Self { table: InvariantTable { pair, values: Vec::new() } }
    }

    /// Resumes from a previously computed (or cached) table.
    pub fn from_table(table: InvariantTable) -> Self {
        Self { table }
    }

    pub fn pair(&self) -> &RankOnePair {
        &self.table.pair
    }

    pub fn nbar(&mut self, d: u32) -> Result<Rational, EngineError> {
        self.extend_to(d)?;
        Ok(self.table.values[d as usize - 1].clone())
    }

    /// Ensures every degree `1..=d` is populated.
    pub fn extend_to(&mut self, d: u32) -> Result<(), EngineError> {
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        while self.table.max_degree() < d {
            let next = self.table.max_degree() + 1;
            check_degree(&self.table.pair, next)?;
            let v = match self.table.pair.seed(next) {
                Some(s) => s.clone(),
                None => {
                    let values = &self.table.values;
                    simple_recursion(&self.table.pair, next, |k| &values[k as usize - 1])
                }
            };
            self.table.values.push(v);
        }
        Ok(())
    }

    /// Table for `1..=d_max`, reusing memoized values.
    pub fn table(&mut self, d_max: u32) -> Result<InvariantTable, EngineError> {
        self.extend_to(d_max)?;
        let mut t = self.table.clone();
        t.values.truncate(d_max as usize);
        Ok(t)
    }

    pub fn into_table(self) -> InvariantTable {
        self.table
    }
}

/// `Nbar_d` from the `H = D` recursion.
pub fn nbar(pair: &RankOnePair, d: u32) -> Result<Rational, EngineError> {
    Engine::new(pair.clone()).nbar(d)
}

/// Fully populated table for `1..=d_max`.
pub fn table(pair: &RankOnePair, d_max: u32) -> Result<InvariantTable, EngineError> {
    Engine::new(pair.clone()).table(d_max)
}

/// `N_d = (D . beta) Nbar_d`, valid when `-K_log . beta > 0`.
pub fn n_unfixed(pair: &RankOnePair, d: u32) -> Result<Rational, EngineError> {
    if d == 0 {
        return Err(EngineError::ZeroDegree);
    }
    let points = pair.points_unfixed(d);
    if points <= 0 {
        return Err(EngineError::Hypothesis { degree: d, points });
    }
    Ok(nbar(pair, d)? * Rational::from_integer(pair.contact_order(d).into()))
}

/// Evaluator for the general-`H` recursion with `H` replaced by
/// `h_multiple * H`. Stores the unfixed invariants `N_d`.
#[derive(Debug, Clone)]
pub struct GeneralHEngine {
    pair: RankOnePair,
    h_multiple: i64,
    unfixed: Vec<Rational>,
}

impl GeneralHEngine {
    pub fn new(pair: RankOnePair, h_multiple: u32) -> Result<Self, EngineError> {
        if h_multiple == 0 {
            return Err(EngineError::ZeroHMultiple);
        }
        Ok(Self { pair, h_multiple: h_multiple.into(), unfixed: Vec::new() })
    }

    /// `N_d` as produced by the recursion (seeds converted with `N = (D.beta) Nbar`).
    pub fn n_unfixed(&mut self, d: u32) -> Result<Rational, EngineError> {
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        while (self.unfixed.len() as u32) < d {
            let next = self.unfixed.len() as u32 + 1;
            check_degree(&self.pair, next)?;
            let contact = Rational::from_integer(self.pair.contact_order(next).into());
            let v = match self.pair.seed(next) {
                Some(s) => s * contact,
                None => {
                    let hd = Rational::from_integer((self.pair.hd() * self.h_multiple).into());
                    self.general_sum(next) / hd * contact
                }
            };
            self.unfixed.push(v);
        }
        Ok(self.unfixed[d as usize - 1].clone())
    }

    pub fn nbar(&mut self, d: u32) -> Result<Rational, EngineError> {
        let n = self.n_unfixed(d)?;
        Ok(n / Rational::from_integer(self.pair.contact_order(d).into()))
    }

    fn general_sum(&self, d: u32) -> Rational {
        let pair = &self.pair;
        let n = pair.points_unfixed(d);
        let row = binomial_row(n - 3);
        let choose = |k: i64| -> BigInt {
            usize::try_from(k).ok().and_then(|k| row.get(k)).cloned().unwrap_or_default()
        };
        let h_dot = |k: u32| BigInt::from(self.h_multiple * pair.eta() * k as i64);
        let mut sum = Rational::zero();
        for d1 in 1..d {
            let d2 = d - d1;
            let e1 = BigInt::from(pair.contact_order(d1));
            let e2 = BigInt::from(pair.contact_order(d2));
            let (h1, h2) = (h_dot(d1), h_dot(d2));
            let n1 = pair.points_unfixed(d1);
            let coef = &e1 * &e1 * &h2 * choose(n1 - 1) + &e1 * &e2 * &h2 * choose(n1 - 2)
                - &e1 * &e1 * &h1 * choose(n1)
                - &e1 * &e2 * &h1 * choose(n1 - 1);
            if coef.is_zero() {
                continue;
            }
            let f1 = &self.unfixed[d1 as usize - 1] / Rational::from_integer(e1);
            let f2 = &self.unfixed[d2 as usize - 1] / Rational::from_integer(e2);
            sum += Rational::from_integer(coef) * f1 * f2;
        }
        sum
    }
}

/// `Nbar_d` from the general-`H` recursion with `H` scaled by `h_multiple`.
pub fn nbar_general_h(pair: &RankOnePair, d: u32, h_multiple: u32) -> Result<Rational, EngineError> {
    GeneralHEngine::new(pair.clone(), h_multiple)?.nbar(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::pair::{builtin_conic, builtin_line};

    #[test]
    fn line_low_degrees() {
        let line = builtin_line();
        assert_eq!(nbar(&line, 1).unwrap(), int(1));
        assert_eq!(nbar(&line, 2).unwrap(), int(1));
        assert_eq!(nbar(&line, 3).unwrap(), int(7));
    }

    #[test]
    fn conic_low_degrees() {
        let conic = builtin_conic();
        assert_eq!(nbar(&conic, 3).unwrap(), int(4));
        assert_eq!(nbar(&conic, 4).unwrap(), int(32));
    }

    // Hand expansion of the H = D recursion for the conic at d = 3, where
    // -K_log.beta - 3 = 0 leaves only C(0, 0):
    //   split (1,2): 2 * 16 * C(0,-1) - 8 * C(0,1) = 0
    //   split (2,1): 4 * 4 * C(0,0) - 64 * C(0,2) = 16
    // so 4 Nbar_3 = 16 Nbar_2 Nbar_1. The closed form gives Nbar_3 = 4 and
    // the known Nbar_2 = 1, which forces Nbar_1 = 1.
    #[test]
    fn conic_degree_one_seed_is_forced() {
        let split_12 = 2 * 16 * crate::arith::binomial(0, -1) - 8 * crate::arith::binomial(0, 1);
        let split_21 = 4 * 4 * crate::arith::binomial(0, 0) - 64 * crate::arith::binomial(0, 2);
        assert_eq!(split_12, BigInt::zero());
        assert_eq!(split_21, BigInt::from(16));
        let sigma = int(4);
        let nbar3 = crate::closed::closed_conic(1);
        let nbar2 = int(1);
        let forced_nbar1 = sigma * nbar3 / (int(16) * nbar2);
        assert_eq!(forced_nbar1, int(1));
        assert_eq!(builtin_conic().seed(1), Some(&forced_nbar1));
    }

    #[test]
    fn unfixed_examples() {
        assert_eq!(n_unfixed(&builtin_line(), 1).unwrap(), int(1));
        assert_eq!(n_unfixed(&builtin_line(), 3).unwrap(), int(21));
        assert_eq!(n_unfixed(&builtin_conic(), 2).unwrap(), int(4));
        assert_eq!(n_unfixed(&builtin_line(), 0), Err(EngineError::ZeroDegree));
    }

    #[test]
    fn general_h_examples() {
        let line = builtin_line();
        let conic = builtin_conic();
        assert_eq!(nbar_general_h(&line, 3, 1).unwrap(), int(7));
        assert_eq!(nbar_general_h(&line, 5, 3).unwrap(), nbar_general_h(&line, 5, 1).unwrap());
        assert_eq!(nbar_general_h(&conic, 3, 1).unwrap(), int(4));
        assert_eq!(nbar_general_h(&line, 3, 0), Err(EngineError::ZeroHMultiple));
    }

    #[test]
    fn general_h_agrees_with_simple_form() {
        for pair in [builtin_line(), builtin_conic()] {
            let t = table(&pair, 12).unwrap();
            for m in 1..=3 {
                let mut g = GeneralHEngine::new(pair.clone(), m).unwrap();
                for d in 1..=12 {
                    assert_eq!(&g.nbar(d).unwrap(), t.nbar(d).unwrap(), "{} d={d} m={m}", pair.name());
                    assert_eq!(g.n_unfixed(d).unwrap(), t.n_unfixed(d).unwrap());
                }
            }
        }
    }

    #[test]
    fn table_examples() {
        let t = table(&builtin_line(), 3).unwrap();
        assert_eq!(t.to_map(), BTreeMap::from([(1, int(1)), (2, int(1)), (3, int(7))]));
        let t = table(&builtin_conic(), 3).unwrap();
        assert_eq!(t.to_map(), BTreeMap::from([(1, int(1)), (2, int(1)), (3, int(4))]));
        let t = table(&builtin_line(), 1).unwrap();
        assert_eq!(t.to_map(), BTreeMap::from([(1, int(1))]));
        assert_eq!(table(&builtin_line(), 0).unwrap_err(), EngineError::ZeroDegree);
    }

    #[test]
    fn memoization_is_transparent() {
        let pair = builtin_conic();
        let mut engine = Engine::new(pair.clone());
        let t = engine.table(15).unwrap();
        for d in (1..=15).rev() {
            assert_eq!(engine.nbar(d).unwrap(), nbar(&pair, d).unwrap());
            assert_eq!(t.nbar(d).unwrap(), &nbar(&pair, d).unwrap());
        }
        assert_eq!(engine.table(7).unwrap(), table(&pair, 7).unwrap());
    }

    #[test]
    fn resumed_engine_matches_fresh() {
        let pair = builtin_line();
        let partial = table(&pair, 5).unwrap();
        let mut resumed = Engine::from_table(partial);
        assert_eq!(resumed.table(20).unwrap(), table(&pair, 20).unwrap());
    }

    #[test]
    fn recursion_violation_is_located() {
        let pair = builtin_line();
        let mut values = table(&pair, 6).unwrap().to_map();
        assert!(InvariantTable::from_values(pair.clone(), values.clone())
            .unwrap()
            .first_recursion_violation()
            .is_none());
        values.insert(4, int(1000));
        let t = InvariantTable::from_values(pair.clone(), values.clone()).unwrap();
        let (d, expected, got) = t.first_recursion_violation().unwrap();
        assert_eq!((d, got), (4, int(1000)));
        assert_eq!(expected, nbar(&pair, 4).unwrap());

        values.remove(&2);
        assert_eq!(InvariantTable::from_values(pair.clone(), values.clone()).unwrap_err(), EngineError::Gap(2));
        let bad_seed = BTreeMap::from([(1, int(2))]);
        assert_eq!(InvariantTable::from_values(pair, bad_seed).unwrap_err(), EngineError::SeedMismatch(1));
    }
}
