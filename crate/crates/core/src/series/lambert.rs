//! The tree-function form of Lambert W, `W(x) = sum_{k>=1} k^{k-1} x^k / k!`,
//! which satisfies `W e^{-W} = x` (note the sign: this is `-W_0(-x)` in the
//! more common convention).

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use super::TruncatedSeries;
use crate::arith::{factorial, Rational};

fn tree_coefficient(k: usize) -> Rational {
    if k == 0 {
        return Rational::zero();
    }
    let k_big = BigInt::from(k);
    let num: BigInt = Pow::pow(&k_big, (k - 1) as u32);
    Rational::new(num, factorial(k as i64).expect("k >= 0"))
}

/// `W(x)` to `order`.
pub fn lambert_w(order: usize) -> TruncatedSeries {
    TruncatedSeries::from_fn(order, tree_coefficient)
}

/// `W(i s x) + W(-i s x)` with `s = scale`, which is a rational series:
/// odd terms cancel and `i^{2m} = (-1)^m`, leaving
/// `sum_{k even} 2 (-1)^{k/2} k^{k-1} (s x)^k / k!`.
pub fn w_even_combo(order: usize, scale: &Rational) -> TruncatedSeries {
    let mut pow = Rational::one();
    TruncatedSeries::from_fn(order, |k| {
        let c = if k % 2 == 1 || k == 0 {
            Rational::zero()
        } else {
            let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
            tree_coefficient(k) * &pow * Rational::from_integer((2 * sign).into())
        };
        pow *= scale;
        c
    })
}
