use super::{lambert_w, SeriesError, TruncatedSeries};
use crate::arith::{ratio, Rational};
use num_traits::Zero;

/// `(θ-1)(θ-2) f - (θ² f / 4) (θ-1) f` with `θ = q d/dq`.
///
/// Vanishes for the generating series of both built-in pairs.
pub fn ode_residual(f: &TruncatedSeries) -> TruncatedSeries {
    let lhs = f.euler_shift(2).euler_shift(1);
    let theta_sq = f.q_d_dq().q_d_dq().scale(&ratio(1, 4));
    let rhs = &theta_sq * &f.euler_shift(1);
    &lhs - &rhs
}

/// Residual of `x f' (1 + f + x^2/4 e^{-f}) - (f + x^2/2 e^{-f})` for
/// `f = -W(c1 x) - W(c2 x)` with `c2 = 1 / (4 c1)`.
pub fn lemma_ode_residual(c1: &Rational, order: usize) -> Result<TruncatedSeries, SeriesError> {
    if c1.is_zero() {
        return Err(SeriesError::ZeroArgument { op: "lemma_ode_residual" });
    }
    let c2 = (c1 * Rational::from_integer(4.into())).recip();
    let w = lambert_w(order);
    let f = -&(&w.dilate(c1) + &w.dilate(&c2));
    lemma_ode_residual_of(&f)
}

/// Cleared-denominator residual of `x f' = (f + x^2/2 e^{-f}) / (1 + f + x^2/4 e^{-f})`
/// for an arbitrary `f` with zero constant term.
pub fn lemma_ode_residual_of(f: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let order = f.order();
    let damped = (-f).exp()?.shift_up(2).truncate(order);
    let x_df = f.q_d_dq();
    let one = TruncatedSeries::one(order);
    let denom = &(&one + f) + &damped.scale(&ratio(1, 4));
    let numer = f + &damped.scale(&ratio(1, 2));
    Ok(&(&x_df * &denom) - &numer)
}
