//! Cross-validation of an invariant table against every independent route
//! available for its pair.

use thiserror::Error;

use crate::arith::{is_positive_integer, ratio};
use crate::closed::{
    check_functional_eq_table, check_m_constant, closed_conic, closed_fast, closed_line,
    covering_table, generating_series, ClosedFormError, PairKind, VerificationReport,
    DEFAULT_BRUTE_FORCE_CAP,
};
use crate::engine::{EngineError, GeneralHEngine, InvariantTable};
use crate::series::{
    lagrange_invert, lambert_w, lemma_ode_residual, lemma_ode_residual_of, ode_residual,
    w_even_combo, TruncatedSeries,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Series checks run to `q^order`.
    pub order: usize,
    /// Composition enumeration only runs for closed-form index `d <= cap`.
    pub brute_force_cap: u32,
    pub h_multiples: Vec<u32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { order: 20, brute_force_cap: DEFAULT_BRUTE_FORCE_CAP, h_multiples: vec![1, 2, 3] }
    }
}

/// Runs every applicable identity against `table`. Closed-form and series
/// checks only apply to the built-in pairs.
pub fn verify_table(
    table: &InvariantTable,
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let pair = table.pair();
    let max = table.max_degree();
    let mut reports = Vec::new();

    reports.push(VerificationReport::from_pairs(
        "seeds",
        max.into(),
        pair.seeds().iter().filter(|(d, _)| **d <= max).map(|(d, s)| {
            (u64::from(*d), s.clone(), table.nbar(*d).expect("d <= max").clone())
        }),
    ));

    let violation = table.first_recursion_violation();
    reports.push(VerificationReport::from_pairs(
        "recursion-identity",
        max.into(),
        violation.map(|(d, e, g)| (u64::from(d), e, g)),
    ));

    // N_d from the general-H recursion works with the unfixed invariants
    // directly, so comparing it with (D.beta) Nbar_d exercises move2fix.
    let mut general = GeneralHEngine::new(pair.clone(), 1)?;
    let mut move2fix = Vec::new();
    for d in 1..=max {
        if pair.points_unfixed(d) > 0 {
            move2fix.push((u64::from(d), table.n_unfixed(d).expect("d <= max"), general.n_unfixed(d)?));
        }
    }
    reports.push(VerificationReport::from_pairs("move2fix", max.into(), move2fix));

    for &m in &opts.h_multiples {
        let mut engine = GeneralHEngine::new(pair.clone(), m)?;
        let mut rows = Vec::new();
        for d in 1..=max {
            rows.push((u64::from(d), table.nbar(d).expect("d <= max").clone(), engine.nbar(d)?));
        }
        reports.push(VerificationReport::from_pairs(format!("h-independence[m={m}]"), max.into(), rows));
    }

    let Some(kind) = PairKind::detect(pair) else {
        return Ok(reports);
    };
    reports.extend(verify_closed_forms(kind, table, opts)?);
    reports.extend(verify_series(kind, table, opts.order)?);
    Ok(reports)
}

fn verify_closed_forms(
    kind: PairKind,
    table: &InvariantTable,
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let max = table.max_degree();
    let first = kind.degree_of(1);
    if max < first {
        return Ok(Vec::new());
    }
    let top = max - (first - 1);
    let fast = closed_fast(kind, top);
    let brute = |d: u32| match kind {
        PairKind::Line => closed_line(d),
        PairKind::Conic => closed_conic(d),
    };
    let oracle_top = top.min(opts.brute_force_cap);

    let recursion_vs_closed = (1..=top).map(|d| {
        let degree = kind.degree_of(d);
        let expected = if d <= oracle_top { brute(d) } else { fast[&degree].clone() };
        (u64::from(degree), expected, table.nbar(degree).expect("covered").clone())
    });
    let mut out = vec![VerificationReport::from_pairs("recursion-vs-closed-form", max.into(), recursion_vs_closed)];
    out.push(VerificationReport::from_pairs(
        "closed-fast-vs-compositions",
        kind.degree_of(oracle_top).into(),
        (1..=oracle_top).map(|d| {
            let degree = kind.degree_of(d);
            (u64::from(degree), brute(d), fast[&degree].clone())
        }),
    ));
    Ok(out)
}

fn verify_series(
    kind: PairKind,
    table: &InvariantTable,
    order: usize,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let mut out = Vec::new();
    let covered = covering_table(kind, table, order + 1)?;
    let f = generating_series(kind, &covered, order)?;
    out.push(VerificationReport::from_series(
        "ode-key",
        order,
        &TruncatedSeries::zero(order),
        &ode_residual(&f),
    ));
    out.push(check_functional_eq_table(kind, &covered, order)?);
    out.push(check_m_constant(kind, &covered, order)?);

    // The kernel of the functional equation solves the auxiliary ODE:
    // c1 = -c2 = i/2 for the line (only through the even combination),
    // c1 = c2 = -1/2 for the conic after rescaling A by 1/4.
    let residual = match kind {
        PairKind::Line => lemma_ode_residual_of(&-&w_even_combo(order, &ratio(1, 2)))
            .map_err(ClosedFormError::from)?,
        PairKind::Conic => lemma_ode_residual(&ratio(-1, 2), order).map_err(ClosedFormError::from)?,
    };
    out.push(VerificationReport::from_series("lemma-ode", order, &TruncatedSeries::zero(order), &residual));

    let w = lambert_w(order);
    let tree = &w * &(-&w).exp().map_err(ClosedFormError::from)?;
    out.push(VerificationReport::from_series("lambert-inverse", order, &TruncatedSeries::var(order), &tree));
    let x_exp = &TruncatedSeries::var(order) * &(-&TruncatedSeries::var(order)).exp().map_err(ClosedFormError::from)?;
    let inverted = lagrange_invert(&x_exp).map_err(ClosedFormError::from)?;
    out.push(VerificationReport::from_series("lagrange-lambert", order, &w, &inverted));
    Ok(out)
}

/// True when every closed-form value in `1..=d_max` is a positive integer.
pub fn closed_forms_are_positive_integers(kind: PairKind, d_max: u32) -> bool {
    closed_fast(kind, d_max).values().all(is_positive_integer)
}
