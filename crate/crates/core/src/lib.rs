//! Exact computation of maximal-tangency relative Gromov–Witten invariants
//! of surface pairs `(X, D)` with a rank-one curve lattice.
//!
//! The invariants `Nbar_d` (tangency point fixed on `D`) are produced by a
//! memoized degree-splitting recursion ([`engine`]); `N_d = (D.beta) Nbar_d`.
//! For `(P^2, line)` and `(P^2, conic)` they are cross-checked against
//! closed composition sums and generating-series identities ([`closed`],
//! [`series`], [`verify`]). Every scalar is an exact [`Rational`].

pub mod arith;
pub mod closed;
pub mod engine;
pub mod io;
pub mod pair;
pub mod series;
pub mod verify;

pub use arith::{binomial, factorial, Rational};
pub use closed::{
    check_functional_eq, closed_conic, closed_fast, closed_line, PairKind, VerificationReport,
};
pub use engine::{n_unfixed, nbar, nbar_general_h, table, Engine, EngineError, InvariantTable};
pub use io::ComputationReport;
pub use pair::{builtin_conic, builtin_line, load_custom, RankOnePair};
pub use series::TruncatedSeries;
pub use verify::{verify_table, VerifyOptions};
