//! Intersection data of a surface pair `(X, D)` whose curve classes are the
//! positive multiples `d * g` of a single generator `g`.
//!
//! Every intersection number is stored per unit degree:
//!
//! | field   | meaning                                  |
//! |---------|------------------------------------------|
//! | `delta` | `D . g`, so `D . beta = delta * d`       |
//! | `kappa` | `K_log . g` where `K_log = K_X + D`      |
//! | `sigma` | `D . D`                                  |
//! | `eta`   | `H . g` for an auxiliary divisor `H`     |
//! | `hd`    | `H . D`                                  |
//!
//! Degrees with `-kappa * d < 3` cannot be reached by the recursion and
//! must be supplied as seeds.
//!
//! # Config format
//!
//! A pair can be loaded from a flat `key = value` text file. Blank lines and
//! lines starting with `#` are ignored. Keys:
//!
//! ```text
//! name   = <identifier>          # [A-Za-z0-9_.-]+
//! delta  = <integer >= 1>
//! kappa  = <integer, negative>
//! sigma  = <integer >= 1>
//! eta    = <integer >= 1>
//! hd     = <integer >= 1>        # must satisfy eta * sigma = hd * delta
//! seed.<d> = <rational p or p/q> # one per degree d >= 1 with -kappa*d < 3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::arith::{format_rational, int, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("delta = {0}: divisor not ample on generator")]
    NotAmple(i64),
    #[error("kappa = {0}: -K_log . g must be positive")]
    NonPositiveAnticanonical(i64),
    #[error("missing seed for degree {0}")]
    MissingSeed(u32),
    #[error("seed for degree {degree} is not an initial condition (-kappa*d = {points} >= 3)")]
    UnexpectedSeed { degree: u32, points: i64 },
    #[error("auxiliary divisor inconsistent with rank one: eta*sigma = {lhs} but hd*delta = {rhs}")]
    InconsistentAuxiliary { lhs: i64, rhs: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOnePair {
    name: String,
    delta: i64,
    kappa: i64,
    sigma: i64,
    eta: i64,
    hd: i64,
    seeds: BTreeMap<u32, Rational>,
}

/// Degrees `d >= 1` with `-kappa * d < 3`, in increasing order.
pub fn seed_degrees(kappa: i64) -> Vec<u32> {
    let m = -kappa;
    if m <= 0 {
        return Vec::new();
    }
    (1u32..).take_while(|&d| m * i64::from(d) < 3).collect()
}

impl RankOnePair {
    pub fn new(
        name: impl Into<String>,
        delta: i64,
        kappa: i64,
        sigma: i64,
        eta: i64,
        hd: i64,
        seeds: BTreeMap<u32, Rational>,
    ) -> Result<Self, PairError> {
        let name = name.into();
        if name.is_empty()
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
        {
            return Err(PairError::InvalidField {
                field: "name".into(),
                reason: format!("{name:?} is not an identifier"),
            });
        }
        if delta < 1 {
            return Err(PairError::NotAmple(delta));
        }
        if kappa >= 0 {
            return Err(PairError::NonPositiveAnticanonical(kappa));
        }
        for (field, v) in [("sigma", sigma), ("eta", eta), ("hd", hd)] {
            if v < 1 {
                return Err(PairError::InvalidField {
                    field: field.into(),
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        let (lhs, rhs) = (eta * sigma, hd * delta);
        if lhs != rhs {
            return Err(PairError::InconsistentAuxiliary { lhs, rhs });
        }
        let required = seed_degrees(kappa);
        for d in &required {
            if !seeds.contains_key(d) {
                return Err(PairError::MissingSeed(*d));
            }
        }
        if let Some(&degree) = seeds.keys().find(|d| !required.contains(d)) {
            return Err(PairError::UnexpectedSeed {
                degree,
                points: -kappa * degree as i64,
            });
        }
        Ok(Self { name, delta, kappa, sigma, eta, hd, seeds })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn delta(&self) -> i64 {
        self.delta
    }
    pub fn kappa(&self) -> i64 {
        self.kappa
    }
    pub fn sigma(&self) -> i64 {
        self.sigma
    }
    pub fn eta(&self) -> i64 {
        self.eta
    }
    pub fn hd(&self) -> i64 {
        self.hd
    }
    pub fn seeds(&self) -> &BTreeMap<u32, Rational> {
        &self.seeds
    }

    pub fn seed(&self, d: u32) -> Option<&Rational> {
        self.seeds.get(&d)
    }

    /// `D . beta` for `beta = d * g`.
    pub fn contact_order(&self, d: u32) -> i64 {
        self.delta * d as i64
    }

    /// `-K_log . beta`, the number of interior point conditions of `N_d`.
    pub fn points_unfixed(&self, d: u32) -> i64 {
        -self.kappa * d as i64
    }

    /// `-K_log . beta - 1`, the number of interior point conditions of `Nbar_d`.
    pub fn points_fixed(&self, d: u32) -> i64 {
        self.points_unfixed(d) - 1
    }

    /// Highest seeded degree.
    pub fn max_seed_degree(&self) -> u32 {
        self.seeds.keys().next_back().copied().unwrap_or(0)
    }

    /// Serializes to the config format accepted by [`load_custom`].
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "delta = {}", self.delta);
        let _ = writeln!(out, "kappa = {}", self.kappa);
        let _ = writeln!(out, "sigma = {}", self.sigma);
        let _ = writeln!(out, "eta = {}", self.eta);
        let _ = writeln!(out, "hd = {}", self.hd);
        for (d, v) in &self.seeds {
            let _ = writeln!(out, "seed.{d} = {}", format_rational(v));
        }
        out
    }

    /// Same geometry, ignoring the seeds.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.name == other.name
            && self.delta == other.delta
            && self.kappa == other.kappa
            && self.sigma == other.sigma
            && self.eta == other.eta
            && self.hd == other.hd
    }
}

/// `(P^2, line)`: generator is the line class, `H` is the line.
pub fn builtin_line() -> RankOnePair {
    let seeds = BTreeMap::from([(1, int(1))]);
    RankOnePair::new("line", 1, -2, 1, 1, 1, seeds).expect("built-in line pair is valid")
}

/// `(P^2, conic)`: generator is the line class, `D` has degree 2, `H` is a line.
///
/// `Nbar_2 = 1` comes from an independent relative invariant computation.
/// `Nbar_1 = 1` (the tangent line at the fixed point) is derived: it is the unique value
/// for which the degree-3 recursion `4 Nbar_3 = 16 Nbar_2 Nbar_1` agrees with
/// the closed form `Nbar_3 = 4`.
pub fn builtin_conic() -> RankOnePair {
    let seeds = BTreeMap::from([(1, int(1)), (2, int(1))]);
    RankOnePair::new("conic", 2, -1, 4, 1, 2, seeds).expect("built-in conic pair is valid")
}

/// Parses and validates a pair config (see the module docs for the grammar).
pub fn load_custom(text: &str) -> Result<RankOnePair, PairError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut seeds = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| PairError::Syntax {
            line: idx + 1,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(deg) = key.strip_prefix("seed.") {
            let d: u32 = deg.parse().ok().filter(|&d| d >= 1).ok_or_else(|| {
                PairError::InvalidField {
                    field: key.to_string(),
                    reason: "seed degree must be a positive integer".into(),
                }
            })?;
            let v = parse_rational(value).map_err(|e| PairError::InvalidField {
                field: key.to_string(),
                reason: e.to_string(),
            })?;
            if seeds.insert(d, v).is_some() {
                return Err(PairError::DuplicateKey(key.to_string()));
            }
            continue;
        }
        if !matches!(key, "name" | "delta" | "kappa" | "sigma" | "eta" | "hd") {
            return Err(PairError::UnknownKey(key.to_string()));
        }
        if fields.insert(key.to_string(), value.to_string()).is_some() {
            return Err(PairError::DuplicateKey(key.to_string()));
        }
    }
    let get = |k: &'static str| fields.get(k).ok_or(PairError::MissingField(k));
    let num = |k: &'static str| -> Result<i64, PairError> {
        get(k)?.parse().map_err(|_| PairError::InvalidField {
            field: k.into(),
            reason: "expected an integer".into(),
        })
    };
    let name = get("name")?.clone();
    RankOnePair::new(
        name,
        num("delta")?,
        num("kappa")?,
        num("sigma")?,
        num("eta")?,
        num("hd")?,
        seeds,
    )
}
