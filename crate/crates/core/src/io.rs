//! Table export (CSV / JSON) and the on-disk cache.
//!
//! Cache files are JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "pair": {"name": "line", "delta": 1, "kappa": -2, "sigma": 1, "eta": 1, "hd": 1},
//!   "entries": [[1, "1"], [2, "1"], [3, "7"]],
//!   "checksum": "<sha256 hex>"
//! }
//! ```
//!
//! The checksum is the SHA-256 of the lines `"<d>:<p/q>\n"` for every entry
//! in order. Writes go to a temporary file in the target directory which is
//! then renamed over the destination.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{format_rational, parse_rational, Rational};
use crate::closed::VerificationReport;
use crate::engine::{EngineError, InvariantTable};
use crate::pair::RankOnePair;

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache version {found} is not supported (expected {CACHE_VERSION})")]
    Version { found: u64 },
    #[error("cache parse error: {0}")]
    Parse(String),
    #[error("cache checksum mismatch")]
    Checksum,
    #[error("cache belongs to pair `{found}`, expected `{expected}`")]
    PairMismatch { expected: String, found: String },
    #[error("cache entries invalid: {0}")]
    Table(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CachePair {
    name: String,
    delta: i64,
    kappa: i64,
    sigma: i64,
    eta: i64,
    hd: i64,
}

impl From<&RankOnePair> for CachePair {
    fn from(p: &RankOnePair) -> Self {
        Self {
            name: p.name().to_string(),
            delta: p.delta(),
            kappa: p.kappa(),
            sigma: p.sigma(),
            eta: p.eta(),
            hd: p.hd(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    pair: CachePair,
    entries: Vec<(u32, String)>,
    checksum: String,
}

fn checksum(entries: &[(u32, String)]) -> String {
    let mut h = Sha256::new();
    for (d, v) in entries {
        h.update(format!("{d}:{v}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

/// Serialized cache contents for `table`.
pub fn cache_json(table: &InvariantTable) -> String {
    let entries: Vec<(u32, String)> = table.iter().map(|(d, v)| (d, format_rational(v))).collect();
    let file = CacheFile {
        version: CACHE_VERSION,
        pair: table.pair().into(),
        checksum: checksum(&entries),
        entries,
    };
    serde_json::to_string_pretty(&file).expect("cache file serializes") + "\n"
}

pub fn write_cache(table: &InvariantTable, path: &Path) -> Result<(), CacheError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(cache_json(table).as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CacheError::Io(e.error))?;
    Ok(())
}

/// Parses cache contents for `pair`.
pub fn parse_cache(text: &str, pair: &RankOnePair) -> Result<InvariantTable, CacheError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CacheError::Parse(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| CacheError::Parse("missing numeric `version`".into()))?;
    if version != u64::from(CACHE_VERSION) {
        return Err(CacheError::Version { found: version });
    }
    let file: CacheFile =
        serde_json::from_value(value).map_err(|e| CacheError::Parse(e.to_string()))?;
    if checksum(&file.entries) != file.checksum {
        return Err(CacheError::Checksum);
    }
    let expected = CachePair::from(pair);
    if file.pair != expected {
        return Err(CacheError::PairMismatch { expected: expected.name, found: file.pair.name });
    }
    let mut values = BTreeMap::new();
    for (d, v) in &file.entries {
        let v = parse_rational(v).map_err(|e| CacheError::Parse(format!("degree {d}: {e}")))?;
        if values.insert(*d, v).is_some() {
            return Err(CacheError::Parse(format!("duplicate degree {d}")));
        }
    }
    Ok(InvariantTable::from_values(pair.clone(), values)?)
}

pub fn read_cache(path: &Path, pair: &RankOnePair) -> Result<InvariantTable, CacheError> {
    parse_cache(&fs::read_to_string(path)?, pair)
}

/// Writes `table` to `path` and reads it back.
pub fn cache_roundtrip(table: &InvariantTable, path: &Path) -> Result<InvariantTable, CacheError> {
    write_cache(table, path)?;
    read_cache(path, table.pair())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub d: u32,
    #[serde(with = "crate::arith::serde_rational")]
    pub nbar: Rational,
    /// `N_d`, the invariant with unspecified tangency point.
    #[serde(with = "crate::arith::serde_rational")]
    pub n: Rational,
    pub points_fixed: i64,
    pub points_unfixed: i64,
    /// Floating-point rendering of `nbar`; informational only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_approx_non_authoritative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputationReport {
    pub pair: String,
    pub degree_min: u32,
    pub degree_max: u32,
    pub wall_time_ms: f64,
    pub rows: Vec<TableRow>,
    pub verifications: Vec<VerificationReport>,
}

impl ComputationReport {
    pub fn new(
        table: &InvariantTable,
        wall_time_ms: f64,
        decimal: bool,
        verifications: Vec<VerificationReport>,
    ) -> Self {
        let pair = table.pair();
        let rows = table
            .iter()
            .map(|(d, v)| TableRow {
                d,
                nbar: v.clone(),
                n: table.n_unfixed(d).expect("row exists"),
                points_fixed: pair.points_fixed(d),
                points_unfixed: pair.points_unfixed(d),
                nbar_approx_non_authoritative: decimal.then(|| v.to_f64().unwrap_or(f64::NAN)),
            })
            .collect();
        Self {
            pair: pair.name().to_string(),
            degree_min: 1,
            degree_max: table.max_degree(),
            wall_time_ms,
            rows,
            verifications,
        }
    }

    /// CSV with a single `#` header line carrying the run metadata (the only
    /// line that varies between identical invocations).
    pub fn to_csv(&self) -> String {
        let decimal = self.rows.iter().any(|r| r.nbar_approx_non_authoritative.is_some());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# pair={} degrees={}..={} wall_time_ms={:.3}",
            self.pair, self.degree_min, self.degree_max, self.wall_time_ms
        );
        out.push_str("d,nbar,n,points_fixed,points_unfixed");
        if decimal {
            out.push_str(",nbar_approx_non_authoritative");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.d,
                format_rational(&r.nbar),
                format_rational(&r.n),
                r.points_fixed,
                r.points_unfixed
            );
            if let Some(x) = r.nbar_approx_non_authoritative {
                let _ = write!(out, ",{x:e}");
            }
            out.push('\n');
        }
        out
    }

    /// Pretty JSON; `wall_time_ms` sits on its own line.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
