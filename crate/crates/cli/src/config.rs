//! Run configuration: a single JSON document naming a curve family, the prime, the precision,
//! the torsion level, window sizes and the checks to run.

use std::fmt;

use padic_soliton::curve::{BasePoint, BranchFactor, CurveModel};
use padic_soliton::padic::PadicField;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Precision used when neither the config nor the environment sets one.
pub const DEFAULT_PRECISION: u32 = 24;
/// Environment variable overriding the default precision.
pub const PRECISION_ENV: &str = "SOLITON_PRECISION";

/// A curve addressed by family tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveConfig {
    /// `y^d = x^a (x − 1)^{d+1−a}` based at infinity.
    FermatQuotient { d: u32, a: u32 },
    /// `y² = x^{2g+1} + x` based at infinity.
    #[serde(rename = "hyperelliptic-x5x")]
    HyperellipticX5x { g: u32 },
    /// `y^d = Π F_k^{a_k}` based at infinity.
    Superelliptic { d: u32, branch: Vec<BranchFactor> },
    /// `y² = f(x)` based at the affine point `(x0, y0)`; `curve` lists the coefficients of `f`
    /// from the constant term.
    AffineBase { curve: Vec<i64>, x0: i64, y0: i64 },
}

impl CurveConfig {
    /// Order of the automorphism whose eigenspaces split the logarithm, for families that
    /// carry one; the prime must be `1` modulo it.
    pub fn delta_order(&self) -> Option<u64> {
        match self {
            CurveConfig::FermatQuotient { d, .. } => Some(*d as u64),
            CurveConfig::HyperellipticX5x { g } => Some(4 * *g as u64),
            _ => None,
        }
    }

    /// `e_{11}^{(k)}` predicted by the family's binomial formula, when the family has one.
    pub fn log_formula(&self, p: u64, k: u32) -> Option<(u64, u64)> {
        let q = p.checked_pow(k)? - 1;
        match self {
            CurveConfig::FermatQuotient { d, a } => {
                let (d, b) = (*d as u64, (*d + 1 - *a) as u64);
                Some((q * b / d, q / d))
            }
            CurveConfig::HyperellipticX5x { g } => Some((q / 2, q / (4 * *g as u64))),
            _ => None,
        }
    }

    fn build(&self, field: PadicField) -> Result<CurveModel, padic_soliton::curve::CurveError> {
        match self {
            CurveConfig::FermatQuotient { d, a } => CurveModel::fermat_quotient(*d, *a, field),
            CurveConfig::HyperellipticX5x { g } => CurveModel::hyperelliptic_x_power(*g, field),
            CurveConfig::Superelliptic { d, branch } => CurveModel::new(*d, branch.clone(), BasePoint::Infinity, field),
            CurveConfig::AffineBase { curve, x0, y0 } => CurveModel::new(
                2,
                vec![BranchFactor::new(curve, 1)],
                BasePoint::Affine { x0: *x0, y0: *y0 },
                field,
            ),
        }
    }
}

impl fmt::Display for CurveConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveConfig::FermatQuotient { d, a } => write!(f, "fermat-quotient d={d} a={a}"),
            CurveConfig::HyperellipticX5x { g } => write!(f, "hyperelliptic-x5x g={g}"),
            CurveConfig::Superelliptic { d, branch } => write!(f, "superelliptic d={d} with {} factors", branch.len()),
            CurveConfig::AffineBase { curve, x0, y0 } => write!(f, "affine-base f={curve:?} at ({x0}, {y0})"),
        }
    }
}

/// A check the run can perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Gaps,
    HasseWitt,
    FormalLog,
    Torsion,
    Theta,
    All,
}

impl CheckName {
    pub const ORDERED: [CheckName; 5] =
        [CheckName::Gaps, CheckName::HasseWitt, CheckName::FormalLog, CheckName::Torsion, CheckName::Theta];

    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Gaps => "gaps",
            CheckName::HasseWitt => "hasse-witt",
            CheckName::FormalLog => "formal-log",
            CheckName::Torsion => "torsion",
            CheckName::Theta => "theta",
            CheckName::All => "all",
        }
    }
}

/// Exponent window for the `p^n`-torsion evidence of each certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PnWindowConfig {
    pub lo: i64,
    pub hi: i64,
}

/// Degree windows used by the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Basis vectors of `A` are materialised through this degree.
    pub cap: i64,
    /// Lowest stored exponent of the basis of `A`.
    pub floor: i64,
    /// The tail test uses basis vectors of degree at most this.
    pub top: i64,
    /// Lowest exponent of the Frobenius remainders.
    pub remainder_floor: i64,
    /// When set, every certificate also carries `p^n`-torsion evidence on this window.
    pub pn: Option<PnWindowConfig>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { cap: 16, floor: -4, top: 6, remainder_floor: -30, pn: None }
    }
}

/// The run configuration as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    /// `None` defers to the environment override or the default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub curve: CurveConfig,
    /// Torsion level `n` (1 or 2).
    #[serde(default = "default_level")]
    pub level: u32,
    /// Degree cap of the Artin–Hasse loops.
    #[serde(default = "default_weight_cap")]
    pub weight_cap: usize,
    /// Largest unramified degree the full torsion solve may use.
    #[serde(default = "default_max_unramified")]
    pub max_unramified: usize,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckName>,
}

fn default_level() -> u32 {
    1
}

fn default_weight_cap() -> usize {
    8
}

fn default_max_unramified() -> usize {
    12
}

fn default_checks() -> Vec<CheckName> {
    vec![CheckName::All]
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid { field: field.to_string(), message: message.into() }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl RunConfig {
    /// A config for the given curve with every other field at its default.
    pub fn new(p: u64, curve: CurveConfig) -> Self {
        RunConfig {
            p,
            precision: None,
            curve,
            level: default_level(),
            weight_cap: default_weight_cap(),
            max_unramified: default_max_unramified(),
            window: WindowConfig::default(),
            checks: default_checks(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))
    }

    /// Fills in the precision from the environment value (if any) or the default.
    pub fn resolve_precision(&mut self, env: Option<&str>) -> Result<(), CliError> {
        if self.precision.is_none() {
            self.precision = Some(match env {
                Some(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| invalid(PRECISION_ENV, format!("not a positive integer: {s:?}")))?,
                None => DEFAULT_PRECISION,
            });
        }
        Ok(())
    }

    /// The checks to run, in pipeline order without repetition.
    pub fn selected_checks(&self) -> Vec<CheckName> {
        if self.checks.contains(&CheckName::All) {
            return CheckName::ORDERED.to_vec();
        }
        CheckName::ORDERED.iter().copied().filter(|c| self.checks.contains(c)).collect()
    }

    /// Validates every field before any computation and builds the curve.
    pub fn validate(&self) -> Result<CurveModel, CliError> {
        let p = self.p;
        if !is_prime(p) || p < 3 {
            return Err(invalid("p", format!("{p} is not an odd prime")));
        }
        let n = self.precision.unwrap_or(DEFAULT_PRECISION);
        if !(4..=200).contains(&n) {
            return Err(invalid("precision", format!("{n} is outside 4..=200")));
        }
        if !(1..=2).contains(&self.level) {
            return Err(invalid("level", format!("{} is outside 1..=2", self.level)));
        }
        if self.weight_cap < 2 {
            return Err(invalid("weight_cap", "must be at least 2"));
        }
        let w = &self.window;
        if w.floor > 0 || w.top < 1 || w.top > w.cap || w.remainder_floor > -1 {
            return Err(invalid("window", "need floor ≤ 0, 1 ≤ top ≤ cap and remainder_floor < 0"));
        }
        if let Some(pn) = w.pn {
            if pn.lo > 0 || pn.hi < 1 {
                return Err(invalid("window.pn", "the window must contain 0 and 1"));
            }
        }
        match &self.curve {
            CurveConfig::FermatQuotient { d, a } if *d < 2 || *a == 0 || *a >= *d => {
                return Err(invalid("curve.a", format!("need 0 < a < d, got d = {d}, a = {a}")));
            }
            CurveConfig::HyperellipticX5x { g } if *g == 0 => return Err(invalid("curve.g", "genus must be positive")),
            CurveConfig::Superelliptic { d, branch } if *d < 2 || branch.is_empty() => {
                return Err(invalid("curve.branch", "need d ≥ 2 and at least one branch factor"));
            }
            CurveConfig::AffineBase { curve, .. } if curve.len() < 4 || curve.len() % 2 != 0 => {
                return Err(invalid("curve.curve", "f must have odd degree at least 3"));
            }
            _ => {}
        }
        if let Some(m) = self.curve.delta_order() {
            if p % m != 1 {
                return Err(invalid("p", format!("the family needs p ≡ 1 mod {m}, got p = {p}")));
            }
        }
        let field = PadicField::qp(p, n).map_err(|e| invalid("precision", e.to_string()))?;
        self.curve.build(field).map_err(|e| invalid("curve", e.to_string()))
    }
}
