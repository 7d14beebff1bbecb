//! The versioned report document and its JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{CheckName, RunConfig};
use crate::CliError;

/// Schema identifier carried by every report.
pub const SCHEMA: &str = "soliton-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Any failure dominates, then any inconclusive result.
    pub fn combine(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().max().unwrap_or(Status::Pass)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    /// The configuration with the precision resolved.
    pub config: RunConfig,
    pub status: Status,
    pub checks: Vec<CheckReport>,
    /// Wall-clock milliseconds per check, present only when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: CheckName,
    pub status: Status,
    pub summary: String,
    pub details: CheckDetails,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckDetails {
    Gaps(GapsReport),
    HasseWitt(HasseWittReport),
    FormalLog(FormalLogReport),
    Torsion(TorsionReport),
    Theta(ThetaReport),
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapsReport {
    pub gaps: Vec<i64>,
    pub reduction_gaps: Vec<i64>,
    pub genus: usize,
    pub maya_low: Vec<i64>,
    pub maya_gaps: Vec<i64>,
    pub index: i64,
    pub partition: String,
    pub integrality: String,
    pub certification: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseWittReport {
    pub matrix: Vec<Vec<u64>>,
    pub determinant: u64,
    pub ordinary: bool,
    pub product_rule: Vec<(u32, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalLogReport {
    pub levels: usize,
    pub mu: Vec<i64>,
    /// `e^{(k)}` for `k = 0, 1, …` as integers modulo `p^N`.
    pub matrices: Vec<Vec<Vec<String>>>,
    pub diagonal: bool,
    pub reconstruction_ok: bool,
    pub integral: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formula: Vec<FormulaCheck>,
}

/// `e_{11}^{(k)}` against `binom(top, bottom)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub k: u32,
    pub top: u64,
    pub bottom: u64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub cyclic: Vec<CyclicReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<FullReport>,
    /// Solves that could not run, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicReport {
    pub component: usize,
    pub level: u32,
    pub eisenstein: String,
    pub extension_degree: u64,
    pub roots: usize,
    /// Number of roots per valuation (`"zero"` for the zero root).
    pub valuation_counts: BTreeMap<String, usize>,
    pub residuals_zero: bool,
    pub distinct: bool,
    pub polygon_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullReport {
    pub residue_degree: usize,
    pub ramification: String,
    pub points: usize,
    /// Points whose last coordinate has the minimal valuation `1/(p − 1)`.
    pub last_coordinate_minimal: usize,
    pub residuals_zero: bool,
    pub distinct: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub outside: usize,
    pub member: usize,
    pub inconclusive: usize,
    pub certificates: Vec<CertificateReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub level: u32,
    pub component: String,
    pub field: String,
    pub pis: Vec<String>,
    pub mu: Vec<i64>,
    pub valuations: Vec<Option<String>>,
    pub valuation_ok: bool,
    pub residual_valuations: Vec<Option<String>>,
    pub residual_zero: bool,
    pub kappa: String,
    pub case: String,
    pub rho_val: Option<String>,
    pub s_kappa_val: Option<String>,
    pub expected_val: Option<String>,
    pub exact: bool,
    pub theorem_backed: bool,
    pub window: WindowReport,
    pub hypotheses: Vec<String>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pn: Option<PnReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    pub rows: usize,
    pub first_column: i64,
    pub last_column: i64,
    pub det_val: Option<String>,
    pub error_val: Option<String>,
    pub full_rank: bool,
    pub exact_kernel: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PnReport {
    pub level: u32,
    pub passed: bool,
    pub trivial: bool,
    pub norm_ok: bool,
    pub inequalities: usize,
    pub inequalities_ok: bool,
    pub reconstruction_ok: bool,
    pub a_parts_in_a: bool,
    pub window: (i64, i64),
    pub certified_val: Option<String>,
    pub worst_val: Option<String>,
    pub window_ok: bool,
}

/// Output format of `emit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl Report {
    pub fn new(config: RunConfig, checks: Vec<CheckReport>, timings: Option<BTreeMap<String, u64>>) -> Self {
        let status = Status::combine(checks.iter().map(|c| c.status));
        Report { schema: SCHEMA.to_string(), config, status, checks, timings }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))
    }
}

/// Renders the report; JSON keeps the declared field order.
pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Format::Text => render_text(report),
    }
}

fn render_text(r: &Report) -> String {
    let c = &r.config;
    let mut out = String::new();
    let _ = writeln!(out, "{} ({})", r.schema, c.curve);
    let _ = writeln!(
        out,
        "p = {}, N = {}, level {}",
        c.p,
        c.precision.map_or_else(|| "default".to_string(), |n| n.to_string()),
        c.level
    );
    let _ = writeln!(out, "{:<12} {:<13} summary", "check", "status");
    for check in &r.checks {
        let _ = writeln!(out, "{:<12} {:<13} {}", check.name.as_str(), check.status.as_str(), check.summary);
    }
    if let Some(t) = &r.timings {
        for (k, ms) in t {
            let _ = writeln!(out, "time {k}: {ms} ms");
        }
    }
    let _ = writeln!(out, "overall: {}", r.status.as_str());
    out
}
