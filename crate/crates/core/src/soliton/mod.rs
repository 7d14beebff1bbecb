//! The soliton pipeline: Frobenius decompositions of `A` and the formal logarithm, Artin–Hasse
//! loops, torsion solvers, tau-function certificates that a torsion point avoids the theta
//! divisor, and `p^n`-torsion evidence for the loops.

mod frobenius;
mod loops;
mod pn;
mod theta;
mod torsion;

#[cfg(test)]
mod tests;

use num_rational::Ratio;
use thiserror::Error;

use crate::combinat::CombinatError;
use crate::curve::CurveError;
use crate::grassmann::{Certification, GrassError, Integrality, IntegralityReport};
use crate::padic::PadicError;
use crate::series::SeriesError;

pub use frobenius::{
    decompose_frobenius, decompose_frobenius_curve, formal_log, FormalLog, FrobeniusDecomposition, RemainderSplit,
};
pub use loops::{artin_hasse_coefficients, artin_hasse_loop, artin_hasse_multi, LoopElement, LoopProvenance};
pub use pn::{verify_pn_torsion, NormInequality, PnContext, PnEvidence, PnWindow};
pub use theta::{
    certify_torsion_point, closure_element, gamma_a_filtration_probe, tau_sato, theta_membership, window_tail_check,
    Component, DominanceCase, TauEvidence, TauValue, ThetaOutcome, TorsionCertificate, Verdict, WindowCheck,
};
pub use torsion::{solve_torsion_cyclic, solve_torsion_full, CyclicTorsion, FullTorsion, TorsionRoot};

/// Errors raised by the soliton pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitonError {
    #[error("point is not certified strictly integral: {0}")]
    NotStrictlyIntegral(String),
    #[error("degree cap {cap} is too small: need {needed}")]
    CapTooSmall { cap: i64, needed: i64 },
    #[error("loop parameter has valuation {0:?}; loops need |π| < 1")]
    NotInMaximalIdeal(Option<Ratio<i64>>),
    #[error("Hasse–Witt matrix is singular mod p")]
    NotOrdinary,
    #[error("residue field too small: the residue equations need unramified degree {}, at most {max} allowed", required.map_or_else(|| "beyond the search limit".to_string(), |f| f.to_string()))]
    ResidueFieldTooSmall { required: Option<u64>, max: usize },
    #[error("level {level} needs a totally ramified extension of degree {degree} defined by {polynomial}")]
    ExtensionUnavailable { level: u32, degree: u64, polynomial: String },
    #[error("formal logarithm has {available} levels; {needed} are needed")]
    MissingLevels { needed: usize, available: usize },
    #[error("coefficient e^({k}) at ({i}, {i}) is not a unit")]
    NonUnitCoefficient { k: u32, i: usize },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("element is not in the closure of A in Γ_ρ: coefficient of degree {degree} is too large")]
    NotInClosure { degree: i64 },
    #[error("torsion residual is not zero at precision (valuation {0:?})")]
    ResidualNonzero(Option<Ratio<i64>>),
    #[error("window is insufficient: {0}")]
    WindowInsufficient(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Grass(#[from] GrassError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Combinat(#[from] CombinatError),
}

/// Strict integrality backed by a finiteness argument, as the certificates require.
pub(crate) fn require_theorem_backed(report: &IntegralityReport) -> Result<(), SolitonError> {
    if report.class != Integrality::Strict {
        return Err(SolitonError::NotStrictlyIntegral(format!("class is {:?}", report.class)));
    }
    match &report.certification {
        Certification::TheoremBacked { .. } => Ok(()),
        Certification::CapChecked { cap } => {
            Err(SolitonError::NotStrictlyIntegral(format!("strictness is checked only through degree {cap}")))
        }
    }
}
