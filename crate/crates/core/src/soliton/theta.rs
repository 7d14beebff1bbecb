//! Tau functions through the Sato expansion, theta-divisor certificates for loops acting on a
//! strictly integral point, the direct window test for `hV ∩ {deg ≤ −i(V)} = 0`, and the
//! filtration probe on the closure of `A`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{artin_hasse_multi, require_theorem_backed, FormalLog, LoopElement, SolitonError};
use crate::combinat::{determinant, schur, Partition};
use crate::curve::GapData;
use crate::grassmann::{GrassPoint, IntegralityReport};
use crate::padic::{PadicElement, ResidueElement};
use crate::series::LaurentSeries;

/// Verdict on whether `[hV]` lies on the theta divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    OutsideTheta,
    MemberOfTheta,
    Inconclusive,
}

/// Which torsion set a certificate belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// The one-variable set `T_{n,i}` (0-based `i`).
    Index(usize),
    /// Vector solutions `T_n`.
    Full,
}

/// The configuration that makes `S_κ(h)` dominant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceCase {
    /// `h = h(T; π)` with `κ_1 + l(κ) ≤ p`: `S_κ(h) = π^{|κ|}/Π hooks`.
    SingleLoop,
    /// `h = h_{(1..g)}(T; π⃗)` with `|π_i| ≤ |π_g|` and `κ = (g)`: `S_κ(h) = h_g`.
    MultiLoop,
    /// `h = 1`.
    Identity,
}

/// Evidence that `|S_κ(h)| = ρ^{|κ|}`.
#[derive(Clone, Debug)]
pub struct TauEvidence {
    pub kappa: Partition,
    pub case: DominanceCase,
    pub rho_val: Option<Ratio<i64>>,
    pub s_kappa: PadicElement,
    pub s_kappa_val: Option<Ratio<i64>>,
    /// `|κ|·v(ρ)`.
    pub expected_val: Option<Ratio<i64>>,
    /// `v(S_κ(h)) = |κ| v(ρ)` with `S_κ(h)` nonzero at precision.
    pub exact: bool,
    pub theorem_backed: bool,
}

/// The direct test: rows `h·a_s` for basis elements of degree `≤ top`, columns the exponents
/// `1 − i(V), …`; full rank means no nonzero combination has degree `≤ −i(V)`.
#[derive(Clone, Debug)]
pub struct WindowCheck {
    pub rows: usize,
    pub first_column: i64,
    pub last_column: i64,
    pub det_val: Option<Ratio<i64>>,
    /// Lower bound for the valuation of the truncation error in every entry (`None`: exact).
    pub error_val: Option<Ratio<i64>>,
    /// `det ≠ 0` with valuation below the error bound.
    pub full_rank: bool,
    /// The determinant vanishes and the entries are exact.
    pub exact_kernel: bool,
}

#[derive(Clone, Debug)]
pub struct ThetaOutcome {
    pub tau: TauEvidence,
    pub window: WindowCheck,
    pub verdict: Verdict,
}

/// A partial Sato expansion with its truncation bound.
#[derive(Clone, Debug)]
pub struct TauValue {
    pub value: PadicElement,
    /// Every omitted term has valuation `≥ (weight_cap + 1) v(ρ)` (`None`: nothing omitted).
    pub truncation_val: Option<Ratio<i64>>,
    pub terms: usize,
}

/// Full evidence chain for one torsion point.
#[derive(Clone, Debug)]
pub struct TorsionCertificate {
    pub level: u32,
    pub component: Component,
    pub pis: Vec<PadicElement>,
    pub mu: Vec<i64>,
    pub valuations: Vec<Option<Ratio<i64>>>,
    /// `‖π⃗‖ ≤ |p|^{1/(p^n − p^{n−1})}`.
    pub valuation_ok: bool,
    pub residuals: Vec<PadicElement>,
    pub residual_zero: bool,
    pub tau: TauEvidence,
    pub window: WindowCheck,
    pub hypotheses: Vec<String>,
    pub verdict: Verdict,
}

/// `τ_V(h) ≈ Σ_{|λ| ≤ weight_cap, λ ⊇ κ(V)} P_λ(V) S_λ(h)`.
pub fn tau_sato(
    v: &GrassPoint<PadicElement>,
    report: &IntegralityReport,
    h: &LoopElement,
    weight_cap: usize,
) -> Result<TauValue, SolitonError> {
    require_theorem_backed(report)?;
    if h.cap() < weight_cap {
        return Err(SolitonError::CapTooSmall { cap: h.cap() as i64, needed: weight_cap as i64 });
    }
    let kappa = v.partition();
    let mut value = h.field().zero();
    let mut terms = 0;
    for lambda in Partition::all_up_to(weight_cap) {
        if !kappa.le(&lambda) {
            continue;
        }
        let pl = v.plucker(&lambda)?;
        if pl.is_exact_zero() {
            continue;
        }
        let s = schur(&lambda, h.coeffs())?;
        value = &value + &s.mul_qp(&pl)?;
        terms += 1;
    }
    let truncation_val = h.rho_val().map(|r| r * Ratio::from_integer(weight_cap as i64 + 1));
    Ok(TauValue { value, truncation_val, terms })
}

fn dominance_case(kappa: &Partition, h: &LoopElement, p: u64) -> Result<DominanceCase, SolitonError> {
    if h.is_identity() {
        return Ok(DominanceCase::Identity);
    }
    let prov = h
        .provenance()
        .ok_or_else(|| SolitonError::PreconditionUnmet("loop is not an Artin–Hasse loop".into()))?;
    let g = prov.mu.len();
    let consecutive = prov.mu.iter().enumerate().all(|(i, &m)| m == i as i64 + 1);
    let last = &prov.pis[g - 1];
    if g >= 2 && consecutive && (g as u64) < p && kappa.parts() == [g] && !last.is_zero() {
        let vg = last.valuation().unwrap();
        if prov.pis.iter().all(|x| x.valuation().map_or(true, |v| v >= vg)) {
            return Ok(DominanceCase::MultiLoop);
        }
    }
    let live: Vec<usize> = (0..g).filter(|&i| !prov.pis[i].is_zero()).collect();
    if live.len() == 1 && prov.mu[live[0]] == 1 {
        if (kappa.part(1) + kappa.len()) as u64 <= p {
            return Ok(DominanceCase::SingleLoop);
        }
        return Err(SolitonError::PreconditionUnmet(format!("κ = {kappa} has κ_1 + l(κ) > p = {p}")));
    }
    Err(SolitonError::PreconditionUnmet(
        "loop parameters satisfy neither the one-variable nor the norm-ordering configuration".into(),
    ))
}

/// Decides `[hV] ∉ Θ` from the exact dominance `|S_κ(h)| = ρ^{|κ|}` and cross-checks it with the
/// window test on basis elements of degree `≤ top`.
pub fn theta_membership(
    v: &GrassPoint<PadicElement>,
    report: &IntegralityReport,
    h: &LoopElement,
    top: i64,
) -> Result<ThetaOutcome, SolitonError> {
    let kappa = v.partition().clone();
    let p = h.field().p();
    let case = dominance_case(&kappa, h, p)?;
    let needed = kappa.part(1) + kappa.len();
    if h.cap() + 1 < needed {
        return Err(SolitonError::CapTooSmall { cap: h.cap() as i64, needed: needed as i64 - 1 });
    }
    let s = schur(&kappa, h.coeffs())?;
    let s_val = s.valuation();
    let expected_val = h.rho_val().map(|r| r * Ratio::from_integer(kappa.weight() as i64));
    let exact = !s.is_zero() && s_val.is_some() && s_val == expected_val;
    let theorem_backed = require_theorem_backed(report).is_ok();
    let window = window_tail_check(v, h, top)?;
    let verdict = match case {
        DominanceCase::Identity => {
            if v.tail_intersection_dim(-v.index())? > 0 {
                Verdict::MemberOfTheta
            } else {
                Verdict::OutsideTheta
            }
        }
        _ if exact && theorem_backed && !window.exact_kernel => Verdict::OutsideTheta,
        _ => Verdict::Inconclusive,
    };
    let tau = TauEvidence {
        kappa,
        case,
        rho_val: h.rho_val(),
        s_kappa: s,
        s_kappa_val: s_val,
        expected_val,
        exact,
        theorem_backed,
    };
    Ok(ThetaOutcome { tau, window, verdict })
}

/// The window test for `hV ∩ {deg ≤ −i(V)} = 0` on basis elements of degree `≤ top`.
pub fn window_tail_check(
    v: &GrassPoint<PadicElement>,
    h: &LoopElement,
    top: i64,
) -> Result<WindowCheck, SolitonError> {
    if top > v.cap() {
        return Err(SolitonError::CapTooSmall { cap: v.cap(), needed: top });
    }
    let zero = Ratio::from_integer(0);
    let rows: Vec<&LaurentSeries<PadicElement>> = v.basis().iter().filter(|b| b.deg().unwrap() <= top).collect();
    if rows.iter().any(|b| b.norm_val().map_or(false, |n| n < zero)) {
        return Err(SolitonError::PreconditionUnmet("window test needs an integral basis".into()));
    }
    let field = h.field().clone();
    let c0 = 1 - v.index();
    let r = rows.len();
    let floor = v.floor();
    let cap = h.cap() as i64;
    let hc = h.coeffs();
    let mut m = vec![vec![field.zero(); r]; r];
    for (a, row) in rows.iter().enumerate() {
        for (b, slot) in m[a].iter_mut().enumerate() {
            let n = c0 + b as i64;
            let mut acc = field.zero();
            let lo_i = (n - row.top()).max(0);
            let hi_i = cap.min(n - floor);
            for i in lo_i..=hi_i {
                let a_coeff = row.coeff_or_zero(n - i);
                if a_coeff.is_zero() || hc[i as usize].is_exact_zero() {
                    continue;
                }
                acc = &acc + &hc[i as usize].mul_qp(&a_coeff)?;
            }
            *slot = acc;
        }
    }
    let error_val = h.rho_val().map(|rho| rho * Ratio::from_integer((cap + 1).min(c0 - floor + 1)));
    let det = if r == 0 { field.one() } else { determinant(&field, m) };
    let det_val = det.valuation();
    let full_rank = match (det_val, error_val) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(d), Some(e)) => d < e,
    };
    let exact_kernel = det.is_zero() && error_val.is_none();
    Ok(WindowCheck {
        rows: r,
        first_column: c0,
        last_column: c0 + r as i64 - 1,
        det_val,
        error_val,
        full_rank,
        exact_kernel,
    })
}

/// Builds the Artin–Hasse loop of a torsion point and certifies its theta verdict together with
/// the torsion residual and the norm condition `‖π⃗‖ ≤ |p|^{1/(p^n − p^{n−1})}`.
#[allow(clippy::too_many_arguments)]
pub fn certify_torsion_point(
    v: &GrassPoint<PadicElement>,
    report: &IntegralityReport,
    log: &FormalLog,
    level: u32,
    component: Component,
    pis: Vec<PadicElement>,
    loop_cap: usize,
    window_top: i64,
    hypotheses: Vec<String>,
) -> Result<TorsionCertificate, SolitonError> {
    let p = log.p() as i64;
    let mu: Vec<i64> = match &component {
        Component::Index(i) => vec![log.mu()[*i]],
        Component::Full => log.mu().to_vec(),
    };
    if pis.len() != mu.len() {
        return Err(SolitonError::PreconditionUnmet("one parameter per exponent is required".into()));
    }
    let residuals = match &component {
        Component::Index(i) => vec![log.eval_component(*i, &pis[0])?],
        Component::Full => log.eval(&pis)?,
    };
    let valuations: Vec<Option<Ratio<i64>>> = pis.iter().map(|x| x.valuation()).collect();
    let min_val = Ratio::new(1, p.pow(level) - p.pow(level - 1));
    let valuation_ok = valuations.iter().all(|v| v.map_or(true, |v| v >= min_val));
    let bound = log.omitted_bound(valuations.iter().flatten().min().copied().unwrap_or(min_val));
    let residual_zero = residuals.iter().all(|r| r.is_zero() || r.valuation().map_or(false, |v| v >= bound));
    let h = artin_hasse_multi(&pis, &mu, loop_cap)?;
    let theta = theta_membership(v, report, &h, window_top)?;
    let verdict = match theta.verdict {
        Verdict::OutsideTheta if !(residual_zero && valuation_ok) => Verdict::Inconclusive,
        other => other,
    };
    Ok(TorsionCertificate {
        level,
        component,
        pis,
        mu,
        valuations,
        valuation_ok,
        residuals,
        residual_zero,
        tau: theta.tau,
        window: theta.window,
        hypotheses,
        verdict,
    })
}

/// `h = Σ_s c_s a_s` for basis elements `a_s` of `A`, after checking `|c_s| ≤ |π|^s`.
pub fn closure_element(
    a: &GrassPoint<PadicElement>,
    combination: &[(i64, PadicElement)],
    pi: &PadicElement,
) -> Result<LaurentSeries<PadicElement>, SolitonError> {
    let vp = pi.valuation().ok_or(SolitonError::NotInMaximalIdeal(None))?;
    let field = pi.field().clone();
    let mut h = LaurentSeries::zero(&field, a.floor());
    for (s, c) in combination {
        if let Some(vc) = c.valuation() {
            if vc < vp * Ratio::from_integer(*s) {
                return Err(SolitonError::NotInClosure { degree: *s });
            }
        }
        let basis = a
            .basis()
            .iter()
            .find(|b| b.deg() == Some(*s))
            .ok_or_else(|| SolitonError::PreconditionUnmet(format!("{s} is not a degree of A")))?;
        let terms: Vec<(i64, PadicElement)> = basis
            .terms()
            .map(|(n, x)| Ok((n, c.mul_qp(x)?)))
            .collect::<Result<_, SolitonError>>()?;
        h = h.add(&LaurentSeries::from_terms(&field, a.floor(), &terms))?;
    }
    Ok(h)
}

/// Residues of `h_{μ_j} / π^{μ_j}` for an element `h` with `|h_i| ≤ |π|^i` at positive
/// exponents.
pub fn gamma_a_filtration_probe(
    h: &LaurentSeries<PadicElement>,
    gd: &GapData,
    pi: &PadicElement,
) -> Result<Vec<ResidueElement>, SolitonError> {
    let vp = pi.valuation().ok_or(SolitonError::NotInMaximalIdeal(None))?;
    for (n, c) in h.terms().filter(|(n, _)| *n > 0) {
        if let Some(v) = c.valuation() {
            if v < vp * Ratio::from_integer(n) {
                return Err(SolitonError::NotInClosure { degree: n });
            }
        }
    }
    gd.mu
        .iter()
        .map(|&m| {
            let c = h.coeff_or_zero(m);
            Ok(c.div(&pi.pow(m as u64))?.residue()?)
        })
        .collect()
}
