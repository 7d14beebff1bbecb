//! Evidence that an Artin–Hasse loop built from a torsion vector is `p^n`-torsion modulo `A`:
//! the logarithm identity splits `p^n log h` into an `A`-part and a negative-degree tail, every
//! exponential argument is small enough to converge, and `exp(−p^n t)·h^{p^n}` lies in `Â` on
//! a window.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use super::{FrobeniusDecomposition, LoopElement, SolitonError};
use crate::curve::GapData;
use crate::grassmann::GrassPoint;
use crate::padic::{PadicElement, PadicField};
use crate::series::LaurentSeries;

/// Exponent window `[lo, hi]` on which `exp(−p^n t)·h^{p^n}` is reduced against `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PnWindow {
    pub lo: i64,
    pub hi: i64,
}

/// Checks shared by every loop over one point `A`: the decompositions reconstruct their powers
/// and their `A`-parts reduce to zero against the standard basis of `A`.
#[derive(Clone, Debug)]
pub struct PnContext {
    a: GrassPoint<PadicElement>,
    gd: GapData,
    decomps: Vec<FrobeniusDecomposition>,
    pub reconstruction_ok: bool,
    /// Levels `k ≤ split_levels` have `A`-parts checked against the basis of `A`.
    pub split_levels: u32,
    pub a_parts_in_a: bool,
}

impl PnContext {
    pub fn new(
        a: GrassPoint<PadicElement>,
        gd: GapData,
        decomps: Vec<FrobeniusDecomposition>,
    ) -> Result<Self, SolitonError> {
        if decomps.is_empty() {
            return Err(SolitonError::MissingLevels { needed: 1, available: 0 });
        }
        let p = decomps[0].p as i64;
        let mu_g = gd.mu.last().copied().unwrap_or(1);
        let mut split_levels = 0u32;
        while (split_levels as usize + 1) < decomps.len() && p.pow(split_levels + 1) * mu_g <= a.cap() {
            split_levels += 1;
        }
        let reconstruction_ok = decomps.iter().all(|d| d.reconstruction_holds());
        let by_deg: BTreeMap<i64, &LaurentSeries<PadicElement>> =
            a.basis().iter().map(|v| (v.deg().unwrap(), v)).collect();
        let mut a_parts_in_a = true;
        for d in decomps.iter().take(split_levels as usize + 1) {
            for split in &d.b {
                let floor = d.floor.max(a.floor());
                let mut rem = split.a_part.truncate_below(floor);
                for n in (0..=rem.top()).rev() {
                    let c = rem.coeff_or_zero(n);
                    if c.is_zero() {
                        continue;
                    }
                    match by_deg.get(&n) {
                        Some(v) => rem = rem.sub(&v.truncate_below(floor).scale(&c))?,
                        None => a_parts_in_a = false,
                    }
                }
                if rem.terms().any(|(n, c)| n <= 0 && !c.is_zero()) {
                    a_parts_in_a = false;
                }
            }
        }
        Ok(PnContext { a, gd, decomps, reconstruction_ok, split_levels, a_parts_in_a })
    }

    pub fn point(&self) -> &GrassPoint<PadicElement> {
        &self.a
    }

    pub fn gap_data(&self) -> &GapData {
        &self.gd
    }

    pub fn decompositions(&self) -> &[FrobeniusDecomposition] {
        &self.decomps
    }
}

/// One convergence inequality `v(p^n c π_j^{p^k}/p^k) > n − 1 − k + p^k/(p^n − p^{n−1})
/// ≥ 1/(p − 1)` for `|c| ≤ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormInequality {
    pub k: u32,
    pub component: usize,
    pub actual: Ratio<i64>,
    pub bound: Ratio<i64>,
    pub floor: Ratio<i64>,
    pub strict: bool,
    pub bound_equals_floor: bool,
    /// Equality `bound = floor` is predicted exactly for `k ∈ {n − 1, n}`.
    pub expected_equality: bool,
}

impl NormInequality {
    pub fn holds(&self) -> bool {
        self.strict && self.bound >= self.floor && self.bound_equals_floor == self.expected_equality
    }
}

/// Evidence for `[h^{p^n}] = 1` modulo `A`.
#[derive(Clone, Debug)]
pub struct PnEvidence {
    pub level: u32,
    /// `π⃗ = 0`: the loop is `1` and the evidence is the identity.
    pub trivial: bool,
    pub residuals: Vec<PadicElement>,
    /// Residuals of valuation at least this bound count as zero (omitted logarithm terms).
    pub residual_bound: Ratio<i64>,
    /// `‖π⃗‖ ≤ |p|^{1/(p^n − p^{n−1})}`.
    pub norm_ok: bool,
    pub inequalities: Vec<NormInequality>,
    pub reconstruction_ok: bool,
    pub a_parts_in_a: bool,
    pub window: PnWindow,
    /// Gap and tail coefficients of the reduced window must have at least this valuation.
    pub certified_val: Option<Ratio<i64>>,
    /// Smallest valuation among the checked coefficients (`None`: all zero at precision).
    pub worst_val: Option<Ratio<i64>>,
    pub window_ok: bool,
}

impl PnEvidence {
    pub fn inequalities_ok(&self) -> bool {
        self.inequalities.iter().all(|q| q.holds())
    }

    pub fn passed(&self) -> bool {
        self.trivial
            || (self.norm_ok
                && self.inequalities_ok()
                && self.reconstruction_ok
                && self.a_parts_in_a
                && self.window_ok)
    }
}

fn qp_rational(field: &PadicField, num: i64, den: &BigInt) -> Result<PadicElement, SolitonError> {
    let qp = PadicField::qp(field.p(), field.precision())?;
    Ok(PadicElement::from_rational(&qp, &BigRational::new(BigInt::from(num), den.clone())))
}

/// Checks the logarithm identity, the convergence inequalities and the window homothety for a
/// loop built from a torsion vector of level `n`.
pub fn verify_pn_torsion(
    ctx: &PnContext,
    h: &LoopElement,
    n: u32,
    window: PnWindow,
) -> Result<PnEvidence, SolitonError> {
    let field = h.field().clone();
    let p = field.p() as i64;
    let g = ctx.gd.genus();
    let prov = h
        .provenance()
        .ok_or_else(|| SolitonError::PreconditionUnmet("loop is not an Artin–Hasse loop".into()))?;
    let mut pis = vec![field.zero(); g];
    for (m, x) in prov.mu.iter().zip(&prov.pis) {
        let j = ctx.gd.mu.iter().position(|y| y == m).ok_or_else(|| {
            SolitonError::PreconditionUnmet(format!("loop exponent {m} is not a gap of A"))
        })?;
        pis[j] = x.clone();
    }
    let base = PnEvidence {
        level: n,
        trivial: false,
        residuals: vec![field.zero(); g],
        residual_bound: Ratio::from_integer(0),
        norm_ok: true,
        inequalities: Vec::new(),
        reconstruction_ok: ctx.reconstruction_ok,
        a_parts_in_a: ctx.a_parts_in_a,
        window,
        certified_val: None,
        worst_val: None,
        window_ok: true,
    };
    if pis.iter().all(|x| x.is_zero()) {
        return Ok(PnEvidence { trivial: true, ..base });
    }
    let levels = ctx.decomps.len() as u32;
    let vals: Vec<Option<Ratio<i64>>> = pis.iter().map(|x| x.valuation()).collect();
    let vmin = vals.iter().flatten().min().copied().unwrap();
    let min_norm = Ratio::new(1, p.pow(n) - p.pow(n - 1));
    let norm_ok = vmin >= min_norm;
    // Bound for the terms k ≥ start of Σ p^{−k} π^{p^k}: valuation ≥ p^k v − k.
    let tail_bound = |start: u32| {
        (start..start + 8)
            .map(|k| Ratio::from_integer(p.pow(k)) * vmin - Ratio::from_integer(k as i64))
            .min()
            .unwrap()
    };

    // c_{jk} = π_j^{p^k} / p^k.
    let mut c: Vec<Vec<PadicElement>> = Vec::with_capacity(levels as usize);
    let mut pows = pis.clone();
    for k in 0..levels {
        if k > 0 {
            pows = pows.iter().map(|x| x.pow(p as u64)).collect();
        }
        let inv = qp_rational(&field, 1, &num_traits::pow(BigInt::from(p), k as usize))?;
        c.push(pows.iter().map(|x| x.mul_qp(&inv)).collect::<Result<_, _>>()?);
    }

    // 1. The logarithm identity: residual l⃗(π⃗) = Σ_{j,k} e_{ij}^{(k)} c_{jk}.
    let residual_bound = tail_bound(levels);
    let mut residuals = vec![field.zero(); g];
    for (k, d) in ctx.decomps.iter().enumerate() {
        for (i, r) in residuals.iter_mut().enumerate() {
            for j in 0..g {
                if !c[k][j].is_zero() && !d.e[i][j].is_exact_zero() {
                    *r = &*r + &c[k][j].mul_qp(&d.e[i][j])?;
                }
            }
        }
    }
    for r in &residuals {
        if !r.is_zero() && r.valuation().map_or(false, |v| v < residual_bound) {
            return Err(SolitonError::ResidualNonzero(r.valuation()));
        }
    }

    // 2. Convergence inequalities.
    let floor = Ratio::new(1, p - 1);
    let mut inequalities = Vec::new();
    for (j, v) in vals.iter().enumerate() {
        let Some(v) = v else { continue };
        for k in 0..=levels.max(n) {
            let pk = Ratio::from_integer(p.pow(k));
            let actual = Ratio::from_integer(n as i64 - k as i64) + pk * *v;
            let bound = Ratio::from_integer(n as i64 - 1 - k as i64) + pk * min_norm;
            inequalities.push(NormInequality {
                k,
                component: j,
                actual,
                bound,
                floor,
                strict: actual > bound,
                bound_equals_floor: bound == floor,
                expected_equality: k == n || k + 1 == n,
            });
        }
    }

    // 3. Window: u = exp(−p^n t) · h^{p^n} must lie in Â.
    let (lo, hi) = (window.lo, window.hi);
    let depth = hi - lo;
    if lo > 0 || hi < 1 {
        return Err(SolitonError::WindowInsufficient(format!("window [{lo}, {hi}] must contain 0 and 1")));
    }
    if ctx.decomps[0].floor > -depth {
        return Err(SolitonError::WindowInsufficient(format!(
            "remainder tails are known down to {} but {} is needed",
            ctx.decomps[0].floor, -depth
        )));
    }
    if ctx.a.floor() > lo || ctx.a.cap() < hi {
        return Err(SolitonError::WindowInsufficient(format!(
            "basis of A is known on [{}, {}], window needs [{lo}, {hi}]",
            ctx.a.floor(),
            ctx.a.cap()
        )));
    }
    let pn = qp_rational(&field, p.pow(n), &BigInt::from(1))?;
    let ks = ctx.split_levels as usize;
    // h^{p^n} = exp(p^n Σ c_{jk} T^{μ_j p^k}).
    let mut log_terms: Vec<(usize, PadicElement)> = Vec::new();
    for (k, ck) in c.iter().enumerate() {
        for (j, x) in ck.iter().enumerate() {
            let deg = ctx.gd.mu[j] * p.pow(k as u32);
            if deg <= hi && !x.is_zero() {
                let d = qp_rational(&field, deg, &BigInt::from(1))?;
                log_terms.push((deg as usize, x.mul_qp(&pn)?.mul_qp(&d)?));
            }
        }
    }
    let hpow = exp_recurrence(&field, &log_terms, hi as usize)?;
    // τ_d = coefficient of T^{−d} in −p^n t, from the checked levels.
    let mut tau = vec![field.zero(); depth as usize + 1];
    for (k, d) in ctx.decomps.iter().enumerate().take(ks + 1) {
        for (j, split) in d.b.iter().enumerate() {
            if c[k][j].is_zero() {
                continue;
            }
            let scale = c[k][j].mul_qp(&pn)?.neg_ref();
            for (e, x) in split.tail.terms() {
                if e < 0 && -e <= depth && !x.is_zero() {
                    let slot = &mut tau[(-e) as usize];
                    *slot = &*slot + &scale.mul_qp(x)?;
                }
            }
        }
    }
    let weighted: Vec<(usize, PadicElement)> = tau
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, x)| !x.is_zero())
        .map(|(d, x)| Ok((d, x.mul_qp(&qp_rational(&field, d as i64, &BigInt::from(1))?)?)))
        .collect::<Result<_, SolitonError>>()?;
    let fexp = exp_recurrence(&field, &weighted, depth as usize)?;
    let mut u: BTreeMap<i64, PadicElement> = BTreeMap::new();
    for e in lo..=hi {
        let mut acc = field.zero();
        for m in (-e).max(0)..=(hi - e) {
            let (f, hh) = (&fexp[m as usize], &hpow[(e + m) as usize]);
            if !f.is_zero() && !hh.is_zero() {
                acc = &acc + &(f * hh);
            }
        }
        u.insert(e, acc);
    }
    let by_deg: BTreeMap<i64, &LaurentSeries<PadicElement>> =
        ctx.a.basis().iter().map(|v| (v.deg().unwrap(), v)).collect();
    for e in (0..=hi).rev() {
        let Some(b) = by_deg.get(&e) else { continue };
        let cu = u[&e].clone();
        if cu.is_zero() {
            continue;
        }
        for (m, x) in b.terms() {
            if m >= lo && !x.is_zero() {
                let slot = u.get_mut(&m).unwrap();
                *slot = &*slot - &cu.mul_qp(x)?;
            }
        }
    }
    let rho = h.rho_val().unwrap();
    let mut certified = rho * Ratio::from_integer(hi + 1);
    if ks + 1 < levels as usize + 8 {
        certified = certified.min(Ratio::from_integer(n as i64) + tail_bound(ks as u32 + 1));
    }
    let checked = u.iter().filter(|(e, _)| **e < 0 || ctx.gd.mu.contains(e));
    let mut worst: Option<Ratio<i64>> = None;
    let mut window_ok = true;
    for (_, x) in checked {
        if let Some(v) = x.valuation() {
            worst = Some(worst.map_or(v, |w: Ratio<i64>| w.min(v)));
            if v < certified {
                window_ok = false;
            }
        }
    }
    Ok(PnEvidence {
        trivial: false,
        residuals,
        residual_bound,
        norm_ok,
        inequalities,
        certified_val: Some(certified),
        worst_val: worst,
        window_ok,
        ..base
    })
}

/// Coefficients `E_0..E_len` of `exp(Σ_d ℓ_d X^d)` given the weighted terms `(d, d·ℓ_d)`, from
/// `m E_m = Σ_d d ℓ_d E_{m−d}`.
fn exp_recurrence(
    field: &PadicField,
    weighted: &[(usize, PadicElement)],
    len: usize,
) -> Result<Vec<PadicElement>, SolitonError> {
    let mut out = vec![field.one()];
    for m in 1..=len {
        let mut s = field.zero();
        for (d, w) in weighted {
            if *d <= m && !out[m - d].is_zero() {
                s = &s + &(w * &out[m - d]);
            }
        }
        let inv = qp_rational(field, 1, &BigInt::from(m))?;
        out.push(s.mul_qp(&inv)?);
    }
    Ok(out)
}
