//! Artin–Hasse loops `h(T; π) = exp(Σ_k (πT)^{p^k}/p^k)` and their products
//! `Π_i h(T^{μ_i}; π_i)`, stored as truncated power series with a certified decay rate.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use super::SolitonError;
use crate::padic::{PadicElement, PadicField};
use crate::series::{LaurentSeries, Tail, WindowSeries};

/// Coefficients `E_0, …, E_n` of the Artin–Hasse exponential, from `n E_n = Σ_k E_{n − p^k}`.
pub fn artin_hasse_coefficients(p: u64, n: usize) -> Vec<BigRational> {
    let mut powers = Vec::new();
    let mut q = 1usize;
    while q <= n.max(1) {
        powers.push(q);
        match q.checked_mul(p as usize) {
            Some(next) => q = next,
            None => break,
        }
    }
    let mut e: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=n {
        let mut s = BigRational::zero();
        for &q in powers.iter().filter(|&&q| q <= m) {
            s += &e[m - q];
        }
        e.push(s / BigRational::from_integer(BigInt::from(m)));
    }
    e
}

/// The parameters a loop was built from.
#[derive(Clone, Debug)]
pub struct LoopProvenance {
    pub mu: Vec<i64>,
    pub pis: Vec<PadicElement>,
}

/// An element `h = Σ_{i ≤ cap} h_i T^i` of `Γ_+` with `h_0 = 1` and a certified bound
/// `|h_i| ≤ ρ^i` for every `i`, stored and unstored.
#[derive(Clone, Debug)]
pub struct LoopElement {
    coeffs: Vec<PadicElement>,
    rho_val: Option<Ratio<i64>>,
    provenance: Option<LoopProvenance>,
}

impl LoopElement {
    /// The constant loop `1` (`ρ = 0`).
    pub fn identity(field: &PadicField, cap: usize) -> Self {
        let mut coeffs = vec![PadicElement::zero(field); cap + 1];
        coeffs[0] = PadicElement::one(field);
        LoopElement { coeffs, rho_val: None, provenance: None }
    }

    /// A loop from explicit coefficients with a claimed decay valuation `v(ρ)` (`None` for
    /// `ρ = 0`); the claim is checked on the stored coefficients.
    pub fn from_coeffs(coeffs: Vec<PadicElement>, rho_val: Option<Ratio<i64>>) -> Result<Self, SolitonError> {
        let h = LoopElement { coeffs, rho_val, provenance: None };
        if h.coeffs.is_empty() || !h.coeffs[0].eq_at_precision(&PadicElement::one(h.field())) {
            return Err(SolitonError::PreconditionUnmet("loop must have constant term 1".into()));
        }
        if !h.satisfies_bound() {
            return Err(SolitonError::PreconditionUnmet("coefficients exceed the claimed decay".into()));
        }
        Ok(h)
    }

    pub fn field(&self) -> &PadicField {
        self.coeffs[0].field()
    }

    pub fn coeffs(&self) -> &[PadicElement] {
        &self.coeffs
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `v(ρ)`; `None` means `ρ = 0` (the constant loop).
    pub fn rho_val(&self) -> Option<Ratio<i64>> {
        self.rho_val
    }

    pub fn provenance(&self) -> Option<&LoopProvenance> {
        self.provenance.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_exact_zero())
    }

    /// `|h_i| ≤ ρ^i` on the stored coefficients.
    pub fn satisfies_bound(&self) -> bool {
        self.coeffs.iter().enumerate().skip(1).all(|(i, c)| match (c.valuation(), self.rho_val) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(v), Some(r)) => v >= r * Ratio::from_integer(i as i64),
        })
    }

    /// Membership in `Γ_+ ∩ Γ_ρ`: `h_0 = 1`, `ρ < 1` and the decay bound.
    pub fn in_gamma_plus(&self) -> bool {
        let one = PadicElement::one(self.field());
        self.coeffs[0].eq_at_precision(&one)
            && self.rho_val.map_or(true, |r| r > Ratio::from_integer(0))
            && self.satisfies_bound()
    }

    /// The loop as a power series kept at exponents `≥ floor`.
    pub fn as_series(&self, floor: i64) -> LaurentSeries<PadicElement> {
        let mut c = vec![PadicElement::zero(self.field()); (-floor).max(0) as usize];
        c.extend(self.coeffs.iter().cloned());
        LaurentSeries::new(self.field(), floor.min(0), c)
    }

    /// The loop as a window `[0, cap]` whose unstored coefficients are bounded by `ρ^i`.
    pub fn as_window(&self) -> WindowSeries<PadicElement> {
        let above = match self.rho_val {
            None => Tail::Zero,
            Some(r) => Tail::Bounded { base: r * Ratio::from_integer(self.cap() as i64 + 1), slope: r },
        };
        WindowSeries::new(self.field(), 0, self.coeffs.clone(), Tail::Zero, above)
    }
}

/// `h(T; π)` to degree `cap`.
pub fn artin_hasse_loop(pi: &PadicElement, cap: usize) -> Result<LoopElement, SolitonError> {
    artin_hasse_multi(std::slice::from_ref(pi), &[1], cap)
}

/// `h_μ(T; π⃗) = Π_i h(T^{μ_i}; π_i)` to degree `cap`, with `v(ρ) = min_i v(π_i)/μ_i`.
pub fn artin_hasse_multi(pis: &[PadicElement], mu: &[i64], cap: usize) -> Result<LoopElement, SolitonError> {
    let field = pis
        .first()
        .ok_or_else(|| SolitonError::PreconditionUnmet("no loop parameters".into()))?
        .field()
        .clone();
    if pis.len() != mu.len() || mu.iter().any(|&m| m <= 0) {
        return Err(SolitonError::PreconditionUnmet("exponents must be positive, one per parameter".into()));
    }
    let zero = Ratio::from_integer(0);
    let mut rho_val: Option<Ratio<i64>> = None;
    for (pi, &m) in pis.iter().zip(mu) {
        if pi.is_zero() {
            continue;
        }
        let v = pi.valuation().unwrap();
        if v <= zero {
            return Err(SolitonError::NotInMaximalIdeal(Some(v)));
        }
        let r = v / Ratio::from_integer(m);
        rho_val = Some(rho_val.map_or(r, |x: Ratio<i64>| x.min(r)));
    }
    let qp = PadicField::qp(field.p(), field.precision())?;
    let e: Vec<PadicElement> =
        artin_hasse_coefficients(field.p(), cap).iter().map(|c| PadicElement::from_rational(&qp, c)).collect();
    let mut acc: Vec<PadicElement> = vec![PadicElement::zero(&field); cap + 1];
    acc[0] = PadicElement::one(&field);
    for (pi, &m) in pis.iter().zip(mu) {
        if pi.is_zero() {
            continue;
        }
        let m = m as usize;
        // Factor h(T^m; π): coefficient E_i π^i at T^{m i}.
        let mut factor: Vec<(usize, PadicElement)> = Vec::new();
        let mut pow = PadicElement::one(&field);
        for (i, ei) in e.iter().enumerate().take(cap / m + 1) {
            if i > 0 {
                pow = &pow * pi;
            }
            factor.push((i * m, pow.mul_qp(ei)?));
        }
        let mut next = vec![PadicElement::zero(&field); cap + 1];
        for (a, x) in acc.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            for (b, y) in &factor {
                if a + b > cap {
                    break;
                }
                next[a + b] = &next[a + b] + &(x * y);
            }
        }
        acc = next;
    }
    Ok(LoopElement {
        coeffs: acc,
        rho_val,
        provenance: Some(LoopProvenance { mu: mu.to_vec(), pis: pis.to_vec() }),
    })
}
