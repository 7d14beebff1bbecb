//! Decompositions `T^{μ_j p^k} = a + t + Σ_i e_{ij}^{(k)} T^{μ_i}` with `a ∈ A` and `t` of
//! negative degree, and the formal logarithm `l⃗ = Σ_k e^{(k)} X^{p^k} / p^k` they define.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use super::{require_theorem_backed, SolitonError};
use crate::curve::{CurveModel, GapData};
use crate::grassmann::{GrassPoint, IntegralityReport};
use crate::padic::{PadicElement, PadicField};
use crate::series::LaurentSeries;

/// A remainder `b_j^{(k)}` split into its `A`-part and its negative-degree tail.
#[derive(Clone, Debug)]
pub struct RemainderSplit {
    pub a_part: LaurentSeries<PadicElement>,
    pub tail: LaurentSeries<PadicElement>,
}

/// The level-`k` decomposition of the powers `T^{μ_j p^k}`.
#[derive(Clone, Debug)]
pub struct FrobeniusDecomposition {
    pub k: u32,
    pub p: u64,
    pub mu: Vec<i64>,
    /// `e[i][j] = e_{ij}^{(k)}`.
    pub e: Vec<Vec<PadicElement>>,
    /// One split remainder per gap `μ_j`.
    pub b: Vec<RemainderSplit>,
    /// Lowest exponent at which the remainders are known.
    pub floor: i64,
}

impl FrobeniusDecomposition {
    /// The exponent `μ_j p^k`.
    pub fn power(&self, j: usize) -> i64 {
        self.mu[j] * (self.p as i64).pow(self.k)
    }

    /// `T^{μ_j p^k} − a − t − Σ_i e_{ij} T^{μ_i}` vanishes at every exponent `≥ floor`.
    pub fn reconstruction_holds(&self) -> bool {
        let field = self.e[0][0].field().clone();
        (0..self.mu.len()).all(|j| {
            let mut terms: BTreeMap<i64, PadicElement> = BTreeMap::new();
            terms.insert(self.power(j), field.one());
            for (i, &m) in self.mu.iter().enumerate() {
                let v = terms.entry(m).or_insert_with(|| field.zero());
                *v = v.sub_ref(&self.e[i][j]);
            }
            for part in [&self.b[j].a_part, &self.b[j].tail] {
                for (n, c) in part.terms() {
                    if n >= self.floor {
                        let v = terms.entry(n).or_insert_with(|| field.zero());
                        *v = v.sub_ref(c);
                    }
                }
            }
            terms.values().all(|c| c.is_zero())
        })
    }

    /// Every entry and every stored remainder coefficient has norm `≤ 1`.
    pub fn is_integral(&self) -> bool {
        self.e.iter().flatten().all(|c| c.is_integral())
            && self.b.iter().all(|s| {
                s.a_part.terms().chain(s.tail.terms()).all(|(_, c)| c.is_integral())
            })
    }

    /// `e_{ij}^{(k)} = 0` at precision for `i ≠ j`.
    pub fn is_diagonal(&self) -> bool {
        self.e.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, c)| i == j || c.is_zero()))
    }
}

/// Decompositions for `k = 0..=kmax` computed from the standard basis of a strictly integral
/// point (generic path).
pub fn decompose_frobenius(
    a: &GrassPoint<PadicElement>,
    report: &IntegralityReport,
    gd: &GapData,
    kmax: u32,
) -> Result<Vec<FrobeniusDecomposition>, SolitonError> {
    require_theorem_backed(report)?;
    let field = a.field().clone();
    let p = field.p();
    let mu_g = gd.mu.last().copied().unwrap_or(1);
    let needed = (p as i64).pow(kmax) * mu_g;
    if a.cap() < needed {
        return Err(SolitonError::CapTooSmall { cap: a.cap(), needed });
    }
    let by_deg: BTreeMap<i64, &LaurentSeries<PadicElement>> =
        a.basis().iter().map(|v| (v.deg().unwrap(), v)).collect();
    let g = gd.genus();
    let floor = a.floor();
    let mut out = Vec::new();
    for k in 0..=kmax {
        let mut e = vec![vec![field.zero(); g]; g];
        let mut b = Vec::with_capacity(g);
        for j in 0..g {
            let power = gd.mu[j] * (p as i64).pow(k);
            let mono = LaurentSeries::monomial(&field, power, field.one(), floor);
            let mut rem = mono.clone();
            let mut gap_part = LaurentSeries::zero(&field, floor);
            for n in (0..=power).rev() {
                let c = rem.coeff_or_zero(n);
                if c.is_zero() {
                    continue;
                }
                if let Some(i) = gd.mu.iter().position(|&x| x == n) {
                    e[i][j] = c.clone();
                    let m = LaurentSeries::monomial(&field, n, c, floor);
                    rem = rem.sub(&m)?;
                    gap_part = gap_part.add(&m)?;
                    continue;
                }
                let v = by_deg.get(&n).ok_or(SolitonError::CapTooSmall { cap: a.cap(), needed: n })?;
                rem = rem.sub(&v.scale(&c))?;
            }
            let tail = rem.trimmed();
            let a_part = mono.sub(&gap_part)?.sub(&tail)?.trimmed();
            b.push(RemainderSplit { a_part, tail });
        }
        out.push(FrobeniusDecomposition { k, p, mu: gd.mu.clone(), e, b, floor });
    }
    Ok(out)
}

/// Decompositions for `k = 0..=kmax` from the curve's integral local expansions, with
/// remainders known at exponents `≥ floor`.
pub fn decompose_frobenius_curve(
    curve: &CurveModel,
    kmax: u32,
    floor: i64,
) -> Result<Vec<FrobeniusDecomposition>, SolitonError> {
    let gd = curve.gap_data()?;
    let field = curve.field().clone();
    let p = field.p();
    let g = gd.genus();
    let mut out = Vec::new();
    for k in 0..=kmax {
        let mut e = vec![vec![field.zero(); g]; g];
        let mut b = Vec::with_capacity(g);
        for j in 0..g {
            let power = gd.mu[j] * (p as i64).pow(k);
            if k == 0 {
                e[j][j] = field.one();
                let zero = LaurentSeries::zero(&field, floor);
                b.push(RemainderSplit { a_part: zero.clone(), tail: zero });
                continue;
            }
            let d = curve.power_decomposition(power, floor)?;
            for i in 0..g {
                e[i][j] = d.e[i].clone();
            }
            b.push(RemainderSplit { a_part: d.a_part, tail: d.tail });
        }
        out.push(FrobeniusDecomposition { k, p, mu: gd.mu.clone(), e, b, floor });
    }
    Ok(out)
}

/// The formal logarithm `l_i(X) = Σ_k Σ_j e_{ij}^{(k)} X_j^{p^k} / p^k`, truncated after the
/// available levels.
#[derive(Clone, Debug)]
pub struct FormalLog {
    p: u64,
    mu: Vec<i64>,
    /// `e[k]` is the matrix `e^{(k)}` over `Q_p`.
    e: Vec<Vec<Vec<PadicElement>>>,
    /// `coeff[k][i][j] = e_{ij}^{(k)} / p^k`.
    coeff: Vec<Vec<Vec<PadicElement>>>,
}

/// Assembles the formal logarithm from decompositions of levels `0, 1, …` in order.
pub fn formal_log(decomps: &[FrobeniusDecomposition]) -> Result<FormalLog, SolitonError> {
    if decomps.is_empty() || decomps.iter().enumerate().any(|(k, d)| d.k as usize != k) {
        return Err(SolitonError::MissingLevels { needed: 1, available: 0 });
    }
    let field = decomps[0].e[0][0].field().clone();
    let p = decomps[0].p;
    let e: Vec<Vec<Vec<PadicElement>>> = decomps.iter().map(|d| d.e.clone()).collect();
    let coeff = e
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let inv = PadicElement::from_rational(
                &field,
                &BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(p), k)),
            );
            m.iter().map(|r| r.iter().map(|c| c * &inv).collect()).collect()
        })
        .collect();
    Ok(FormalLog { p, mu: decomps[0].mu.clone(), e, coeff })
}

impl FormalLog {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn genus(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[i64] {
        &self.mu
    }

    /// Number of levels `k = 0, …, levels − 1` available.
    pub fn levels(&self) -> usize {
        self.e.len()
    }

    pub fn field(&self) -> &PadicField {
        self.e[0][0][0].field()
    }

    /// The matrix `e^{(k)}`.
    pub fn e(&self, k: usize) -> &[Vec<PadicElement>] {
        &self.e[k]
    }

    /// Coefficient `e_{ij}^{(k)} / p^k` of `X_j^{p^k}` in `l_i`.
    pub fn coefficient(&self, k: usize, i: usize, j: usize) -> &PadicElement {
        &self.coeff[k][i][j]
    }

    /// Diagonal coefficients `e_{ii}^{(k)} / p^k` of the one-variable logarithm `l_i`.
    pub fn component(&self, i: usize) -> Vec<PadicElement> {
        self.coeff.iter().map(|m| m[i][i].clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.e.iter().all(|m| {
            m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, c)| i == j || c.is_zero()))
        })
    }

    /// `l⃗(x)` for `x` in any field with the same `p`.
    pub fn eval(&self, x: &[PadicElement]) -> Result<Vec<PadicElement>, SolitonError> {
        let field = x[0].field().clone();
        let powers = self.frobenius_powers(x);
        let g = self.genus();
        let mut out = vec![field.zero(); g];
        for (k, m) in self.coeff.iter().enumerate() {
            for (i, slot) in out.iter_mut().enumerate() {
                for j in 0..g {
                    if m[i][j].is_exact_zero() || powers[k][j].is_exact_zero() {
                        continue;
                    }
                    *slot = &*slot + &powers[k][j].mul_qp(&m[i][j])?;
                }
            }
        }
        Ok(out)
    }

    /// The one-variable logarithm `l_i(x)` from the diagonal coefficients.
    pub fn eval_component(&self, i: usize, x: &PadicElement) -> Result<PadicElement, SolitonError> {
        let mut acc = x.field().zero();
        let mut pow = x.clone();
        for (k, m) in self.coeff.iter().enumerate() {
            if k > 0 {
                pow = pow.pow(self.p);
            }
            acc = &acc + &pow.mul_qp(&m[i][i])?;
        }
        Ok(acc)
    }

    /// Jacobian `∂l_i/∂X_j = Σ_k e_{ij}^{(k)} X_j^{p^k − 1}`.
    pub fn jacobian(&self, x: &[PadicElement]) -> Result<Vec<Vec<PadicElement>>, SolitonError> {
        let field = x[0].field().clone();
        let g = self.genus();
        let mut out = vec![vec![field.zero(); g]; g];
        for (j, xj) in x.iter().enumerate() {
            // X_j^{p^k − 1} for each level.
            let mut pows = vec![field.one()];
            let mut pk = 1u64;
            for _ in 1..self.levels() {
                let next = pk * self.p;
                pows.push(if xj.is_zero() { field.zero() } else { xj.pow(next - 1) });
                pk = next;
            }
            for (k, m) in self.e.iter().enumerate() {
                for (i, row) in out.iter_mut().enumerate() {
                    if m[i][j].is_exact_zero() || pows[k].is_exact_zero() {
                        continue;
                    }
                    row[j] = &row[j] + &pows[k].mul_qp(&m[i][j])?;
                }
            }
        }
        Ok(out)
    }

    /// Lower bound for the valuation of every omitted term `e X^{p^k}/p^k` (`k ≥ levels`)
    /// when `v(X_j) ≥ v` and the decompositions are integral.
    pub fn omitted_bound(&self, v: Ratio<i64>) -> Ratio<i64> {
        let start = self.levels() as i64;
        let mut best: Option<Ratio<i64>> = None;
        let mut pk = Ratio::from_integer((self.p as i64).pow(start as u32));
        for k in start..start + 8 {
            let b = pk * v - Ratio::from_integer(k);
            best = Some(best.map_or(b, |x: Ratio<i64>| x.min(b)));
            pk *= Ratio::from_integer(self.p as i64);
        }
        best.unwrap()
    }

    /// `x_j^{p^k}` for every level.
    fn frobenius_powers(&self, x: &[PadicElement]) -> Vec<Vec<PadicElement>> {
        let mut out = vec![x.to_vec()];
        for k in 1..self.levels() {
            let next: Vec<PadicElement> = out[k - 1].iter().map(|y| y.pow(self.p)).collect();
            out.push(next);
        }
        out
    }
}
