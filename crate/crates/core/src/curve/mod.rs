//! Superelliptic curves `y^d = Π F_k(x)^{a_k}` with good reduction: local expansions at a
//! base point, the coordinate ring `A` of functions regular away from it, gap sequences,
//! Krichever subspaces of divisors, Hermite bases of regular differentials, decompositions of
//! powers of `T`, and Hasse–Witt matrices.
//!
//! All expansions are integral and computed modulo `p^N` (or modulo `p` on the special
//! fibre); they are converted to p-adic series only at the interface.

mod chart;
mod engine;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::{Certification, GrassError, GrassPoint, Integrality, IntegralityReport};
use crate::padic::{fp_poly, PadicElement, PadicError, PadicField, ResidueElement, ResidueField, Scalar};
use crate::series::LaurentSeries;

use chart::{AffineChart, Chart, InfinityChart, RawDecomposition, RawDifferential};
pub use engine::SeriesRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("bad reduction: {0}")]
    BadReduction(String),
    #[error("base point is not on the curve: {0}")]
    NotOnCurve(String),
    #[error("gap count {found} differs from the genus {genus}")]
    GenusMismatch { genus: usize, found: usize },
    #[error("Hermite normalization failed: pivot at exponent {exponent} vanishes at precision")]
    NotNormalizable { exponent: i64 },
    #[error("degree cap {cap} is too small: need {needed}")]
    CapTooSmall { cap: i64, needed: i64 },
    #[error("p = {p} is smaller than 2g = {two_g}")]
    SmallPrime { p: u64, two_g: usize },
    #[error("divisor support meets the residue disc of the base point: {0}")]
    SupportCollision(String),
    #[error("invalid curve model: {0}")]
    InvalidModel(String),
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error(transparent)]
    Grass(#[from] GrassError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// A monic integer polynomial `F(x)` (coefficients from the constant term) with its
/// multiplicity in the right-hand side of the curve equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchFactor {
    pub poly: Vec<i64>,
    pub mult: u32,
}

impl BranchFactor {
    pub fn new(poly: &[i64], mult: u32) -> Self {
        BranchFactor { poly: poly.to_vec(), mult }
    }

    /// The linear factor `x − e`.
    pub fn linear(e: i64, mult: u32) -> Self {
        BranchFactor { poly: vec![-e, 1], mult }
    }

    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }
}

/// The distinguished point of the curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasePoint {
    /// The unique point above `x = ∞`.
    Infinity,
    /// An affine point with integral `x₀`; `y₀` is given by any integer congruent to it modulo
    /// `p` and is lifted to the p-adic square root with that residue.
    Affine { x0: i64, y0: i64 },
}

/// Weierstrass gap sequence of a point (or of a degree-zero sheaf).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapData {
    pub gaps: Vec<i64>,
    /// The gaps in increasing order, `μ_1 < … < μ_g`.
    pub mu: Vec<i64>,
}

impl GapData {
    pub fn from_gaps(gaps: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = gaps.into_iter().collect();
        let v: Vec<i64> = set.into_iter().collect();
        GapData { gaps: v.clone(), mu: v }
    }

    pub fn genus(&self) -> usize {
        self.gaps.len()
    }
}

/// A point of the curve given by its `x`-coordinate `x_num / x_den`, used in divisors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub x_num: i64,
    pub x_den: i64,
}

impl DivisorPoint {
    pub fn integral(x: i64) -> Self {
        DivisorPoint { x_num: x, x_den: 1 }
    }
}

/// The Hasse–Witt matrix over `F_p` with the ordinarity verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseWitt {
    pub p: u64,
    /// `e^{(1)} mod p` with respect to the Hermite basis.
    pub matrix: Vec<Vec<u64>>,
    pub determinant: u64,
    pub ordinary: bool,
    /// For `k = 2, 3`: whether `e^{(k)} ≡ e^{(1)} (e^{(1)})^{(p)} ⋯ mod p`.
    pub product_rule: Vec<(u32, bool)>,
}

/// Decomposition `T^M = a + t + Σ_i e_i T^{μ_i}` with `a ∈ A` and `t ∈ T^{-1}O_K[[T^{-1}]]`.
#[derive(Clone, Debug)]
pub struct PowerDecomposition {
    pub power: i64,
    /// Coefficients `e_i` at the gaps `μ_i`.
    pub e: Vec<PadicElement>,
    /// The `A`-part, known at exponents `≥ floor`.
    pub a_part: LaurentSeries<PadicElement>,
    /// The negative-degree part, known at exponents `≥ floor`.
    pub tail: LaurentSeries<PadicElement>,
}

/// The normalized Hermite basis as a combination of raw regular differentials, over `Z/mZ`.
#[derive(Clone, Debug)]
pub struct HermiteTable {
    modulus: u128,
    raw: Vec<RawDifferential>,
    /// Row `i`: coefficients of `ω_i` on the raw differentials.
    combos: Vec<Vec<u128>>,
    ring: SeriesRing,
}

impl HermiteTable {
    /// `c_{i, j}` (rows `i` from 0) reduced modulo the table's modulus.
    pub fn coeff(&self, i: usize, j: i64) -> u128 {
        let m = self.ring.modulus();
        self.combos[i]
            .iter()
            .zip(&self.raw)
            .fold(0u128, |acc, (&c, r)| if c == 0 { acc } else { m.add(acc, m.mul(c, r.coeff(j))) })
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Largest exponent whose coefficients are stored for every differential.
    pub fn known_up_to(&self) -> i64 {
        self.raw.iter().map(|r| r.known_up_to()).min().unwrap_or(0)
    }
}

type ChartKey = u128;

/// A superelliptic curve over `Q_p` (through a p-adic field) with a distinguished point.
#[derive(Clone, Debug)]
pub struct CurveModel {
    d: u32,
    factors: Vec<BranchFactor>,
    base: BasePoint,
    field: PadicField,
    genus: usize,
    charts: Arc<RwLock<HashMap<ChartKey, Arc<Chart>>>>,
}

impl CurveModel {
    /// Validates the model: one point above `x = ∞`, squarefree and pairwise coprime factors
    /// modulo `p`, `p ∤ d`, and (for an affine base point) a hyperelliptic model with the
    /// point on the curve and `y₀` a unit.
    pub fn new(d: u32, factors: Vec<BranchFactor>, base: BasePoint, field: PadicField) -> Result<Self, CurveError> {
        if d < 2 {
            return Err(CurveError::InvalidModel("d must be at least 2".into()));
        }
        if factors.is_empty() {
            return Err(CurveError::InvalidModel("no branch factors".into()));
        }
        for f in &factors {
            if f.degree() == 0 || f.poly.last() != Some(&1) {
                return Err(CurveError::InvalidModel(format!("factor {:?} must be monic of positive degree", f.poly)));
            }
            if f.mult == 0 {
                return Err(CurveError::InvalidModel("multiplicities must be positive".into()));
            }
        }
        let big_d: u64 = factors.iter().map(|f| f.degree() as u64 * f.mult as u64).sum();
        if big_d.gcd(&(d as u64)) != 1 {
            return Err(CurveError::InvalidModel(format!(
                "gcd(d, Σ a_k deg F_k) = gcd({d}, {big_d}) must be 1 for a single point above x = ∞"
            )));
        }
        let p = field.p();
        if (d as u64) % p == 0 {
            return Err(CurveError::BadReduction(format!("p = {p} divides d = {d}")));
        }
        check_branch_reduction(&factors, p)?;
        let ram: u64 = factors
            .iter()
            .map(|f| f.degree() as u64 * (d as u64 - (d as u64).gcd(&(f.mult as u64))))
            .sum::<u64>()
            + d as u64
            - 1;
        if ram % 2 != 0 || ram / 2 + 1 < d as u64 {
            return Err(CurveError::InvalidModel("Riemann–Hurwitz count is inconsistent".into()));
        }
        let genus = (ram / 2 + 1 - d as u64) as usize;
        if let BasePoint::Affine { x0, y0 } = base {
            if d != 2 || big_d % 2 == 0 || factors.iter().any(|f| f.mult != 1) {
                return Err(CurveError::InvalidModel(
                    "affine base points are supported on y² = f(x) with f squarefree of odd degree".into(),
                ));
            }
            if p == 2 {
                return Err(CurveError::BadReduction("p = 2 on a hyperelliptic model".into()));
            }
            let f = expand_factors(&factors);
            let fx = eval_mod(&f, x0 as i128, p as i128);
            let yy = ((y0 as i128 % p as i128) * (y0 as i128 % p as i128)).rem_euclid(p as i128);
            if yy != fx {
                return Err(CurveError::NotOnCurve(format!("y0² ≢ f(x0) mod {p} at x0 = {x0}, y0 = {y0}")));
            }
            if fx == 0 {
                return Err(CurveError::InvalidModel(
                    "base point reduces to a ramification point (y0 ≡ 0); only unramified affine points are supported".into(),
                ));
            }
        }
        Ok(CurveModel { d, factors, base, field, genus, charts: Arc::new(RwLock::new(HashMap::new())) })
    }

    /// `y^d = x^a (x − 1)^{d+1−a}` at infinity.
    pub fn fermat_quotient(d: u32, a: u32, field: PadicField) -> Result<Self, CurveError> {
        if a == 0 || a > d {
            return Err(CurveError::InvalidModel(format!("need 0 < a ≤ d, got a = {a}")));
        }
        Self::new(d, vec![BranchFactor::linear(0, a), BranchFactor::linear(1, d + 1 - a)], BasePoint::Infinity, field)
    }

    /// `y² = x^{2g+1} + x` at infinity.
    pub fn hyperelliptic_x_power(g: u32, field: PadicField) -> Result<Self, CurveError> {
        let mut q = vec![0i64; 2 * g as usize + 1];
        q[0] = 1;
        q[2 * g as usize] = 1;
        Self::new(2, vec![BranchFactor::linear(0, 1), BranchFactor::new(&q, 1)], BasePoint::Infinity, field)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn factors(&self) -> &[BranchFactor] {
        &self.factors
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.base
    }

    pub fn field(&self) -> &PadicField {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    /// Genus from the Riemann–Hurwitz formula.
    pub fn genus(&self) -> usize {
        self.genus
    }

    /// `Σ a_k deg F_k`.
    pub fn total_degree(&self) -> u64 {
        self.factors.iter().map(|f| f.degree() as u64 * f.mult as u64).sum()
    }

    /// Order of the automorphism `y ↦ ζ_d y` fixing the base point at infinity, when `ζ_d`
    /// lies in the field; it acts on `T` through a primitive `d`-th root of unity.
    pub fn automorphism_order(&self) -> Option<u32> {
        match self.base {
            BasePoint::Infinity => {
                let q = (self.p() as u128).pow(self.field.f() as u32);
                ((q - 1) % self.d as u128 == 0).then_some(self.d)
            }
            BasePoint::Affine { .. } => None,
        }
    }

    /// The right-hand side `Π F_k^{a_k}` expanded.
    pub fn rhs(&self) -> Vec<i128> {
        expand_factors(&self.factors)
    }

    /// Chart over `Z/mZ` with at least `len` stored coefficients.
    fn chart(&self, modulus: u128, len: usize) -> Arc<Chart> {
        if let Some(c) = self.charts.read().expect("chart cache").get(&modulus) {
            if c.len() >= len {
                return c.clone();
            }
        }
        let ring = SeriesRing::new(modulus);
        let len = len.max(8);
        let chart = match self.base {
            BasePoint::Infinity => {
                let fs: Vec<(Vec<i64>, i64)> = self.factors.iter().map(|f| (f.poly.clone(), f.mult as i64)).collect();
                Chart::Infinity(InfinityChart::new(ring, len, self.d as i64, &fs))
            }
            BasePoint::Affine { x0, y0 } => {
                Chart::Affine(AffineChart::new(ring, len, &self.rhs(), x0 as i128, y0 as i128, self.genus as i64))
            }
        };
        let chart = Arc::new(chart);
        self.charts.write().expect("chart cache").insert(modulus, chart.clone());
        chart
    }

    fn modulus_of(&self, field: &PadicField) -> Result<u128, CurveError> {
        if field.p() != self.p() {
            return Err(CurveError::InvalidModel("field has a different residue characteristic".into()));
        }
        Ok((self.p() as u128).pow(field.precision()))
    }

    /// Number of `τ`-coefficients needed to reach exponent `low` from degree `top`.
    fn len_for(&self, top: i64, low: i64) -> usize {
        let step = match self.base {
            BasePoint::Infinity => self.d as i64,
            BasePoint::Affine { .. } => 1,
        };
        ((top - low).div_euclid(step) + 2).max(2) as usize
    }

    /// Gap sequence of the base point on the generic fibre.
    pub fn gap_data(&self) -> Result<GapData, CurveError> {
        let chart = self.chart(self.p() as u128, 8);
        let gd = GapData::from_gaps(chart.gaps());
        if gd.genus() != self.genus {
            return Err(CurveError::GenusMismatch { genus: self.genus, found: gd.genus() });
        }
        Ok(gd)
    }

    /// Gap sequence of the reduced point, obtained by echelonizing the generators of `A`
    /// over the residue field.
    pub fn reduction_gap_data(&self) -> Result<GapData, CurveError> {
        let rf = ResidueField::prime(self.p());
        let cap = 4 * self.genus as i64 + 2 * self.d as i64;
        let chart = self.chart(self.p() as u128, self.len_for(cap, -cap));
        let degrees = chart.nongaps(cap, &[]);
        let step = chart.step();
        let table = chart.generator_table(&degrees, &[], |n| ((n + cap) / step + 1) as usize);
        let vectors: Vec<LaurentSeries<ResidueElement>> = table
            .iter()
            .map(|(&n, coeffs)| {
                let terms: Vec<(i64, ResidueElement)> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| (n - step * k as i64, rf.from_u64(c as u64)))
                    .filter(|(e, _)| *e >= -cap)
                    .collect();
                LaurentSeries::from_terms(&rf, -cap, &terms)
            })
            .collect();
        let point = GrassPoint::standard_basis(&vectors, cap)?;
        let gaps: Vec<i64> = (1..=cap).filter(|&n| !point.maya().contains(n)).collect();
        Ok(GapData::from_gaps(gaps))
    }

    /// Local expansions `x(T)`, `y(T)` at the base point, known at exponents `≥ -cap`.
    pub fn expand_at_basepoint(
        &self,
        cap: i64,
    ) -> Result<(LaurentSeries<PadicElement>, LaurentSeries<PadicElement>), CurveError> {
        let needed = 4 * self.genus as i64 + 2 * self.d as i64;
        if cap < needed {
            return Err(CurveError::CapTooSmall { cap, needed });
        }
        let field = &self.field;
        let m = self.modulus_of(field)?;
        match self.base {
            BasePoint::Infinity => {
                let big_d = self.total_degree() as i64;
                let chart = self.chart(m, self.len_for(big_d, -cap));
                let Chart::Infinity(c) = chart.as_ref() else { unreachable!() };
                let xs = c.unit_product(-c.alpha, &[], c.len);
                let ys = c.unit_product(-c.beta, &[], c.len);
                Ok((
                    laurent_from(field, &c.ring, c.d, -cap, c.d, &xs),
                    laurent_from(field, &c.ring, big_d, -cap, c.d, &ys),
                ))
            }
            BasePoint::Affine { x0, .. } => {
                let chart = self.chart(m, self.len_for(0, -cap));
                let Chart::Affine(c) = chart.as_ref() else { unreachable!() };
                let x = LaurentSeries::from_terms(field, -cap, &[(0, field.int(x0)), (-1, field.one())]);
                Ok((x, laurent_from(field, &c.ring, 0, -cap, 1, &c.y)))
            }
        }
    }

    /// `y^d − Π F_k(x)^{a_k}` evaluated on given expansions.
    pub fn equation_residual(
        &self,
        x: &LaurentSeries<PadicElement>,
        y: &LaurentSeries<PadicElement>,
    ) -> Result<LaurentSeries<PadicElement>, CurveError> {
        let field = x.field().clone();
        let mut lhs = LaurentSeries::monomial(&field, 0, field.one(), x.floor().min(0));
        for _ in 0..self.d {
            lhs = lhs.mul(y).map_err(GrassError::from)?;
        }
        let mut rhs = LaurentSeries::monomial(&field, 0, field.one(), x.floor().min(0));
        for f in &self.factors {
            let mut fx = LaurentSeries::zero(&field, x.floor().min(0));
            for &c in f.poly.iter().rev() {
                fx = fx.mul(x).map_err(GrassError::from)?;
                fx = fx.add(&LaurentSeries::monomial(&field, 0, field.int(c), fx.floor())).map_err(GrassError::from)?;
            }
            for _ in 0..f.mult {
                rhs = rhs.mul(&fx).map_err(GrassError::from)?;
            }
        }
        Ok(lhs.sub(&rhs).map_err(GrassError::from)?)
    }

    /// Monic generators of a subspace (the ring `A` for empty offsets) expanded in `field`,
    /// for all leading degrees up to `cap`, truncated below `floor`.
    fn generator_series(
        &self,
        field: &PadicField,
        cap: i64,
        floor: i64,
        offsets: &[i64],
    ) -> Result<Vec<LaurentSeries<PadicElement>>, CurveError> {
        let m = self.modulus_of(field)?;
        let chart = self.chart(m, self.len_for(cap, floor));
        let degrees = chart.nongaps(cap, offsets);
        let step = chart.step();
        let table = chart.generator_table(&degrees, offsets, |n| ((n - floor).div_euclid(step) + 1).max(1) as usize);
        Ok(table
            .iter()
            .map(|(&n, coeffs)| laurent_from(field, chart.ring(), n, floor, step, coeffs))
            .collect())
    }

    /// The coordinate ring `A` as a point of the Grassmannian over the model's field.
    pub fn affine_ring(&self, cap: i64) -> Result<(GrassPoint<PadicElement>, GapData), CurveError> {
        self.affine_ring_in(&self.field.clone(), cap, -cap)
    }

    /// The coordinate ring `A` over an extension field with the same `p` and precision.
    pub fn affine_ring_in(
        &self,
        field: &PadicField,
        cap: i64,
        floor: i64,
    ) -> Result<(GrassPoint<PadicElement>, GapData), CurveError> {
        let gd = self.gap_data()?;
        let needed = gd.mu.last().copied().unwrap_or(0) + 1;
        if cap < needed {
            return Err(CurveError::CapTooSmall { cap, needed });
        }
        let vectors = self.generator_series(field, cap, floor, &[])?;
        let point = GrassPoint::standard_basis(&vectors, cap)?;
        let found = (1..=cap).filter(|&n| !point.maya().contains(n)).count();
        if found != self.genus || point.index() != 1 - self.genus as i64 {
            return Err(CurveError::GenusMismatch { genus: self.genus, found });
        }
        Ok((point, gd))
    }

    /// Integrality of `A`, certified for all degrees when the gap sequences of the curve and
    /// of its reduction agree.
    pub fn certify_strict_integrality(&self, a: &GrassPoint<PadicElement>) -> Result<IntegralityReport, CurveError> {
        let mut report = a.classify_integrality()?;
        if report.class == Integrality::Strict && self.gap_data()? == self.reduction_gap_data()? {
            report.certification = Certification::TheoremBacked {
                reason: "gap sequences of the curve and of its reduction agree".into(),
            };
        }
        Ok(report)
    }

    /// Branch-point offsets `n_k` of a divisor supported on branch points of linear factors.
    fn divisor_offsets(&self, divisor: &[(DivisorPoint, i64)]) -> Result<Vec<i64>, CurveError> {
        let p = self.p() as i64;
        let mut offsets = vec![0i64; self.factors.len()];
        for (pt, mult) in divisor {
            if pt.x_den == 0 {
                return Err(CurveError::InvalidDivisor("zero denominator".into()));
            }
            match self.base {
                BasePoint::Infinity => {
                    if pt.x_den.rem_euclid(p) == 0 {
                        return Err(CurveError::SupportCollision(format!(
                            "x = {}/{} reduces to the point at infinity",
                            pt.x_num, pt.x_den
                        )));
                    }
                }
                BasePoint::Affine { x0, .. } => {
                    let inv = fp_poly::inv_scalar(pt.x_den.rem_euclid(p) as u64, p as u64) as i64;
                    if (pt.x_num.rem_euclid(p) * inv - x0).rem_euclid(p) == 0 {
                        return Err(CurveError::SupportCollision(format!(
                            "x = {}/{} reduces to the base point",
                            pt.x_num, pt.x_den
                        )));
                    }
                    return Err(CurveError::InvalidDivisor(
                        "divisors are supported for base points at infinity only".into(),
                    ));
                }
            }
            if pt.x_num % pt.x_den != 0 {
                return Err(CurveError::InvalidDivisor("point is not a branch point of a linear factor".into()));
            }
            let e = pt.x_num / pt.x_den;
            let k = self
                .factors
                .iter()
                .position(|f| f.poly == [-e, 1])
                .ok_or_else(|| CurveError::InvalidDivisor(format!("x = {e} is not a root of a linear branch factor")))?;
            if (self.factors[k].mult as u64).gcd(&(self.d as u64)) != 1 {
                return Err(CurveError::InvalidDivisor(format!(
                    "the fibre over x = {e} has more than one point"
                )));
            }
            offsets[k] += mult;
        }
        Ok(offsets)
    }

    /// `V(O(D), σ(D))` for a divisor supported on totally ramified branch points.
    pub fn krichever_subspace(
        &self,
        divisor: &[(DivisorPoint, i64)],
        cap: i64,
    ) -> Result<GrassPoint<PadicElement>, CurveError> {
        let offsets = self.divisor_offsets(divisor)?;
        let field = self.field.clone();
        let chart = self.chart(self.p() as u128, 8);
        let Chart::Infinity(c) = chart.as_ref() else { unreachable!("checked by divisor_offsets") };
        let min_deg = c.generators(&offsets).iter().map(|g| g.degree).min().unwrap_or(0);
        let max_deg = c.generators(&offsets).iter().map(|g| g.degree).max().unwrap_or(0);
        if cap < max_deg {
            return Err(CurveError::CapTooSmall { cap, needed: max_deg });
        }
        let floor = min_deg.min(0) - cap;
        let vectors = self.generator_series(&field, cap, floor, &offsets)?;
        Ok(GrassPoint::standard_basis(&vectors, cap)?)
    }

    /// Gap sequence `Z_{≥0} \ M(V)` of the sheaf of a degree-zero divisor.
    pub fn krichever_gap_data(&self, divisor: &[(DivisorPoint, i64)]) -> Result<GapData, CurveError> {
        let deg: i64 = divisor.iter().map(|(_, m)| m).sum();
        if deg != 0 {
            return Err(CurveError::InvalidDivisor(format!("degree {deg} is not zero")));
        }
        let cap = 2 * self.genus as i64 + 2 * self.d as i64;
        let v = self.krichever_subspace(divisor, cap)?;
        Ok(GapData::from_gaps((0..=cap).filter(|&n| !v.maya().contains(n))))
    }

    /// Normalized Hermite basis over `Z/mZ` with coefficients known through exponent `max_j`.
    pub fn hermite_table(&self, modulus: u128, max_j: i64) -> Result<HermiteTable, CurveError> {
        let gd = self.gap_data()?;
        let g = gd.genus();
        let step = match self.base {
            BasePoint::Infinity => self.d as i64,
            BasePoint::Affine { .. } => 1,
        };
        let len = (max_j / step + 2) as usize;
        let chart = self.chart(modulus, len);
        let ring = chart.ring().clone();
        let m = ring.modulus().clone();
        let raw = chart.regular_differentials(len);
        if raw.len() != g {
            return Err(CurveError::GenusMismatch { genus: g, found: raw.len() });
        }
        // B[r][j] = raw coefficient of differential r at μ_j; the Hermite basis is B^{-1}·raw.
        let b: Vec<Vec<u128>> = raw.iter().map(|r| gd.mu.iter().map(|&mu| r.coeff(mu)).collect()).collect();
        let combos = invert_unit_matrix(&m, &b, self.p() as u128)
            .ok_or(CurveError::NotNormalizable { exponent: gd.mu.first().copied().unwrap_or(1) })?;
        // combos = B^{-1}: ω_i = Σ_r (B^{-1})_{i r} raw_r has c_{i μ_j} = δ_ij.
        Ok(HermiteTable { modulus, raw, combos, ring })
    }

    /// Hermite basis expansions `c_{ij}` for `1 ≤ j ≤ cap`, as a `g × cap` matrix.
    pub fn hermite_basis(&self, cap: i64) -> Result<Vec<Vec<PadicElement>>, CurveError> {
        let m = self.modulus_of(&self.field)?;
        let table = self.hermite_table(m, cap)?;
        let ring = SeriesRing::new(m);
        Ok((0..self.genus)
            .map(|i| (1..=cap).map(|j| lift(&self.field, &ring, table.coeff(i, j))).collect())
            .collect())
    }

    /// Decomposition of `T^M` over `Z/mZ` by the generator engine.
    fn raw_decomposition(&self, modulus: u128, power: i64, low: i64) -> Result<RawDecomposition, CurveError> {
        let gd = self.gap_data()?;
        let chart = self.chart(modulus, self.len_for(power, low));
        Ok(chart.decompose(power, low, &gd.mu))
    }

    /// `e^{[m]}` over `Z/mZ` from decompositions of `T^{m μ_j}`.
    pub fn power_matrix_mod(&self, modulus: u128, m: i64) -> Result<Vec<Vec<u128>>, CurveError> {
        let gd = self.gap_data()?;
        let g = gd.genus();
        let mut e = vec![vec![0u128; g]; g];
        for (j, &mu) in gd.mu.iter().enumerate() {
            let dec = self.raw_decomposition(modulus, m * mu, 1)?;
            for i in 0..g {
                e[i][j] = dec.e[i];
            }
        }
        Ok(e)
    }

    /// `(c_{i, m μ_j})` over `Z/mZ` from the Hermite basis.
    pub fn hermite_power_matrix_mod(&self, modulus: u128, m: i64) -> Result<Vec<Vec<u128>>, CurveError> {
        let gd = self.gap_data()?;
        let top = m * gd.mu.last().copied().unwrap_or(1);
        let table = self.hermite_table(modulus, top)?;
        Ok((0..gd.genus()).map(|i| gd.mu.iter().map(|&mu| table.coeff(i, m * mu)).collect()).collect())
    }

    /// Decomposition of `T^M` in the model's field, with the `A`-part and tail kept at
    /// exponents `≥ floor`.
    pub fn power_decomposition(&self, power: i64, floor: i64) -> Result<PowerDecomposition, CurveError> {
        self.power_decomposition_in(&self.field.clone(), power, floor)
    }

    /// Same as [`Self::power_decomposition`] with coefficients embedded in `field`.
    pub fn power_decomposition_in(
        &self,
        field: &PadicField,
        power: i64,
        floor: i64,
    ) -> Result<PowerDecomposition, CurveError> {
        let gd = self.gap_data()?;
        let m = self.modulus_of(field)?;
        let ring = SeriesRing::new(m);
        let raw = self.raw_decomposition(m, power, floor.min(-1))?;
        let e: Vec<PadicElement> = raw.e.iter().map(|&c| lift(field, &ring, c)).collect();
        let tail_terms: Vec<(i64, PadicElement)> =
            raw.tail.iter().filter(|(n, _)| **n >= floor).map(|(&n, &c)| (n, lift(field, &ring, c))).collect();
        let tail = LaurentSeries::from_terms(field, floor, &tail_terms);
        let mut a_terms: BTreeMap<i64, PadicElement> = BTreeMap::new();
        a_terms.insert(power, field.one());
        for (i, &mu) in gd.mu.iter().enumerate() {
            let v = a_terms.entry(mu).or_insert_with(|| field.zero());
            *v = v.sub_ref(&e[i]);
        }
        for (n, c) in &tail_terms {
            let v = a_terms.entry(*n).or_insert_with(|| field.zero());
            *v = v.sub_ref(c);
        }
        let a_terms: Vec<(i64, PadicElement)> = a_terms.into_iter().collect();
        let a_part = LaurentSeries::from_terms(field, floor, &a_terms);
        Ok(PowerDecomposition { power, e, a_part, tail })
    }

    /// Hasse–Witt matrix `e^{(1)} mod p`, ordinarity, and the Frobenius product rule for
    /// `k = 2, 3` checked against Hermite coefficients `c_{i, p^k μ_j} mod p`.
    pub fn hasse_witt(&self) -> Result<HasseWitt, CurveError> {
        let p = self.p();
        let g = self.genus;
        if (p as usize) < 2 * g {
            return Err(CurveError::SmallPrime { p, two_g: 2 * g });
        }
        let e1 = self.power_matrix_mod(p as u128, p as i64)?;
        let e1: Vec<Vec<u64>> = e1.iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
        let det = det_mod_p(&e1, p);
        let mut product_rule = Vec::new();
        let mut power = e1.clone();
        for k in 2..=3u32 {
            // Entries lie in F_p, so the Frobenius twist is trivial.
            power = mat_mul_mod(&power, &e1, p);
            let direct = self.hermite_power_matrix_mod(p as u128, (p as i64).pow(k))?;
            let direct: Vec<Vec<u64>> = direct.iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
            product_rule.push((k, direct == power));
        }
        Ok(HasseWitt { p, matrix: e1, determinant: det, ordinary: det != 0, product_rule })
    }
}

/// Stöhr–Viana decomposition `T^{m μ_j} = b_j + Σ_i e_{ij} T^{μ_i}` computed from the
/// standard basis of `A`; returns `e^{[m]}` and the remainders `b_j`.
pub fn stohr_viana_matrix<C: Scalar>(
    a: &GrassPoint<C>,
    gd: &GapData,
    m: i64,
) -> Result<(Vec<Vec<C>>, Vec<LaurentSeries<C>>), CurveError> {
    let field = a.field().clone();
    let top = m * gd.mu.last().copied().unwrap_or(1);
    if top > a.cap() {
        return Err(CurveError::CapTooSmall { cap: a.cap(), needed: top });
    }
    let by_deg: BTreeMap<i64, &LaurentSeries<C>> = a.basis().iter().map(|v| (v.deg().unwrap(), v)).collect();
    let g = gd.genus();
    let mut e = vec![vec![C::zero_in(&field); g]; g];
    let mut rems = Vec::with_capacity(g);
    for (j, &mu) in gd.mu.iter().enumerate() {
        let power = m * mu;
        let mut rem = LaurentSeries::monomial(&field, power, C::one_in(&field), a.floor());
        let mut b = rem.clone();
        for n in (1..=power).rev() {
            let c = rem.coeff_or_zero(n);
            if c.is_zero() {
                continue;
            }
            if let Some(i) = gd.mu.iter().position(|&x| x == n) {
                e[i][j] = c.clone();
                let mono = LaurentSeries::monomial(&field, n, c, a.floor());
                rem = rem.sub(&mono).map_err(GrassError::from)?;
                b = b.sub(&mono).map_err(GrassError::from)?;
                continue;
            }
            let v = by_deg.get(&n).ok_or(CurveError::CapTooSmall { cap: a.cap(), needed: n })?;
            rem = rem.sub(&v.scale(&c)).map_err(GrassError::from)?;
        }
        rems.push(b);
    }
    Ok((e, rems))
}

/// Lifts a residue modulo `p^N` to the field (exact modulo `p^N`).
fn lift(field: &PadicField, ring: &SeriesRing, v: u128) -> PadicElement {
    PadicElement::from_coords(field, &[ring.modulus().to_signed(v)])
}

/// Series `Σ_k coeffs[k] T^{top − step·k}` kept at exponents `≥ floor`.
fn laurent_from(
    field: &PadicField,
    ring: &SeriesRing,
    top: i64,
    floor: i64,
    step: i64,
    coeffs: &[u128],
) -> LaurentSeries<PadicElement> {
    let terms: Vec<(i64, PadicElement)> = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| (top - step * k as i64, c))
        .take_while(|(n, _)| *n >= floor)
        .filter(|(_, c)| *c != 0)
        .map(|(n, c)| (n, lift(field, ring, c)))
        .collect();
    LaurentSeries::from_terms(field, floor, &terms)
}

fn expand_factors(factors: &[BranchFactor]) -> Vec<i128> {
    let mut acc = vec![1i128];
    for f in factors {
        let poly: Vec<i128> = f.poly.iter().map(|&c| c as i128).collect();
        acc = engine::poly_mul_int(&acc, &engine::poly_pow_int(&poly, f.mult));
    }
    acc
}

fn eval_mod(poly: &[i128], x: i128, p: i128) -> i128 {
    poly.iter().rev().fold(0i128, |acc, &c| (acc * x.rem_euclid(p) + c).rem_euclid(p))
}

/// Factors must stay squarefree and pairwise coprime modulo `p`.
fn check_branch_reduction(factors: &[BranchFactor], p: u64) -> Result<(), CurveError> {
    let red: Vec<Vec<u64>> = factors
        .iter()
        .map(|f| f.poly.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
        .collect();
    for (k, f) in red.iter().enumerate() {
        let df: Vec<u64> = f.iter().enumerate().skip(1).map(|(i, &c)| (c * (i as u64 % p)) % p).collect();
        if fp_poly::gcd(f, &df, p).len() > 1 {
            return Err(CurveError::BadReduction(format!("factor {:?} has a repeated root mod {p}", factors[k].poly)));
        }
        for (l, g) in red.iter().enumerate().skip(k + 1) {
            if fp_poly::gcd(f, g, p).len() > 1 {
                return Err(CurveError::BadReduction(format!(
                    "factors {:?} and {:?} share a root mod {p}",
                    factors[k].poly, factors[l].poly
                )));
            }
        }
    }
    Ok(())
}

/// Inverse of a square matrix over `Z/mZ` (`m` a power of `p`) whose determinant is a unit.
fn invert_unit_matrix(m: &crate::padic::modular::Modulus, a: &[Vec<u128>], p: u128) -> Option<Vec<Vec<u128>>> {
    let n = a.len();
    let mut aug: Vec<Vec<u128>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| u128::from(i == j)));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| aug[r][col] % p != 0)?;
        aug.swap(col, piv);
        let inv = m.inv(aug[col][col])?;
        for x in aug[col].iter_mut() {
            *x = m.mul(*x, inv);
        }
        for r in 0..n {
            if r != col && aug[r][col] != 0 {
                let f = aug[r][col];
                for c in 0..2 * n {
                    let t = m.mul(f, aug[col][c]);
                    aug[r][c] = m.sub(aug[r][c], t);
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Matrix product over `F_p`.
pub fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let k = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..k)
                .map(|j| (0..b.len()).fold(0u128, |s, t| (s + a[i][t] as u128 * b[t][j] as u128) % p as u128) as u64)
                .collect()
        })
        .collect()
}

/// Determinant over `F_p` by elimination.
pub fn det_mod_p(a: &[Vec<u64>], p: u64) -> u64 {
    let n = a.len();
    let mut m: Vec<Vec<u64>> = a.to_vec();
    let mut det = 1u128;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r][col] % p != 0) else { return 0 };
        if piv != col {
            m.swap(piv, col);
            det = (p as u128 - det) % p as u128;
        }
        det = det * m[col][col] as u128 % p as u128;
        let inv = fp_poly::inv_scalar(m[col][col], p);
        for r in col + 1..n {
            let f = m[r][col] as u128 * inv as u128 % p as u128;
            for c in col..n {
                m[r][c] = ((m[r][c] as u128 + p as u128 * p as u128 - f * m[col][c] as u128) % p as u128) as u64;
            }
        }
    }
    det as u64
}

/// Order of a matrix in `GL_g(F_p)` (`None` when singular or beyond `limit`).
pub fn matrix_order_mod_p(a: &[Vec<u64>], p: u64, limit: u64) -> Option<u64> {
    if det_mod_p(a, p) == 0 {
        return None;
    }
    let n = a.len();
    let id: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut cur = a.to_vec();
    for k in 1..=limit {
        if cur == id {
            return Some(k);
        }
        cur = mat_mul_mod(&cur, a, p);
    }
    None
}

/// A genus-2 instance `y² = f(x)` with an affine base point satisfying: `p ≥ 2g`, ordinary
/// reduction, equal gap sequences `{1, 2}` on the curve and its reduction, together with the
/// unramified degree needed for the full `p`-torsion of its formal group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineInstance {
    pub p: u64,
    pub f: Vec<i64>,
    pub x0: i64,
    pub y0: i64,
    pub hasse_witt: Vec<Vec<u64>>,
    /// Order of `−e^{(1)}` in `GL_g(F_p)`.
    pub residue_degree: u64,
}

/// Searches quintics `x⁵ + c₃x³ + c₂x² + c₁x + c₀` (`|c_i| ≤ 3`) and affine base points in a
/// fixed order for an instance whose torsion solutions live over an unramified extension of
/// degree at most `max_degree`.
pub fn search_affine_instance(primes: &[u64], max_degree: u64, precision: u32) -> Option<AffineInstance> {
    let range = -3i64..=3;
    for &p in primes {
        let Ok(field) = PadicField::qp(p, precision) else { continue };
        for c3 in range.clone() {
            for c2 in range.clone() {
                for c1 in range.clone() {
                    for c0 in range.clone() {
                        let f = vec![c0, c1, c2, c3, 0, 1];
                        if let Some(found) = affine_candidate(&f, p, max_degree, &field) {
                            return Some(found);
                        }
                    }
                }
            }
        }
    }
    None
}

fn affine_candidate(f: &[i64], p: u64, max_degree: u64, field: &PadicField) -> Option<AffineInstance> {
    let fi: Vec<i128> = f.iter().map(|&c| c as i128).collect();
    for x0 in 0..p as i64 {
        let fx = eval_mod(&fi, x0 as i128, p as i128) as u64;
        let Some(y0) = (1..p).find(|&y| y * y % p == fx) else { continue };
        let factors = vec![BranchFactor::new(f, 1)];
        let model = CurveModel::new(2, factors, BasePoint::Affine { x0, y0: y0 as i64 }, field.clone()).ok()?;
        if model.genus() != 2 || (p as usize) < 2 * model.genus() {
            return None;
        }
        let e1 = model.power_matrix_mod(p as u128, p as i64).ok()?;
        let e1: Vec<Vec<u64>> = e1.iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
        let neg: Vec<Vec<u64>> = e1.iter().map(|r| r.iter().map(|&x| (p - x % p) % p).collect()).collect();
        // The order is independent of the base point: changing it conjugates e^{(1)} over F_p.
        let order = matrix_order_mod_p(&neg, p, max_degree)?;
        match (model.gap_data(), model.reduction_gap_data()) {
            (Ok(a), Ok(b)) if a == b && a.mu == vec![1, 2] => {}
            _ => return None,
        }
        return Some(AffineInstance { p, f: f.to_vec(), x0, y0: y0 as i64, hasse_witt: e1, residue_degree: order });
    }
    None
}
