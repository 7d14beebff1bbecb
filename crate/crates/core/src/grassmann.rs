//! Points of the Sato Grassmannian materialized through their standard basis up to a degree
//! cap: Maya diagrams, Plücker coordinates, integrality and reduction, products of
//! subspaces, and intersections with the tail spaces `T^n F[[T^{-1}]]`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinat::{determinant, maya_to_pair, MayaDiagram, Partition};
use crate::padic::{PadicElement, ResidueElement, Scalar};
use crate::series::{LaurentSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrassError {
    #[error("leading coefficient at degree {degree} is zero at precision; precision too low to echelonize")]
    DegenerateSpan { degree: i64 },
    #[error("degree cap {cap} (floor {floor}) is too small: need {needed}")]
    CapTooSmall { cap: i64, floor: i64, needed: i64 },
    #[error("basis element of degree {degree} appears unbounded at the stored floor")]
    UnboundedAtCap { degree: i64 },
    #[error("no vectors given")]
    Empty,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Integrality class of a point decided at its cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrality {
    Bounded,
    Integral,
    Strict,
}

/// How a strictness verdict is backed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Maya diagrams of the point and of its reduction agree through the cap only.
    CapChecked { cap: i64 },
    /// An external finiteness argument (such as equal gap sequences of a curve and its
    /// reduction) extends the cap check to all degrees.
    TheoremBacked { reason: String },
}

/// A point of the Grassmannian through its standard basis in degrees `≤ cap`.
///
/// The Maya diagram is taken to contain every integer above the cap; callers choose the cap
/// beyond the last gap.
#[derive(Clone, Debug)]
pub struct GrassPoint<C: Scalar = PadicElement> {
    field: C::Field,
    cap: i64,
    floor: i64,
    basis: Vec<LaurentSeries<C>>,
    maya: MayaDiagram,
    index: i64,
    partition: Partition,
}

/// Eliminates `v` against monic pivots; returns the reduced vector.
fn reduce_against<C: Scalar>(
    mut v: LaurentSeries<C>,
    pivots: &BTreeMap<i64, LaurentSeries<C>>,
) -> Result<LaurentSeries<C>, GrassError> {
    loop {
        let Some(d) = v.deg() else { return Ok(v) };
        match pivots.get(&d) {
            Some(piv) => {
                let c = v.coeff_or_zero(d);
                v = v.sub(&piv.scale(&c))?.truncate_top(d - 1);
            }
            None => return Ok(v),
        }
    }
}

impl<C: Scalar> LaurentSeries<C> {
    /// Drops stored coefficients above `top` (used after exact cancellation of the lead).
    fn truncate_top(&self, top: i64) -> Self {
        let terms: Vec<C> = self.terms().filter(|(n, _)| *n <= top).map(|(_, c)| c.clone()).collect();
        LaurentSeries::new(self.field(), self.floor(), terms)
    }
}

/// Full echelon over all degrees: keys are pivot degrees, values monic vectors with zero
/// coefficients at every lower pivot degree.
fn echelon<C: Scalar>(vectors: &[LaurentSeries<C>]) -> Result<BTreeMap<i64, LaurentSeries<C>>, GrassError> {
    let floor = vectors.iter().map(|v| v.floor()).max().ok_or(GrassError::Empty)?;
    let mut pivots: BTreeMap<i64, LaurentSeries<C>> = BTreeMap::new();
    for v in vectors {
        let v = reduce_against(v.truncate_below(floor), &pivots)?;
        let Some(d) = v.deg() else { continue };
        let lead = v.coeff_or_zero(d);
        if lead.is_unreliable_pivot() {
            return Err(GrassError::DegenerateSpan { degree: d });
        }
        let mut w = v.scale(&lead.inv().ok_or(GrassError::DegenerateSpan { degree: d })?).truncate_top(d);
        // Clear coefficients at lower pivot degrees, from the top down.
        let lower: Vec<i64> = pivots.range(..d).map(|(k, _)| *k).rev().collect();
        for s in lower {
            let c = w.coeff_or_zero(s);
            if !c.is_zero() {
                w = w.sub(&pivots[&s].scale(&c))?;
            }
        }
        // Clear the new pivot degree in higher pivots.
        for (_, p) in pivots.range_mut(d + 1..) {
            let c = p.coeff_or_zero(d);
            if !c.is_zero() {
                *p = p.sub(&w.scale(&c))?;
            }
        }
        pivots.insert(d, w);
    }
    Ok(pivots)
}

impl<C: Scalar> GrassPoint<C> {
    /// Row-reduced monic echelon basis of the span of `vectors`, kept in degrees `≤ cap`.
    pub fn standard_basis(vectors: &[LaurentSeries<C>], cap: i64) -> Result<Self, GrassError> {
        let field = vectors.first().ok_or(GrassError::Empty)?.field().clone();
        let pivots = echelon(vectors)?;
        let floor = vectors.iter().map(|v| v.floor()).max().unwrap();
        let basis: Vec<LaurentSeries<C>> = pivots.range(..=cap).map(|(_, v)| v.clone()).collect();
        Ok(Self::from_basis(field, basis, cap, floor))
    }

    fn from_basis(field: C::Field, basis: Vec<LaurentSeries<C>>, cap: i64, floor: i64) -> Self {
        let degs: Vec<i64> = basis.iter().map(|v| v.deg().expect("nonzero basis")).collect();
        let maya = MayaDiagram::from_elements(degs, cap + 1);
        let (index, partition) = maya_to_pair(&maya);
        GrassPoint { field, cap, floor, basis, maya, index, partition }
    }

    pub fn field(&self) -> &C::Field {
        &self.field
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    /// Standard basis elements of degree `≤ cap`, by increasing degree.
    pub fn basis(&self) -> &[LaurentSeries<C>] {
        &self.basis
    }

    pub fn maya(&self) -> &MayaDiagram {
        &self.maya
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Degrees `s_1 < s_2 < …` of the stored basis.
    pub fn degrees(&self) -> Vec<i64> {
        self.basis.iter().map(|v| v.deg().unwrap()).collect()
    }

    /// Plücker coordinate `det(v_{i, j − λ_j − i(V)})` at the stabilized size.
    pub fn plucker(&self, lambda: &Partition) -> Result<C, GrassError> {
        let last_gap = self.maya.gaps().iter().next_back().copied().unwrap_or(0).max(0);
        let before = self.maya.elements_up_to(last_gap).len();
        let n = lambda.len().max(before).max(1);
        let needed_deg = n as i64 - self.index;
        if n > self.basis.len() {
            return Err(GrassError::CapTooSmall { cap: self.cap, floor: self.floor, needed: needed_deg });
        }
        let lowest = 1 - lambda.part(1) as i64 - self.index;
        if lowest < self.floor {
            return Err(GrassError::CapTooSmall { cap: self.cap, floor: self.floor, needed: lowest });
        }
        let m: Vec<Vec<C>> = (0..n)
            .map(|i| {
                (1..=n)
                    .map(|j| self.basis[i].coeff_or_zero(j as i64 - lambda.part(j) as i64 - self.index))
                    .collect()
            })
            .collect();
        Ok(determinant(&self.field, m))
    }

    /// `dim {v ∈ V : deg v ≤ n}`.
    pub fn tail_intersection_dim(&self, n: i64) -> Result<usize, GrassError> {
        if n > self.cap {
            return Err(GrassError::CapTooSmall { cap: self.cap, floor: self.floor, needed: n });
        }
        Ok(self.degrees().iter().filter(|&&d| d <= n).count())
    }

    /// Span of products of basis elements; complete in degrees up to
    /// `min(cap + s'_1, cap' + s_1)`.
    pub fn subspace_product(&self, o: &Self) -> Result<Self, GrassError> {
        let (Some(&s1), Some(&t1)) = (self.degrees().first(), o.degrees().first()) else {
            return Err(GrassError::Empty);
        };
        let cap = (self.cap + t1).min(o.cap + s1);
        let floor = (self.floor + o.cap).max(o.floor + self.cap);
        if cap < s1 + t1 {
            return Err(GrassError::CapTooSmall { cap, floor, needed: s1 + t1 });
        }
        let mut prods = Vec::new();
        for a in &self.basis {
            for b in &o.basis {
                if a.deg().unwrap() + b.deg().unwrap() <= cap {
                    prods.push(a.mul(b)?.truncate_below(floor));
                }
            }
        }
        Self::standard_basis(&prods, cap)
    }

    /// Multiplication of every basis element by a fixed series.
    pub fn homothety(&self, u: &LaurentSeries<C>) -> Result<Self, GrassError> {
        let du = u.deg().ok_or(GrassError::Empty)?;
        let prods: Vec<LaurentSeries<C>> = self.basis.iter().map(|v| v.mul(u)).collect::<Result<_, _>>()?;
        Self::standard_basis(&prods, self.cap + du)
    }
}

/// Integrality verdict with the reduction of the point.
#[derive(Clone, Debug)]
pub struct IntegralityReport {
    pub class: Integrality,
    pub certification: Certification,
    /// Norm valuations of the standard basis elements (`None` for zero).
    pub row_norms: Vec<Option<Ratio<i64>>>,
    pub reduction: GrassPoint<ResidueElement>,
}

impl GrassPoint<PadicElement> {
    /// Decides integrality from the basis norms at the cap and computes the reduction `V^red`.
    ///
    /// Rows whose degree exceeds the last gap of `V` must have unit norm for the point to be
    /// integral; strictness additionally requires `M(V) ⊇ M(V^red)` through the cap.
    pub fn classify_integrality(&self) -> Result<IntegralityReport, GrassError> {
        let zero = Ratio::from_integer(0);
        let mut row_norms = Vec::new();
        for v in &self.basis {
            let nv = v.norm_val();
            if let Some(nv) = nv {
                if nv < zero {
                    let at_floor = v.coeff_or_zero(v.floor()).valuation();
                    if at_floor == Some(nv) && v.floor() < v.deg().unwrap() {
                        return Err(GrassError::UnboundedAtCap { degree: v.deg().unwrap() });
                    }
                }
            }
            row_norms.push(nv);
        }
        let reduction = self.reduction()?;
        let last_gap = self.maya.gaps().iter().next_back().copied().unwrap_or(0);
        let tail_ok = self
            .basis
            .iter()
            .zip(&row_norms)
            .filter(|(v, _)| v.deg().unwrap() > last_gap)
            .all(|(_, n)| n.map_or(true, |n| n >= zero));
        let contains = reduction.degrees().iter().all(|&d| self.maya.contains(d));
        let class = if contains && row_norms.iter().all(|n| n.map_or(true, |n| n >= zero)) {
            Integrality::Strict
        } else if tail_ok && reduction.index() == self.index {
            Integrality::Integral
        } else {
            Integrality::Bounded
        };
        Ok(IntegralityReport { class, certification: Certification::CapChecked { cap: self.cap }, row_norms, reduction })
    }

    /// `V^red`: reductions of the norm-one part of `V` in degrees `≤ cap`.
    ///
    /// Each basis element is rescaled to norm one; whenever two rescaled vectors reduce to
    /// the same degree, a unit multiple of one is subtracted from the other and the result
    /// rescaled again, so that the reductions end up with distinct degrees.
    pub fn reduction(&self) -> Result<GrassPoint<ResidueElement>, GrassError> {
        let rf = self.field.residue_field();
        let mut pool: Vec<LaurentSeries<PadicElement>> = self.basis.iter().map(normalize).collect();
        let mut by_red_deg: BTreeMap<i64, LaurentSeries<PadicElement>> = BTreeMap::new();
        let mut rounds = 0usize;
        let limit = 64 * (self.basis.len() + 1) * (self.field.max_rel() as usize + 1);
        while let Some(w) = pool.pop() {
            rounds += 1;
            if rounds > limit {
                break;
            }
            let r = w.reduce_mod_p()?;
            let Some(d) = r.deg() else { continue };
            if d > self.cap {
                continue;
            }
            match by_red_deg.get(&d) {
                None => {
                    by_red_deg.insert(d, w);
                }
                Some(other) => {
                    let c = w.coeff_or_zero(d).div(&other.coeff_or_zero(d)).map_err(|_| GrassError::DegenerateSpan { degree: d })?;
                    let diff = w.sub(&other.scale(&c))?;
                    if diff.norm_val().is_some() {
                        pool.push(normalize(&diff));
                    }
                }
            }
        }
        let reds: Vec<LaurentSeries<ResidueElement>> =
            by_red_deg.values().map(|w| w.reduce_mod_p()).collect::<Result<_, _>>()?;
        if reds.is_empty() {
            return Ok(GrassPoint::from_basis(rf, Vec::new(), self.cap, self.floor));
        }
        GrassPoint::standard_basis(&reds, self.cap)
    }
}

/// Rescales a nonzero series by a power of the uniformizer to norm one.
fn normalize(v: &LaurentSeries<PadicElement>) -> LaurentSeries<PadicElement> {
    let Some(nv) = v.norm_val() else { return v.clone() };
    let e = v.field().e() as i64;
    let units = (nv * Ratio::from_integer(e)).to_integer();
    let terms: Vec<PadicElement> = v.terms().map(|(_, c)| c.shift(-units)).collect();
    LaurentSeries::new(v.field(), v.floor(), terms)
}

/// Standard basis of the span of `vectors` in degrees `≤ cap`.
pub fn standard_basis<C: Scalar>(vectors: &[LaurentSeries<C>], cap: i64) -> Result<GrassPoint<C>, GrassError> {
    GrassPoint::standard_basis(vectors, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicField;
    use proptest::prelude::*;

    fn k() -> PadicField {
        PadicField::qp(11, 10).unwrap()
    }

    fn ser(k: &PadicField, floor: i64, c: &[i64]) -> LaurentSeries {
        LaurentSeries::new(k, floor, c.iter().map(|&x| k.int(x)).collect())
    }

    #[test]
    fn echelon_of_small_spans() {
        let k = k();
        let vs = vec![ser(&k, -5, &[0, 0, 0, 0, 0, 0, 0, 1]), ser(&k, -5, &[0, 0, 0, 0, 0, 0, 1, 1]), ser(&k, -5, &[0, 0, 0, 0, 0, 1])];
        let v = GrassPoint::standard_basis(&vs, 2).unwrap();
        assert_eq!(v.degrees(), vec![0, 1, 2]);
        for (i, b) in v.basis().iter().enumerate() {
            assert_eq!(b.leading_coeff().unwrap(), k.one());
            for s in &v.degrees()[..i] {
                assert!(b.coeff_or_zero(*s).is_zero());
            }
        }
        let vs = vec![ser(&k, -3, &[0, 0, 0, 0, 1]), ser(&k, -3, &[0, 0, 0, 0, 11])];
        let v = GrassPoint::standard_basis(&vs, 1).unwrap();
        assert_eq!(v.degrees(), vec![1]);
    }

    /// Vectors `T^n + (T^{n-1} term)` for all `n ≥ 0` except the gaps.
    fn semigroup_like(k: &PadicField, gaps: &[i64], cap: i64, floor: i64) -> Vec<LaurentSeries> {
        (0..=cap + 3)
            .filter(|n| !gaps.contains(n))
            .map(|n| LaurentSeries::from_terms(k, floor, &[(n, k.one()), (n - 1, k.int(3 * n + 1)), (n - 3, k.int(n))]))
            .collect()
    }

    #[test]
    fn plucker_support_on_constructed_points() {
        let k = k();
        for gaps in [vec![], vec![1], vec![1, 2], vec![2, 3, 5], vec![1, 2, 4, 7]] {
            let vs = semigroup_like(&k, &gaps, 14, -20);
            let v = GrassPoint::standard_basis(&vs, 14).unwrap();
            let kappa = v.partition().clone();
            assert_eq!(v.plucker(&kappa).unwrap(), k.one());
            for lam in Partition::all_up_to(6) {
                let pl = v.plucker(&lam).unwrap();
                if !pl.is_zero() {
                    assert!(kappa.le(&lam), "gaps {gaps:?}: P_{lam} nonzero but κ = {kappa}");
                }
            }
        }
    }

    #[test]
    fn vacuum_plucker() {
        let k = k();
        let vs = semigroup_like(&k, &[], 8, -12);
        let v = GrassPoint::standard_basis(&vs, 8).unwrap();
        assert_eq!(v.index(), 1);
        let vs: Vec<LaurentSeries> = (1..=10).map(|n| LaurentSeries::monomial(&k, n, k.one(), -12)).collect();
        let v = GrassPoint::standard_basis(&vs, 8).unwrap();
        assert_eq!(v.index(), 0);
        assert_eq!(v.plucker(&Partition::empty()).unwrap(), k.one());
        for lam in Partition::all_up_to(5).into_iter().skip(1) {
            assert!(v.plucker(&lam).unwrap().is_zero());
        }
    }

    #[test]
    fn gap_sequence_one_two() {
        let k = k();
        let v = GrassPoint::standard_basis(&semigroup_like(&k, &[1, 2], 12, -20), 12).unwrap();
        assert_eq!(v.index(), -1);
        assert_eq!(v.partition(), &Partition::new(&[2]).unwrap());
        assert_eq!(v.tail_intersection_dim(0).unwrap(), 1);
        assert_eq!(v.tail_intersection_dim(1).unwrap(), 1);
        assert_eq!(v.tail_intersection_dim(3).unwrap(), 2);
    }

    #[test]
    fn integrality_classes() {
        let k = k();
        let vs = semigroup_like(&k, &[1, 2], 10, -15);
        let v = GrassPoint::standard_basis(&vs, 10).unwrap();
        assert_eq!(v.classify_integrality().unwrap().class, Integrality::Strict);
        // A row with a 1/11 coefficient in low degree only: integral but not strict.
        let mut vs2 = vs.clone();
        vs2[1] = LaurentSeries::from_terms(&k, -15, &[(3, k.one()), (-2, k.rational(1, 11))]);
        let v2 = GrassPoint::standard_basis(&vs2, 10).unwrap();
        let rep = v2.classify_integrality().unwrap();
        assert_ne!(rep.class, Integrality::Strict);
    }

    #[test]
    fn homothety_inverse_and_module_product() {
        let k = k();
        let a = GrassPoint::standard_basis(&semigroup_like(&k, &[1, 2], 16, -24), 16).unwrap();
        let t = LaurentSeries::monomial(&k, 1, k.one(), -24);
        let tinv = LaurentSeries::monomial(&k, -1, k.one(), -24);
        let back = a.homothety(&t).unwrap().homothety(&tinv).unwrap();
        assert_eq!(back.degrees(), a.degrees());
    }

    proptest! {
        #[test]
        fn echelon_is_idempotent(coeffs in proptest::collection::vec(proptest::collection::vec(-50i64..50, 8), 1..6)) {
            let k = k();
            let vs: Vec<LaurentSeries> = coeffs.iter().map(|c| ser(&k, -4, c)).collect();
            if let Ok(v) = GrassPoint::standard_basis(&vs, 3) {
                let w = GrassPoint::standard_basis(v.basis(), 3).unwrap();
                prop_assert_eq!(v.degrees(), w.degrees());
                for (a, b) in v.basis().iter().zip(w.basis()) {
                    prop_assert!(a.eq_at_precision(b));
                }
            }
        }
    }
}
