//! Laurent series in the descending variable and finite windows of the bi-infinite space.
//!
//! A [`LaurentSeries`] `Σ_{i ≤ n} v_i T^i` has finitely many positive-degree terms and a
//! descending tail stored down to a `floor`; exponents above the stored top are exactly zero.
//! The subring of series with degree `≤ 0` is the power-series ring in `T^{-1}`.
//!
//! A [`WindowSeries`] stores the coefficients of a bi-infinite series on `[lo, hi]` together
//! with what is known about the coefficients outside the window, so that products report an
//! error bound (or exactness) for every coefficient they produce.

use num_rational::Ratio;
use thiserror::Error;

use crate::padic::{PadicElement, ResidueElement, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("series is not integral (norm exceeds 1)")]
    NotIntegral,
    #[error("division by a series whose leading coefficient is zero at precision")]
    NotInvertible,
}

/// A Laurent series with coefficients on `[floor, top]`.
#[derive(Clone, Debug)]
pub struct LaurentSeries<C: Scalar = PadicElement> {
    field: C::Field,
    floor: i64,
    coeffs: Vec<C>,
}

/// Degree and sup-norm of a series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeNorm {
    /// Exponent of the leading nonzero-at-precision coefficient (`None` for a zero series).
    pub deg: Option<i64>,
    /// Minimal coefficient valuation; the norm is `p^{-norm_val}` (`None` for a zero series).
    pub norm_val: Option<Ratio<i64>>,
}

impl<C: Scalar> LaurentSeries<C> {
    /// Series with coefficients `coeffs[i]` at exponent `floor + i`.
    pub fn new(field: &C::Field, floor: i64, coeffs: Vec<C>) -> Self {
        LaurentSeries { field: field.clone(), floor, coeffs }
    }

    /// The zero series stored down to `floor`.
    pub fn zero(field: &C::Field, floor: i64) -> Self {
        LaurentSeries { field: field.clone(), floor, coeffs: Vec::new() }
    }

    /// `c·T^n` stored down to `floor`.
    pub fn monomial(field: &C::Field, n: i64, c: C, floor: i64) -> Self {
        let floor = floor.min(n);
        let mut coeffs = vec![C::zero_in(field); (n - floor + 1) as usize];
        coeffs[(n - floor) as usize] = c;
        LaurentSeries { field: field.clone(), floor, coeffs }
    }

    /// Series from `(exponent, coefficient)` pairs.
    pub fn from_terms(field: &C::Field, floor: i64, terms: &[(i64, C)]) -> Self {
        let top = terms.iter().map(|t| t.0).max().unwrap_or(floor).max(floor);
        let mut coeffs = vec![C::zero_in(field); (top - floor + 1) as usize];
        for (n, c) in terms {
            if *n >= floor {
                let slot = &mut coeffs[(n - floor) as usize];
                *slot = slot.add(c);
            }
        }
        LaurentSeries { field: field.clone(), floor, coeffs }
    }

    pub fn field(&self) -> &C::Field {
        &self.field
    }

    /// Lowest stored exponent; coefficients below it are unknown.
    pub fn floor(&self) -> i64 {
        self.floor
    }

    /// Highest stored exponent (everything above is exactly zero).
    pub fn top(&self) -> i64 {
        self.floor + self.coeffs.len() as i64 - 1
    }

    /// Coefficient at exponent `n`: exact zero above the stored range, `None` below the floor.
    pub fn coeff(&self, n: i64) -> Option<C> {
        if n < self.floor {
            return None;
        }
        Some(self.coeffs.get((n - self.floor) as usize).cloned().unwrap_or_else(|| C::zero_in(&self.field)))
    }

    /// Coefficient at `n`, treating unknown tail coefficients as zero.
    pub fn coeff_or_zero(&self, n: i64) -> C {
        self.coeff(n).unwrap_or_else(|| C::zero_in(&self.field))
    }

    /// Stored `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.floor + i as i64, c))
    }

    pub fn deg(&self) -> Option<i64> {
        self.coeffs.iter().rposition(|c| !c.is_zero()).map(|i| self.floor + i as i64)
    }

    pub fn leading_coeff(&self) -> Option<C> {
        self.deg().and_then(|d| self.coeff(d))
    }

    pub fn norm_val(&self) -> Option<Ratio<i64>> {
        self.coeffs.iter().filter_map(|c| c.valuation()).min()
    }

    pub fn degree_norm(&self) -> DegreeNorm {
        DegreeNorm { deg: self.deg(), norm_val: self.norm_val() }
    }

    /// Drops stored coefficients below `floor`.
    pub fn truncate_below(&self, floor: i64) -> Self {
        if floor <= self.floor {
            return self.clone();
        }
        let skip = ((floor - self.floor) as usize).min(self.coeffs.len());
        LaurentSeries { field: self.field.clone(), floor, coeffs: self.coeffs[skip..].to_vec() }
    }

    /// Removes trailing zero-at-precision coefficients above the degree.
    pub fn trimmed(&self) -> Self {
        let mut c = self.coeffs.clone();
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        LaurentSeries { field: self.field.clone(), floor: self.floor, coeffs: c }
    }

    fn check(&self, o: &Self) -> Result<(), SeriesError> {
        if self.field != o.field {
            return Err(SeriesError::FieldMismatch);
        }
        Ok(())
    }

    fn combine(&self, o: &Self, f: impl Fn(&C, &C) -> C) -> Result<Self, SeriesError> {
        self.check(o)?;
        let floor = self.floor.max(o.floor);
        let top = self.top().max(o.top());
        if top < floor {
            return Ok(Self::zero(&self.field, floor));
        }
        let coeffs = (floor..=top).map(|n| f(&self.coeff_or_zero(n), &o.coeff_or_zero(n))).collect();
        Ok(LaurentSeries { field: self.field.clone(), floor, coeffs })
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.combine(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.combine(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &C) -> Self {
        LaurentSeries {
            field: self.field.clone(),
            floor: self.floor,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        LaurentSeries { field: self.field.clone(), floor: self.floor, coeffs: self.coeffs.iter().map(|x| x.neg()).collect() }
    }

    /// Multiplication by `T^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries { field: self.field.clone(), floor: self.floor + k, coeffs: self.coeffs.clone() }
    }

    /// Product; the result is stored down to the lowest exponent not affected by either
    /// operand's unknown tail.
    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Ok(Self::zero(&self.field, (self.floor + o.top()).max(o.floor + self.top())));
        }
        let floor = (self.floor + o.top()).max(o.floor + self.top());
        let top = self.top() + o.top();
        let mut coeffs = vec![C::zero_in(&self.field); (top - floor + 1) as usize];
        for (i, a) in self.terms() {
            for (j, b) in o.terms() {
                let k = i + j;
                if k < floor {
                    continue;
                }
                let slot = &mut coeffs[(k - floor) as usize];
                *slot = slot.add(&a.mul(b));
            }
        }
        Ok(LaurentSeries { field: self.field.clone(), floor, coeffs })
    }

    /// Whether the two series agree on their common stored range at precision.
    pub fn eq_at_precision(&self, o: &Self) -> bool {
        match self.sub(o) {
            Ok(d) => d.coeffs.iter().all(|c| c.is_zero()),
            Err(_) => false,
        }
    }
}

impl LaurentSeries<PadicElement> {
    /// Coefficientwise reduction modulo the maximal ideal.
    pub fn reduce_mod_p(&self) -> Result<LaurentSeries<ResidueElement>, SeriesError> {
        if let Some(v) = self.norm_val() {
            if v < Ratio::from_integer(0) {
                return Err(SeriesError::NotIntegral);
            }
        }
        let rf = self.field.residue_field();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.residue().map_err(|_| SeriesError::NotIntegral))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LaurentSeries { field: rf, floor: self.floor, coeffs })
    }
}

/// Knowledge about the coefficients of a window series outside its stored range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    /// All coefficients beyond the window are exactly zero.
    Zero,
    /// The coefficient at distance `t ≥ 1` from the window edge has valuation at least
    /// `base + slope·(t − 1)` with `slope ≥ 0`.
    Bounded { base: Ratio<i64>, slope: Ratio<i64> },
    /// Nothing is known.
    Unknown,
}

impl Tail {
    fn bound(&self, dist: i64) -> Option<Option<Ratio<i64>>> {
        match self {
            Tail::Zero => Some(None),
            Tail::Bounded { base, slope } => Some(Some(*base + *slope * Ratio::from_integer(dist - 1))),
            Tail::Unknown => None,
        }
    }
}

/// Coefficients of an element of the bi-infinite space on a finite window.
#[derive(Clone, Debug)]
pub struct WindowSeries<C: Scalar = PadicElement> {
    field: C::Field,
    lo: i64,
    coeffs: Vec<C>,
    /// Per-coefficient lower bound on the valuation of the error (`None` means exact).
    errs: Vec<Option<Ratio<i64>>>,
    below: Tail,
    above: Tail,
}

/// Error bound for a coefficient: `Err(())` when nothing can be said.
type Bound = Result<Option<Ratio<i64>>, ()>;

fn min_bound(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Err(()), _) | (_, Err(())) => Err(()),
        (Ok(None), x) | (x, Ok(None)) => x,
        (Ok(Some(x)), Ok(Some(y))) => Ok(Some(x.min(y))),
    }
}

fn add_bound(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Ok(None), _) | (_, Ok(None)) => Ok(None),
        (Err(()), _) | (_, Err(())) => Err(()),
        (Ok(Some(x)), Ok(Some(y))) => Ok(Some(x + y)),
    }
}

impl<C: Scalar> WindowSeries<C> {
    /// Exact coefficients on `[lo, lo + len)` with the given tail knowledge.
    pub fn new(field: &C::Field, lo: i64, coeffs: Vec<C>, below: Tail, above: Tail) -> Self {
        let errs = vec![None; coeffs.len()];
        WindowSeries { field: field.clone(), lo, coeffs, errs, below, above }
    }

    /// Window of a Laurent series: zero above its top, tail below its floor bounded by its norm.
    pub fn from_laurent(v: &LaurentSeries<C>, lo: i64, hi: i64) -> Self {
        let lo = lo.max(v.floor());
        let coeffs: Vec<C> = (lo..=hi).map(|n| v.coeff_or_zero(n)).collect();
        let above = if hi >= v.top() { Tail::Zero } else { Tail::Unknown };
        let below = if lo > v.floor() {
            Tail::Unknown
        } else {
            match v.norm_val() {
                Some(nv) => Tail::Bounded { base: nv, slope: Ratio::from_integer(0) },
                None => Tail::Unknown,
            }
        };
        Self::new(v.field(), lo, coeffs, below, above)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, n: i64) -> Option<&C> {
        if n < self.lo {
            return None;
        }
        self.coeffs.get((n - self.lo) as usize)
    }

    /// Error bound of the coefficient at `n`: `Ok(None)` exact, `Ok(Some(v))` correct modulo
    /// valuation `v`, `Err(())` unknown.
    pub fn error_at(&self, n: i64) -> Result<Option<Ratio<i64>>, ()> {
        if n < self.lo || n > self.hi() {
            return Err(());
        }
        Ok(self.errs[(n - self.lo) as usize])
    }

    /// Largest interval of exactly known coefficients.
    pub fn exact_range(&self) -> Option<(i64, i64)> {
        let mut best: Option<(i64, i64)> = None;
        let mut start: Option<i64> = None;
        for (i, e) in self.errs.iter().enumerate() {
            let n = self.lo + i as i64;
            if e.is_none() {
                let s = *start.get_or_insert(n);
                if best.map_or(true, |(a, b)| n - s > b - a) {
                    best = Some((s, n));
                }
            } else {
                start = None;
            }
        }
        best
    }

    /// Valuation of the sup norm over the stored coefficients.
    pub fn norm_val(&self) -> Option<Ratio<i64>> {
        self.coeffs.iter().filter_map(|c| c.valuation()).min()
    }

    /// Lower bound on the valuation of the coefficient at `n` (stored or tail).
    fn val_bound(&self, n: i64) -> Bound {
        if n < self.lo {
            self.below.bound(self.lo - n).ok_or(())
        } else if n > self.hi() {
            self.above.bound(n - self.hi()).ok_or(())
        } else {
            let i = (n - self.lo) as usize;
            let v = self.coeffs[i].valuation();
            match (v, self.errs[i]) {
                (v, None) => Ok(v),
                (None, Some(e)) => Ok(Some(e)),
                (Some(v), Some(e)) => Ok(Some(v.min(e))),
            }
        }
    }

    /// Like `val_bound`, but uses the window norm inside the stored range so that the bound
    /// is monotone in the distance from the window.
    fn partner_bound(&self, n: i64) -> Bound {
        if n < self.lo || n > self.hi() {
            return self.val_bound(n);
        }
        (self.lo..=self.hi()).map(|m| self.val_bound(m)).fold(Ok(None), min_bound)
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        if self.field != o.field {
            return Err(SeriesError::FieldMismatch);
        }
        let lo = self.lo.max(o.lo);
        let hi = self.hi().min(o.hi());
        let mut coeffs = Vec::new();
        let mut errs = Vec::new();
        for n in lo..=hi {
            coeffs.push(self.coeff(n).unwrap().add(o.coeff(n).unwrap()));
            let e = min_bound(Ok(self.errs[(n - self.lo) as usize]), Ok(o.errs[(n - o.lo) as usize]));
            errs.push(e.unwrap_or(None));
        }
        let below = if lo == self.lo && lo == o.lo && self.below == Tail::Zero && o.below == Tail::Zero {
            Tail::Zero
        } else {
            Tail::Unknown
        };
        let above = if hi == self.hi() && hi == o.hi() && self.above == Tail::Zero && o.above == Tail::Zero {
            Tail::Zero
        } else {
            Tail::Unknown
        };
        Ok(WindowSeries { field: self.field.clone(), lo, coeffs, errs, below, above })
    }

    pub fn scale(&self, c: &C) -> Self {
        let cv = c.valuation();
        let errs = self
            .errs
            .iter()
            .map(|e| match (e, cv) {
                (Some(e), Some(v)) => Some(*e + v),
                (Some(_), None) => None,
                (None, _) => None,
            })
            .collect();
        WindowSeries {
            field: self.field.clone(),
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(),
            errs,
            below: Tail::Unknown,
            above: Tail::Unknown,
        }
    }

    /// Product restricted to `[lo, hi]`; each coefficient carries the bound on the
    /// contribution of all pairs involving a coefficient outside the stored windows.
    pub fn mul_on(&self, o: &Self, lo: i64, hi: i64) -> Result<Self, SeriesError> {
        if self.field != o.field {
            return Err(SeriesError::FieldMismatch);
        }
        let mut coeffs = Vec::new();
        let mut errs = Vec::new();
        let mut out_lo = None;
        let (s_in, o_in) = (self.partner_bound(self.lo), o.partner_bound(o.lo));
        let s_norm = |n: i64| if n < self.lo || n > self.hi() { self.val_bound(n) } else { s_in };
        let o_norm = |n: i64| if n < o.lo || n > o.hi() { o.val_bound(n) } else { o_in };
        for k in lo..=hi {
            let mut s = C::zero_in(&self.field);
            let mut err: Bound = Ok(None);
            for (i, a) in self.coeffs.iter().enumerate() {
                let i = self.lo + i as i64;
                if let Some(b) = o.coeff(k - i) {
                    s = s.add(&a.mul(b));
                    let ea = add_bound(Ok(self.errs[(i - self.lo) as usize]), o.val_bound(k - i));
                    let eb = add_bound(Ok(o.errs[(k - i - o.lo) as usize]), self.val_bound(i));
                    err = min_bound(err, min_bound(ea, eb));
                }
            }
            // Missing pairs: the nearest outside index on each side dominates the bound.
            let cand = [
                add_bound(self.val_bound(self.lo - 1), o_norm(k - self.lo + 1)),
                add_bound(self.val_bound(self.hi() + 1), o_norm(k - self.hi() - 1)),
                add_bound(o.val_bound(o.lo - 1), s_norm(k - o.lo + 1)),
                add_bound(o.val_bound(o.hi() + 1), s_norm(k - o.hi() - 1)),
            ];
            for c in cand {
                err = min_bound(err, c);
            }
            match err {
                Err(()) => {
                    if out_lo.is_some() {
                        break;
                    }
                    continue;
                }
                Ok(e) => {
                    out_lo.get_or_insert(k);
                    coeffs.push(s);
                    errs.push(e);
                }
            }
        }
        let lo = out_lo.unwrap_or(lo);
        Ok(WindowSeries { field: self.field.clone(), lo, coeffs, errs, below: Tail::Unknown, above: Tail::Unknown })
    }

    /// Product over the full convolution range of the two windows.
    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.mul_on(o, self.lo + o.lo, self.hi() + o.hi())
    }
}

/// Ring operations on series of either kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
}

/// Adds or multiplies two Laurent series.
pub fn arith<C: Scalar>(a: &LaurentSeries<C>, b: &LaurentSeries<C>, op: ArithOp) -> Result<LaurentSeries<C>, SeriesError> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Mul => a.mul(b),
    }
}

/// Degree and norm of a Laurent series.
pub fn degree_norm<C: Scalar>(v: &LaurentSeries<C>) -> DegreeNorm {
    v.degree_norm()
}

/// Coefficientwise reduction of an integral series.
pub fn reduce_mod_p(v: &LaurentSeries<PadicElement>) -> Result<LaurentSeries<ResidueElement>, SeriesError> {
    v.reduce_mod_p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicField;
    use proptest::prelude::*;

    fn k() -> PadicField {
        PadicField::qp(11, 12).unwrap()
    }

    fn ser(k: &PadicField, floor: i64, c: &[i64]) -> LaurentSeries {
        LaurentSeries::new(k, floor, c.iter().map(|&x| k.int(x)).collect())
    }

    #[test]
    fn difference_of_squares() {
        let k = k();
        let a = ser(&k, -4, &[0, 0, 0, 0, 1, 1]); // T + 1
        let b = ser(&k, -4, &[0, 0, 0, 0, -1, 1]); // T - 1
        let c = a.mul(&b).unwrap();
        assert_eq!(c.deg(), Some(2));
        assert_eq!(c.coeff(2).unwrap(), k.one());
        assert!(c.coeff(1).unwrap().is_zero());
        assert_eq!(c.coeff(0).unwrap(), k.int(-1));
        assert!(c.coeff(-2).unwrap().is_zero());
        assert_eq!(c.floor(), -3);
    }

    #[test]
    fn monic_element_has_unit_norm() {
        let k = k();
        let v = ser(&k, 1, &[33, 1]); // T^2 + 33 T
        assert_eq!(v.degree_norm(), DegreeNorm { deg: Some(2), norm_val: Some(Ratio::from_integer(0)) });
        let w = ser(&k, 1, &[1, 0, 11]); // 11 T^3 + T
        assert_eq!(w.degree_norm(), DegreeNorm { deg: Some(3), norm_val: Some(Ratio::from_integer(0)) });
        let z = LaurentSeries::<PadicElement>::zero(&k, 0);
        assert_eq!(z.degree_norm(), DegreeNorm { deg: None, norm_val: None });
    }

    #[test]
    fn reduction_examples() {
        let k = k();
        let v = ser(&k, 0, &[3, 11, 1]);
        let r = v.reduce_mod_p().unwrap();
        assert_eq!(r.deg(), Some(2));
        assert!(r.coeff(1).unwrap().is_zero());
        let w = ser(&k, 1, &[1, 11]).reduce_mod_p().unwrap();
        assert_eq!(w.deg(), Some(1));
        let bad = LaurentSeries::new(&k, 1, vec![k.rational(1, 11)]);
        assert_eq!(bad.reduce_mod_p().unwrap_err(), SeriesError::NotIntegral);
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = ser(&k(), 0, &[1]);
        let b = ser(&PadicField::qp(7, 5).unwrap(), 0, &[1]);
        assert_eq!(a.add(&b).unwrap_err(), SeriesError::FieldMismatch);
    }

    #[test]
    fn window_products_track_exactness() {
        let k = k();
        let a: Vec<PadicElement> = (-10..=10).map(|i| k.int(i * i + 1)).collect();
        let b: Vec<PadicElement> = (-10..=10).map(|i| k.int(2 * i - 3)).collect();
        // a is a Laurent series (zero above), b a forward series (zero below).
        let wa = WindowSeries::new(&k, -10, a.clone(), Tail::Unknown, Tail::Zero);
        let wb = WindowSeries::new(&k, -10, b.clone(), Tail::Zero, Tail::Unknown);
        let prod = wa.mul(&wb).unwrap();
        // Without bounds on the unknown tails nothing is exact except where both tails vanish.
        assert!(prod.exact_range().is_none() || prod.exact_range().unwrap().0 >= 0);
        let wa = WindowSeries::new(&k, -10, a.clone(), Tail::Zero, Tail::Zero);
        let wb = WindowSeries::new(&k, -10, b.clone(), Tail::Zero, Tail::Zero);
        let prod = wa.mul(&wb).unwrap();
        assert_eq!(prod.exact_range(), Some((-20, 20)));
        let mut conv = k.zero();
        for i in -10..=10 {
            conv = &conv + &(&a[(i + 10) as usize] * &b[(-i + 10) as usize]);
        }
        assert_eq!(prod.coeff(0).unwrap(), &conv);
        // A bounded tail gives an explicit error bound instead of exactness.
        let wa = WindowSeries::new(&k, -10, a, Tail::Bounded { base: Ratio::from_integer(5), slope: Ratio::from_integer(1) }, Tail::Zero);
        let wb = WindowSeries::new(&k, -10, b, Tail::Zero, Tail::Zero);
        let prod = wa.mul(&wb).unwrap();
        assert_eq!(prod.error_at(0), Ok(None));
        assert_eq!(prod.error_at(-15), Ok(Some(Ratio::from_integer(5))));
    }

    fn arb_series(k: PadicField) -> impl Strategy<Value = LaurentSeries> {
        proptest::collection::vec(-300i64..300, 1..6).prop_map(move |c| {
            LaurentSeries::new(&k, -3, c.iter().map(|&x| k.int(x)).collect())
        })
    }

    proptest! {
        #[test]
        fn norm_is_submultiplicative(a in arb_series(k()), b in arb_series(k())) {
            let c = a.mul(&b).unwrap();
            if let (Some(na), Some(nb), Some(nc)) = (a.norm_val(), b.norm_val(), c.norm_val()) {
                prop_assert!(nc >= na + nb);
            }
        }

        #[test]
        fn degree_is_additive_for_unit_leads(a in arb_series(k()), b in arb_series(k())) {
            let c = a.mul(&b).unwrap();
            if let (Some(la), Some(lb)) = (a.leading_coeff(), b.leading_coeff()) {
                if !(&la * &lb).is_zero() {
                    prop_assert_eq!(c.deg(), Some(a.deg().unwrap() + b.deg().unwrap()));
                }
            }
        }

        #[test]
        fn reduction_is_a_ring_homomorphism(a in arb_series(k()), b in arb_series(k()), c in arb_series(k())) {
            let lhs = a.mul(&b).unwrap().add(&c).unwrap().reduce_mod_p().unwrap();
            let rhs = a.reduce_mod_p().unwrap().mul(&b.reduce_mod_p().unwrap()).unwrap()
                .add(&c.reduce_mod_p().unwrap()).unwrap();
            prop_assert!(lhs.eq_at_precision(&rhs));
        }
    }
}
