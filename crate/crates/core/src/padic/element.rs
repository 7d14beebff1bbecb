//! Floating-point style p-adic elements: exact valuation plus a unit known to a relative
//! precision, with three-valued zero status.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use smallvec::SmallVec;

use super::field::{split_p, Coords, PadicField};
use super::residue::{ResidueElement, ResidueField};
use super::PadicError;

/// Absolute precision marker for an exact zero.
const EXACT: i64 = i64::MAX;

#[derive(Clone, PartialEq, Eq)]
enum Kind {
    /// Zero modulo `π^abs` (`abs == EXACT` for an exact zero).
    Zero { abs: i64 },
    /// `π^val · unit` with the unit known modulo `π^rel`.
    Unit { val: i64, rel: i64, unit: Coords },
}

/// An element of a finite extension of `Q_p` at capped relative precision.
#[derive(Clone)]
pub struct PadicElement {
    field: PadicField,
    kind: Kind,
}

/// Zero status reported by comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroStatus {
    Nonzero,
    ZeroAtPrecision,
    ExactZero,
}

impl PadicElement {
    pub fn field(&self) -> &PadicField {
        &self.field
    }

    pub fn zero(field: &PadicField) -> Self {
        PadicElement { field: field.clone(), kind: Kind::Zero { abs: EXACT } }
    }

    /// Zero known only modulo `π^abs`.
    pub fn zero_mod(field: &PadicField, abs: i64) -> Self {
        PadicElement { field: field.clone(), kind: Kind::Zero { abs } }
    }

    pub fn one(field: &PadicField) -> Self {
        Self::from_unit_coords(field, 0, field.data().one_coords(), field.max_rel())
    }

    pub(crate) fn from_unit_coords(field: &PadicField, val: i64, unit: Coords, rel: i64) -> Self {
        PadicElement { field: field.clone(), kind: Kind::Unit { val, rel, unit } }
    }

    /// Builds an element from integral coordinates (possibly non-unit) known modulo `π^abs`.
    pub(crate) fn from_integral_coords(field: &PadicField, coords: Coords, abs: i64) -> Self {
        let d = field.data();
        let abs = abs.min(field.max_rel());
        let v = d.val_coords(&coords);
        if v >= abs {
            return Self::zero_mod(field, abs);
        }
        let unit = d.div_pi_pow(&coords, v);
        Self::from_unit_coords(field, v, unit, (abs - v).min(d.div_pi_precision(v)))
    }

    /// Element from raw integral coordinates over the basis `ζ^i π^j`, exact modulo `p^N`.
    pub fn from_coords(field: &PadicField, coords: &[i128]) -> Self {
        let d = field.data();
        let mut c: Coords = SmallVec::from_elem(0, d.len());
        for (slot, &x) in c.iter_mut().zip(coords) {
            *slot = d.modulus.from_i128(x);
        }
        Self::from_integral_coords(field, c, field.max_rel())
    }

    pub fn from_i64(field: &PadicField, x: i64) -> Self {
        Self::from_bigint(field, &BigInt::from(x))
    }

    pub fn from_bigint(field: &PadicField, x: &BigInt) -> Self {
        Self::from_rational(field, &BigRational::from_integer(x.clone()))
    }

    /// Embeds a rational number.
    pub fn from_rational(field: &PadicField, x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::zero(field);
        }
        let p = field.p();
        let (vn, un) = split_p(x.numer(), p);
        let (vd, ud) = split_p(x.denom(), p);
        let d = field.data();
        let u = d.unit_from_bigint(&un, &ud);
        let mut unit = d.zero_coords();
        unit[0] = u;
        let v = vn - vd;
        Self::scale_by_p_power(field, v, unit)
    }

    /// Returns `p^v · unit` where `unit` lies in the ring of integers with unit valuation.
    fn scale_by_p_power(field: &PadicField, v: i64, unit: Coords) -> Self {
        let d = field.data();
        let e = d.e as i64;
        // p^v = π^{ev} · (p/π^e)^v.
        let unit = if e == 1 || v == 0 {
            unit
        } else if v > 0 {
            let q = (v as usize).min(d.n as usize);
            d.mul(&unit, &d.w_pows[q])
        } else {
            let q = ((-v) as usize).min(d.n as usize);
            d.mul(&unit, &d.ue_pows[q])
        };
        Self::from_unit_coords(field, e * v, unit, field.max_rel())
    }

    /// The uniformizer `π` (equal to `p` when unramified).
    pub fn uniformizer(field: &PadicField) -> Self {
        if field.e() == 1 {
            return Self::from_i64(field, field.p() as i64);
        }
        Self::from_unit_coords(field, 1, field.data().one_coords(), field.max_rel())
    }

    /// The Teichmüller generator `ζ` of the unramified part.
    pub fn zeta_generator(field: &PadicField) -> Self {
        let d = field.data();
        let mut c = d.zero_coords();
        if d.f == 1 {
            // ζ is the Teichmüller lift of the residue generator; for f = 1 the basis is {1}.
            c[0] = 1;
        } else {
            c[1] = 1;
        }
        Self::from_unit_coords(field, 0, c, field.max_rel())
    }

    pub fn status(&self) -> ZeroStatus {
        match self.kind {
            Kind::Zero { abs } if abs == EXACT => ZeroStatus::ExactZero,
            Kind::Zero { .. } => ZeroStatus::ZeroAtPrecision,
            Kind::Unit { .. } => ZeroStatus::Nonzero,
        }
    }

    /// True for exact zeros and zeros at precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { abs: EXACT })
    }

    /// Valuation in units of `v(π)` (`None` for zero).
    pub fn val_units(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { val, .. } => Some(val),
            Kind::Zero { .. } => None,
        }
    }

    /// Normalized valuation with `v(p) = 1`.
    pub fn valuation(&self) -> Option<Ratio<i64>> {
        self.val_units().map(|v| Ratio::new(v, self.field.e() as i64))
    }

    /// Lower bound on the valuation in `π` units: the valuation itself for nonzero elements,
    /// the absolute precision for zeros.
    pub fn val_lower_bound(&self) -> i64 {
        match self.kind {
            Kind::Unit { val, .. } => val,
            Kind::Zero { abs } => abs,
        }
    }

    /// Absolute precision in `π` units.
    pub fn abs_precision(&self) -> i64 {
        match self.kind {
            Kind::Unit { val, rel, .. } => val.saturating_add(rel),
            Kind::Zero { abs } => abs,
        }
    }

    /// Relative precision in `π` units (`None` for zeros).
    pub fn rel_precision(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { rel, .. } => Some(rel),
            Kind::Zero { .. } => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.val_lower_bound() >= 0
    }

    /// Unit coordinates (`None` for zero).
    pub fn unit_coords(&self) -> Option<&[u128]> {
        match &self.kind {
            Kind::Unit { unit, .. } => Some(unit),
            Kind::Zero { .. } => None,
        }
    }

    /// Coordinates of an integral element in the basis `ζ^i π^j` modulo `p^N`.
    pub fn integral_coords(&self) -> Result<Coords, PadicError> {
        let d = self.field.data();
        match &self.kind {
            Kind::Zero { .. } => Ok(d.zero_coords()),
            Kind::Unit { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NotIntegral);
                }
                Ok(d.mul_pi_pow(unit, *val))
            }
        }
    }

    /// Residue class in the residue field (zero for non-units of positive valuation).
    pub fn residue(&self) -> Result<ResidueElement, PadicError> {
        let rf = self.field.residue_field();
        match &self.kind {
            Kind::Zero { abs } if *abs <= 0 => Err(PadicError::NotIntegral),
            Kind::Zero { .. } => Ok(rf.zero()),
            Kind::Unit { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NotIntegral);
                }
                if *val > 0 {
                    return Ok(rf.zero());
                }
                let p = self.field.p() as u128;
                let c: Vec<u64> = unit[..self.field.f()].iter().map(|&x| (x % p) as u64).collect();
                Ok(rf.from_coords(&c))
            }
        }
    }

    /// Teichmüller-style lift of a residue (the lift uses the coordinates as integers).
    pub fn lift_residue(field: &PadicField, r: &ResidueElement) -> Self {
        let coords: Vec<i128> = r.coords().iter().map(|&x| x as i128).collect();
        Self::from_coords(field, &coords)
    }

    fn check(&self, o: &Self) {
        assert!(self.field == o.field, "elements from different fields");
    }

    /// Multiplication by `π^k` for any integer `k`.
    pub fn shift(&self, k: i64) -> Self {
        match &self.kind {
            Kind::Zero { abs } => {
                let abs = if *abs == EXACT { EXACT } else { abs + k };
                PadicElement { field: self.field.clone(), kind: Kind::Zero { abs } }
            }
            Kind::Unit { val, rel, unit } => Self::from_unit_coords(&self.field, val + k, unit.clone(), *rel),
        }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        self.check(o);
        match (&self.kind, &o.kind) {
            (Kind::Zero { abs: a }, Kind::Zero { abs: b }) => {
                PadicElement { field: self.field.clone(), kind: Kind::Zero { abs: (*a).min(*b) } }
            }
            (Kind::Zero { abs }, Kind::Unit { val, .. }) => {
                if *abs == EXACT {
                    o.clone()
                } else if *abs <= *val {
                    Self::zero_mod(&self.field, *abs)
                } else {
                    o.cap_abs(*abs)
                }
            }
            (Kind::Unit { val, .. }, Kind::Zero { abs }) => {
                if *abs == EXACT {
                    self.clone()
                } else if *abs <= *val {
                    Self::zero_mod(&self.field, *abs)
                } else {
                    self.cap_abs(*abs)
                }
            }
            (Kind::Unit { val: v1, rel: r1, unit: u1 }, Kind::Unit { val: v2, rel: r2, unit: u2 }) => {
                let d = self.field.data();
                let v = (*v1).min(*v2);
                let abs = (v1 + r1).min(v2 + r2);
                let cap = abs - v;
                let x = if *v1 > v { d.mul_pi_pow(u1, (v1 - v).min(cap)) } else { u1.clone() };
                let y = if *v2 > v { d.mul_pi_pow(u2, (v2 - v).min(cap)) } else { u2.clone() };
                let s = d.add(&x, &y);
                let k = d.val_coords(&s);
                if k >= cap {
                    return Self::zero_mod(&self.field, abs);
                }
                let unit = if k == 0 { s } else { d.div_pi_pow(&s, k) };
                Self::from_unit_coords(&self.field, v + k, unit, (cap - k).min(d.div_pi_precision(k)))
            }
        }
    }

    /// Lowers the absolute precision to at most `abs`.
    fn cap_abs(&self, abs: i64) -> Self {
        match &self.kind {
            Kind::Unit { val, rel, unit } => {
                let r = (*rel).min(abs - val);
                Self::from_unit_coords(&self.field, *val, unit.clone(), r)
            }
            Kind::Zero { abs: a } => Self::zero_mod(&self.field, (*a).min(abs)),
        }
    }

    pub fn neg_ref(&self) -> Self {
        match &self.kind {
            Kind::Zero { .. } => self.clone(),
            Kind::Unit { val, rel, unit } => {
                Self::from_unit_coords(&self.field, *val, self.field.data().neg(unit), *rel)
            }
        }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        self.check(o);
        match (&self.kind, &o.kind) {
            (Kind::Zero { abs: a }, Kind::Zero { abs: b }) => {
                let abs = if *a == EXACT || *b == EXACT { EXACT } else { a.saturating_add(*b) };
                Self::zero_mod(&self.field, abs)
            }
            (Kind::Zero { abs }, Kind::Unit { val, .. }) | (Kind::Unit { val, .. }, Kind::Zero { abs }) => {
                let abs = if *abs == EXACT { EXACT } else { abs + val };
                Self::zero_mod(&self.field, abs)
            }
            (Kind::Unit { val: v1, rel: r1, unit: u1 }, Kind::Unit { val: v2, rel: r2, unit: u2 }) => {
                let unit = self.field.data().mul(u1, u2);
                Self::from_unit_coords(&self.field, v1 + v2, unit, (*r1).min(*r2))
            }
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.kind {
            Kind::Zero { .. } => Err(PadicError::DivisionByZero),
            Kind::Unit { val, rel, unit } => {
                let u = self.field.data().inv_unit(unit).ok_or(PadicError::DivisionByZero)?;
                Ok(Self::from_unit_coords(&self.field, -val, u, *rel))
            }
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self, PadicError> {
        Ok(self.mul_ref(&o.inv()?))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut r = Self::one(&self.field);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul_ref(&b);
            }
            b = b.mul_ref(&b);
            e >>= 1;
        }
        r
    }

    pub fn pow_i64(&self, e: i64) -> Result<Self, PadicError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow((-e) as u64))
        }
    }

    /// Multiplication by a rational number.
    pub fn scale_rational(&self, q: &BigRational) -> Self {
        self.mul_ref(&Self::from_rational(&self.field, q))
    }

    /// Equality up to the common precision of both operands.
    pub fn eq_at_precision(&self, o: &Self) -> bool {
        self.sub_ref(o).is_zero()
    }

    /// Embeds an element of the unramified subfield (same `p`, `f`, `N`) into this field.
    pub fn embed_into(&self, target: &PadicField) -> Result<Self, PadicError> {
        if &self.field == target {
            return Ok(self.clone());
        }
        let src = self.field.data();
        let dst = target.data();
        if src.e != 1 || src.p != dst.p || src.f != dst.f || src.n != dst.n || src.unram != dst.unram {
            return Err(PadicError::FieldMismatch);
        }
        let e = dst.e as i64;
        match &self.kind {
            Kind::Zero { abs } => {
                let abs = if *abs == EXACT { EXACT } else { abs * e };
                Ok(Self::zero_mod(target, abs))
            }
            Kind::Unit { val, rel, unit } => {
                let mut c = dst.zero_coords();
                c[..dst.f].copy_from_slice(&unit[..dst.f]);
                let x = Self::scale_by_p_power(target, *val, c);
                Ok(x.cap_abs(e * (val + rel)))
            }
        }
    }

    /// Forgets every digit beyond absolute precision `π^abs`.
    pub fn with_abs_precision(&self, abs: i64) -> Self {
        self.cap_abs(abs)
    }

    /// Maps an element of `Q_p` (`e = f = 1`) into any field with the same `p`, keeping its
    /// absolute precision.
    pub fn qp_into(&self, target: &PadicField) -> Result<Self, PadicError> {
        if &self.field == target {
            return Ok(self.clone());
        }
        let src = self.field.data();
        if src.e != 1 || src.f != 1 || src.p != target.p() {
            return Err(PadicError::FieldMismatch);
        }
        let e = target.e() as i64;
        match &self.kind {
            Kind::Zero { abs } => Ok(Self::zero_mod(target, if *abs == EXACT { EXACT } else { abs.saturating_mul(e) })),
            Kind::Unit { val, rel, unit } => {
                let p = BigInt::from(src.p);
                let u = BigInt::from(unit[0]);
                let x = if *val >= 0 {
                    BigRational::from_integer(u * num_traits::pow(p, *val as usize))
                } else {
                    BigRational::new(u, num_traits::pow(p, (-*val) as usize))
                };
                Ok(Self::from_rational(target, &x).cap_abs(e * (val + rel)))
            }
        }
    }

    /// Product with an element of `Q_p` (`e = f = 1`), scaling coordinates directly when the
    /// factor's `p`-power needs no change of uniformizer.
    pub fn mul_qp(&self, a: &PadicElement) -> Result<Self, PadicError> {
        if a.field == self.field {
            return Ok(self.mul_ref(a));
        }
        let src = a.field.data();
        if src.e != 1 || src.f != 1 || src.p != self.field.p() {
            return Err(PadicError::FieldMismatch);
        }
        let e = self.field.e() as i64;
        match (&self.kind, &a.kind) {
            (Kind::Unit { val, rel, unit }, Kind::Unit { val: va, rel: ra, unit: ua }) if e == 1 || *va == 0 => {
                let d = self.field.data();
                let scaled = d.scale(unit, ua[0] % d.modulus.value());
                Ok(Self::from_unit_coords(&self.field, val + e * va, scaled, (*rel).min(e * ra)))
            }
            _ => Ok(self.mul_ref(&a.qp_into(&self.field)?)),
        }
    }

    /// Signed integer representative of an element of `Z_p` given to precision `p^N`
    /// (only meaningful for `e = f = 1`).
    pub fn to_bigint_mod(&self) -> Option<BigInt> {
        let d = self.field.data();
        if d.e != 1 || d.f != 1 {
            return None;
        }
        let c = self.integral_coords().ok()?;
        Some(BigInt::from(d.modulus.to_signed(c[0])))
    }

    /// Rational reconstruction is not attempted; this renders a stable text form.
    pub fn render(&self) -> String {
        format!("{}", self)
    }
}

impl fmt::Display for PadicElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.field.e() as i64;
        let unif = if e == 1 { format!("{}", self.field.p()) } else { "pi".to_string() };
        match &self.kind {
            Kind::Zero { abs } if *abs == EXACT => write!(fm, "0"),
            Kind::Zero { abs } => write!(fm, "O({unif}^{abs})"),
            Kind::Unit { val, rel, unit } => {
                let d = self.field.data();
                let coords: Vec<String> = unit.iter().map(|&x| d.modulus.to_signed(x).to_string()).collect();
                if coords.len() == 1 {
                    write!(fm, "{}*{unif}^{} + O({unif}^{})", coords[0], val, val + rel)
                } else {
                    write!(fm, "[{}]*{unif}^{} + O({unif}^{})", coords.join(","), val, val + rel)
                }
            }
        }
    }
}

impl fmt::Debug for PadicElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", self)
    }
}

impl PartialEq for PadicElement {
    /// Equality at precision within the same field.
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.eq_at_precision(o)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&PadicElement> for &PadicElement {
            type Output = PadicElement;
            fn $m(self, o: &PadicElement) -> PadicElement {
                self.$f(o)
            }
        }
        impl $tr<PadicElement> for PadicElement {
            type Output = PadicElement;
            fn $m(self, o: PadicElement) -> PadicElement {
                self.$f(&o)
            }
        }
        impl $tr<&PadicElement> for PadicElement {
            type Output = PadicElement;
            fn $m(self, o: &PadicElement) -> PadicElement {
                self.$f(o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl Neg for &PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        self.neg_ref()
    }
}

impl Neg for PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        self.neg_ref()
    }
}

impl PadicField {
    /// The residue field `F_{p^f}` with the same generator as the unramified basis.
    pub fn residue_field(&self) -> ResidueField {
        let d = self.data();
        let p = d.p as u128;
        let g: Vec<u64> = d.unram.iter().map(|&x| (x % p) as u64).collect();
        ResidueField::new(d.p, g)
    }

    pub fn zero(&self) -> PadicElement {
        PadicElement::zero(self)
    }

    pub fn one(&self) -> PadicElement {
        PadicElement::one(self)
    }

    pub fn int(&self, x: i64) -> PadicElement {
        PadicElement::from_i64(self, x)
    }

    pub fn rational(&self, num: i64, den: i64) -> PadicElement {
        PadicElement::from_rational(self, &BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn uniformizer(&self) -> PadicElement {
        PadicElement::uniformizer(self)
    }
}

/// `|x|` as a real number, for reports (`0.0` for zeros).
pub fn abs_value(x: &PadicElement) -> f64 {
    match x.valuation() {
        None => 0.0,
        Some(v) => (x.field().p() as f64).powf(-(*v.numer() as f64) / (*v.denom() as f64)),
    }
}

