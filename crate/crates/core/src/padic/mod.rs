//! Exact arithmetic in finite extensions of `Q_p` at capped precision, with Hensel lifting,
//! Newton polygons and slope factorisation.

mod element;
mod field;
pub mod modular;
mod poly;
mod residue;

use num_rational::Ratio;
use thiserror::Error;

pub use element::{abs_value, PadicElement, ZeroStatus};
pub use field::{is_prime, Coords, PadicField};
pub use poly::{
    hensel_lift, newton_polygon, poly_derivative, poly_divrem, poly_eval, poly_mul, slope_factor,
    teichmuller_lift, teichmuller_root, valuations,
};
pub use residue::{fp_poly, ResidueElement, ResidueField};


/// Errors raised by p-adic arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision {p}^{n} is outside the supported range (below 2^99)")]
    PrecisionOutOfRange { p: u64, n: u32 },
    #[error("polynomial is not Eisenstein: {0}")]
    NonEisenstein(String),
    #[error("no primitive {d}-th root of unity: {d} does not divide {q} - 1")]
    NoRoot { d: u64, q: u128 },
    #[error("Newton iteration does not contract: |f(a)| must be below |f'(a)|^2")]
    NotContracting,
    #[error("all coefficients are zero at precision")]
    Empty,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero (or by zero at precision)")]
    DivisionByZero,
    #[error("element is not integral")]
    NotIntegral,
    #[error("slope factorisation did not converge: {0}")]
    FactorisationFailed(String),
}

/// Coefficient rings shared by series and Grassmannian code: p-adic fields and their
/// residue fields.
pub trait Scalar: Clone + std::fmt::Debug + Send + Sync {
    type Field: Clone + std::fmt::Debug + PartialEq + Send + Sync;

    fn field_of(&self) -> Self::Field;
    fn zero_in(field: &Self::Field) -> Self;
    fn one_in(field: &Self::Field) -> Self;
    /// True for exact zeros and zeros at precision.
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Normalized valuation (`None` for zero); residue-field elements have valuation 0.
    fn valuation(&self) -> Option<Ratio<i64>>;
    /// True when the element is nonzero but so few digits survive that it cannot serve as
    /// an elimination pivot.
    fn is_unreliable_pivot(&self) -> bool {
        false
    }
}

impl Scalar for PadicElement {
    type Field = PadicField;

    fn field_of(&self) -> PadicField {
        self.field().clone()
    }
    fn zero_in(field: &PadicField) -> Self {
        PadicElement::zero(field)
    }
    fn one_in(field: &PadicField) -> Self {
        PadicElement::one(field)
    }
    fn is_zero(&self) -> bool {
        PadicElement::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg(&self) -> Self {
        self.neg_ref()
    }
    fn inv(&self) -> Option<Self> {
        PadicElement::inv(self).ok()
    }
    fn valuation(&self) -> Option<Ratio<i64>> {
        PadicElement::valuation(self)
    }
    fn is_unreliable_pivot(&self) -> bool {
        match self.rel_precision() {
            Some(r) => r < (self.field().max_rel() / 4).max(1),
            None => false,
        }
    }
}

impl Scalar for ResidueElement {
    type Field = ResidueField;

    fn field_of(&self) -> ResidueField {
        self.field().clone()
    }
    fn zero_in(field: &ResidueField) -> Self {
        field.zero()
    }
    fn one_in(field: &ResidueField) -> Self {
        field.one()
    }
    fn is_zero(&self) -> bool {
        ResidueElement::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        ResidueElement::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ResidueElement::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ResidueElement::mul(self, o)
    }
    fn neg(&self) -> Self {
        ResidueElement::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        ResidueElement::inv(self)
    }
    fn valuation(&self) -> Option<Ratio<i64>> {
        if self.is_zero() {
            None
        } else {
            Some(Ratio::from_integer(0))
        }
    }
}

/// Creates a field; see [`PadicField::new`].
pub fn make_field(
    p: u64,
    f: usize,
    eis: Option<&[Vec<num_bigint::BigInt>]>,
    n: u32,
) -> Result<PadicField, PadicError> {
    PadicField::new(p, f, eis, n)
}

#[cfg(test)]
mod tests;
