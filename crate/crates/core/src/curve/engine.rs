//! Truncated power series with coefficients in `Z/mZ`, used for the integral local
//! expansions of superelliptic curves.

use crate::padic::modular::Modulus;

/// Arithmetic on power series `Σ a_k τ^k` truncated to a fixed number of terms.
#[derive(Clone, Debug)]
pub struct SeriesRing {
    m: Modulus,
}

impl SeriesRing {
    pub fn new(m: u128) -> Self {
        SeriesRing { m: Modulus::new(m) }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.m
    }

    pub fn value(&self) -> u128 {
        self.m.value()
    }

    pub fn from_i128(&self, a: i128) -> u128 {
        self.m.from_i128(a)
    }

    pub fn one(&self, len: usize) -> Vec<u128> {
        let mut v = vec![0; len.max(1)];
        v[0] = 1 % self.m.value();
        v.truncate(len);
        v
    }

    pub fn mul(&self, a: &[u128], b: &[u128], len: usize) -> Vec<u128> {
        self.m.series_mul(&a[..a.len().min(len)], &b[..b.len().min(len)], len)
    }

    pub fn inv(&self, a: &[u128], len: usize) -> Option<Vec<u128>> {
        self.m.series_inv(&a[..a.len().min(len)], len)
    }

    pub fn add(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| self.m.add(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0)))
            .collect()
    }

    pub fn sub(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| self.m.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0)))
            .collect()
    }

    pub fn scale(&self, a: &[u128], c: u128) -> Vec<u128> {
        a.iter().map(|&x| self.m.mul(x, c)).collect()
    }

    /// Multiplies by `τ^k`, keeping `len` terms.
    pub fn shift(&self, a: &[u128], k: usize, len: usize) -> Vec<u128> {
        let mut out = vec![0; len];
        for (i, &x) in a.iter().enumerate() {
            if i + k < len {
                out[i + k] = x;
            }
        }
        out
    }

    /// Formal derivative `d/dτ`.
    pub fn derivative(&self, a: &[u128]) -> Vec<u128> {
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &x)| self.m.mul(x, k as u128 % self.m.value()))
            .collect()
    }

    /// `a^e` for a series with unit constant term; negative exponents go through the inverse.
    pub fn pow(&self, a: &[u128], e: i64, len: usize) -> Option<Vec<u128>> {
        let base = if e < 0 { self.inv(a, len)? } else { a[..a.len().min(len)].to_vec() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one(len);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq, len);
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul(&sq, &sq, len);
            }
        }
        Some(acc)
    }

    /// `P(v)` for an integer polynomial `P` (coefficients from the constant term).
    pub fn compose(&self, poly: &[i128], v: &[u128], len: usize) -> Vec<u128> {
        let mut acc = vec![0u128; len];
        for &c in poly.iter().rev() {
            acc = self.mul(&acc, v, len);
            if len > 0 {
                acc[0] = self.m.add(acc[0], self.m.from_i128(c));
            }
        }
        acc
    }
}

/// Integer polynomial product (coefficients from the constant term).
pub fn poly_mul_int(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Integer polynomial power.
pub fn poly_pow_int(a: &[i128], e: u32) -> Vec<i128> {
    let mut acc = vec![1i128];
    for _ in 0..e {
        acc = poly_mul_int(&acc, a);
    }
    acc
}

/// Formal derivative of an integer polynomial.
pub fn poly_derivative_int(a: &[i128]) -> Vec<i128> {
    a.iter().enumerate().skip(1).map(|(k, &x)| x * k as i128).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_and_inverse_agree() {
        let r = SeriesRing::new(11u128.pow(20));
        let a = vec![1, 3, 5, 7];
        let inv = r.pow(&a, -3, 12).unwrap();
        let cube = r.pow(&a, 3, 12).unwrap();
        assert_eq!(r.mul(&inv, &cube, 12), r.one(12));
    }

    #[test]
    fn compose_matches_direct_expansion() {
        let r = SeriesRing::new(1_000_003);
        // (1 + v)^2 with v = τ: 1 + 2τ + τ².
        let v = vec![0, 1];
        assert_eq!(r.compose(&[1, 2, 1], &v, 4), vec![1, 2, 1, 0]);
        assert_eq!(poly_pow_int(&[1, 1], 2), vec![1, 2, 1]);
        assert_eq!(poly_derivative_int(&[1, 2, 1]), vec![2, 2]);
    }
}
