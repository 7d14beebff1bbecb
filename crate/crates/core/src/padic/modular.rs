//! Fixed-width modular arithmetic modulo `p^N` for moduli below `2^100`.
//!
//! Products are formed in 256 bits and reduced lazily, so long dot products
//! (polynomial and series multiplication) pay for a single reduction per
//! output coefficient.

/// Largest supported bit length of a modulus.
pub const MAX_MODULUS_BITS: u32 = 100;

/// Full 128x128 -> 256 bit product, returned as `(hi, lo)`.
#[inline]
pub fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let (mid, mid_carry) = p01.overflowing_add(p10);
    let (lo, lo_carry) = p00.overflowing_add(mid << 64);
    let hi = p11 + (mid >> 64) + ((mid_carry as u128) << 64) + lo_carry as u128;
    (hi, lo)
}

/// A 256-bit accumulator for sums of products.
#[derive(Clone, Copy, Debug, Default)]
pub struct Acc {
    hi: u128,
    lo: u128,
}

impl Acc {
    /// Adds `a * b` to the accumulator.
    #[inline]
    pub fn mac(&mut self, a: u128, b: u128) {
        let (h, l) = mul_wide(a, b);
        let (lo, c) = self.lo.overflowing_add(l);
        self.lo = lo;
        self.hi = self.hi.wrapping_add(h).wrapping_add(c as u128);
    }

    /// Adds a single value below the modulus.
    #[inline]
    pub fn add(&mut self, a: u128) {
        let (lo, c) = self.lo.overflowing_add(a);
        self.lo = lo;
        self.hi = self.hi.wrapping_add(c as u128);
    }
}

/// Arithmetic modulo a fixed `m` with `2 <= m < 2^100`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    m: u128,
    /// `2^128 mod m`.
    r: u128,
}

impl Modulus {
    /// Creates the modulus; panics when `m` is out of range, callers validate first.
    pub fn new(m: u128) -> Self {
        assert!(m >= 2 && m < (1u128 << MAX_MODULUS_BITS), "modulus out of range");
        let r = (u128::MAX % m + 1) % m;
        Modulus { m, r }
    }

    #[inline]
    pub fn value(&self) -> u128 {
        self.m
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    /// Reduces a 256-bit value.
    #[inline]
    pub fn reduce_wide(&self, mut hi: u128, mut lo: u128) -> u128 {
        while hi != 0 {
            let (h, l) = mul_wide(hi, self.r);
            let (nl, c) = l.overflowing_add(lo);
            lo = nl;
            hi = h + c as u128;
        }
        lo % self.m
    }

    #[inline]
    pub fn reduce_acc(&self, acc: Acc) -> u128 {
        self.reduce_wide(acc.hi, acc.lo)
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        if (a | b) >> 64 == 0 {
            (a * b) % self.m
        } else {
            let (h, l) = mul_wide(a, b);
            self.reduce_wide(h, l)
        }
    }

    pub fn pow(&self, mut a: u128, mut e: u128) -> u128 {
        let mut r = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Inverse of a unit via the extended Euclidean algorithm; `None` for non-units.
    pub fn inv(&self, a: u128) -> Option<u128> {
        let (mut r0, mut r1) = (self.m as i128, (a % self.m) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(t0.rem_euclid(self.m as i128) as u128)
    }

    /// Reduces a signed integer.
    pub fn from_i128(&self, a: i128) -> u128 {
        a.rem_euclid(self.m as i128) as u128
    }

    /// Symmetric lift into `(-m/2, m/2]`.
    pub fn to_signed(&self, a: u128) -> i128 {
        if a > self.m / 2 {
            a as i128 - self.m as i128
        } else {
            a as i128
        }
    }

    /// Product of two truncated power series, keeping `len` terms.
    pub fn series_mul(&self, a: &[u128], b: &[u128], len: usize) -> Vec<u128> {
        let mut out = vec![0u128; len];
        let small = self.m < (1u128 << 32);
        for (k, slot) in out.iter_mut().enumerate() {
            let lo = k.saturating_sub(b.len().saturating_sub(1));
            let hi = k.min(a.len().saturating_sub(1));
            if a.is_empty() || b.is_empty() || lo > hi {
                continue;
            }
            if small {
                let mut s: u128 = 0;
                for i in lo..=hi {
                    s += a[i] * b[k - i];
                }
                *slot = s % self.m;
            } else {
                let mut acc = Acc::default();
                for i in lo..=hi {
                    acc.mac(a[i], b[k - i]);
                }
                *slot = self.reduce_acc(acc);
            }
        }
        out
    }

    /// Inverse of a power series with unit constant term, to `len` terms (Newton iteration).
    pub fn series_inv(&self, a: &[u128], len: usize) -> Option<Vec<u128>> {
        let c0 = self.inv(*a.first()?)?;
        let mut x = vec![c0];
        let mut cur = 1;
        while cur < len {
            let next = (2 * cur).min(len);
            let ax = self.series_mul(&a[..a.len().min(next)], &x, next);
            let mut two_minus: Vec<u128> = ax.iter().map(|&v| self.neg(v)).collect();
            two_minus[0] = self.add(two_minus[0], 2 % self.m);
            x = self.series_mul(&x, &two_minus, next);
            cur = next;
        }
        x.truncate(len);
        Some(x)
    }

    /// Exact division of every entry by `p^k`, valid when all entries are divisible.
    pub fn div_exact(a: u128, pk: u128) -> u128 {
        a / pk
    }
}

/// p-adic valuation of a residue modulo `p^n`; returns `n` for zero.
#[inline]
pub fn val_p(mut a: u128, p: u128, n: u32) -> u32 {
    if a == 0 {
        return n;
    }
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v.min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wide_product_matches_bigint() {
        let a = (1u128 << 127) + 12345;
        let b = u128::MAX - 777;
        let (hi, lo) = mul_wide(a, b);
        let whole = (num_bigint::BigUint::from(hi) << 128u32) + num_bigint::BigUint::from(lo);
        assert_eq!(whole, num_bigint::BigUint::from(a) * num_bigint::BigUint::from(b));
    }

    #[test]
    fn inverse_and_power() {
        let m = Modulus::new(11u128.pow(24));
        let x = 28u128;
        let y = m.inv(x).unwrap();
        assert_eq!(m.mul(x, y), 1);
        assert!(m.inv(22).is_none());
        assert_eq!(m.pow(3, 5), 243);
    }

    #[test]
    fn series_inverse_of_one_minus_t() {
        let m = Modulus::new(13u128.pow(10));
        let inv = m.series_inv(&[1, m.neg(1)], 8).unwrap();
        assert_eq!(inv, vec![1; 8]);
    }

    proptest! {
        #[test]
        fn mul_agrees_with_bigint(a in 0u128..(1u128 << 99), b in 0u128..(1u128 << 99)) {
            let m = Modulus::new(17u128.pow(24));
            let (a, b) = (a % m.value(), b % m.value());
            let expect = (num_bigint::BigUint::from(a) * num_bigint::BigUint::from(b))
                % num_bigint::BigUint::from(m.value());
            prop_assert_eq!(num_bigint::BigUint::from(m.mul(a, b)), expect);
        }
    }
}
