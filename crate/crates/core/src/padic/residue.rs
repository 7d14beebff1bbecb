//! The residue field `F_q = F_p[X]/(g)` of a p-adic field.

use std::fmt;
use std::sync::Arc;

/// Dense polynomial helpers over `F_p` (coefficients from the constant term).
pub mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect()
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
            }
        }
        out
    }

    pub fn inv_scalar(a: u64, p: u64) -> u64 {
        let mut r = 1u128;
        let mut b = a as u128 % p as u128;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u128;
            }
            b = b * b % p as u128;
            e >>= 1;
        }
        r as u64
    }

    /// Quotient and remainder by a nonzero polynomial.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = inv_scalar(*b.last().expect("nonzero divisor"), p);
        let mut q = vec![0u64; r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let c = (*r.last().unwrap() as u128 * lead_inv as u128 % p as u128) as u64;
            q[shift] = c;
            for (i, &bi) in b.iter().enumerate() {
                let t = (c as u128 * bi as u128 % p as u128) as u64;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
            r = trim(r);
        }
        (q, r)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divrem(a, b, p).1
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(&l) = x.last() {
            let li = inv_scalar(l, p);
            x = x.iter().map(|&c| (c as u128 * li as u128 % p as u128) as u64).collect();
        }
        x
    }

    /// `a^e mod g`.
    pub fn powmod(a: &[u64], mut e: u128, g: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let mut b = rem(a, g, p);
        while e > 0 {
            if e & 1 == 1 {
                r = rem(&mul(&r, &b, p), g, p);
            }
            b = rem(&mul(&b, &b, p), g, p);
            e >>= 1;
        }
        r
    }

    /// Inverse of `a` modulo `g`, padded to `deg g` coefficients.
    pub fn inv_mod(a: &[u64], g: &[u64], p: u64) -> Option<Vec<u64>> {
        let n = g.len() - 1;
        let (mut r0, mut r1) = (trim(g.to_vec()), trim(rem(a, g, p)));
        let (mut t0, mut t1) = (Vec::<u64>::new(), vec![1u64]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let t2 = trim(sub(&t0, &mul(&q, &t1, p), p));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t2;
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv_scalar(r0[0], p);
        let mut out: Vec<u64> = t0.iter().map(|&x| (x as u128 * c as u128 % p as u128) as u64).collect();
        out.resize(n, 0);
        Some(out)
    }
}

/// Handle to a finite field `F_{p^f}`.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueField(Arc<ResidueData>);

#[derive(PartialEq, Eq)]
struct ResidueData {
    p: u64,
    f: usize,
    /// Monic modulus of degree `f`.
    g: Vec<u64>,
}

impl fmt::Debug for ResidueField {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "F_{}^{}", self.0.p, self.0.f)
    }
}

impl ResidueField {
    pub fn new(p: u64, g: Vec<u64>) -> Self {
        let f = g.len() - 1;
        ResidueField(Arc::new(ResidueData { p, f, g }))
    }

    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn f(&self) -> usize {
        self.0.f
    }

    pub fn order(&self) -> u128 {
        (self.0.p as u128).pow(self.0.f as u32)
    }

    pub fn zero(&self) -> ResidueElement {
        ResidueElement { field: self.clone(), c: vec![0; self.0.f] }
    }

    pub fn one(&self) -> ResidueElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, a: u64) -> ResidueElement {
        let mut c = vec![0; self.0.f];
        c[0] = a % self.0.p;
        ResidueElement { field: self.clone(), c }
    }

    pub fn from_i64(&self, a: i64) -> ResidueElement {
        self.from_u64(a.rem_euclid(self.0.p as i64) as u64)
    }

    /// Element with the given coordinates over the basis `1, X, …, X^{f-1}`.
    pub fn from_coords(&self, coords: &[u64]) -> ResidueElement {
        let mut c: Vec<u64> = coords.iter().map(|&x| x % self.0.p).collect();
        c.resize(self.0.f, 0);
        ResidueElement { field: self.clone(), c }
    }

    /// All elements in lexicographic coordinate order (constant coordinate fastest).
    pub fn elements(&self) -> impl Iterator<Item = ResidueElement> + '_ {
        let q = self.order();
        (0..q).map(move |mut idx| {
            let mut c = Vec::with_capacity(self.0.f);
            for _ in 0..self.0.f {
                c.push((idx % self.0.p as u128) as u64);
                idx /= self.0.p as u128;
            }
            ResidueElement { field: self.clone(), c }
        })
    }
}

/// Element of a residue field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    field: ResidueField,
    c: Vec<u64>,
}

impl std::hash::Hash for ResidueField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.g.hash(state);
    }
}

impl fmt::Debug for ResidueElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", self)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.0.f == 1 {
            write!(fm, "{}", self.c[0])
        } else {
            write!(fm, "{:?}", self.c)
        }
    }
}

impl ResidueElement {
    pub fn field(&self) -> &ResidueField {
        &self.field
    }

    pub fn coords(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.field.0.p;
        let c = self.c.iter().zip(&o.c).map(|(&a, &b)| (a + b) % p).collect();
        ResidueElement { field: self.field.clone(), c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.field.0.p;
        let c = self.c.iter().zip(&o.c).map(|(&a, &b)| (a + p - b) % p).collect();
        ResidueElement { field: self.field.clone(), c }
    }

    pub fn neg(&self) -> Self {
        self.field.zero().sub(self)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = &self.field.0;
        let prod = fp_poly::mul(&self.c, &o.c, d.p);
        let mut c = fp_poly::rem(&prod, &d.g, d.p);
        c.resize(d.f, 0);
        ResidueElement { field: self.field.clone(), c }
    }

    pub fn inv(&self) -> Option<Self> {
        let d = &self.field.0;
        let c = fp_poly::inv_mod(&self.c, &d.g, d.p)?;
        Some(ResidueElement { field: self.field.clone(), c })
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut r = self.field.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    /// Absolute Frobenius `x ↦ x^p`.
    pub fn frobenius(&self) -> Self {
        self.pow(self.field.0.p as u128)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self) -> Option<u128> {
        if self.is_zero() {
            return None;
        }
        let q1 = self.field.order() - 1;
        let mut ord = q1;
        let mut n = q1;
        let mut r = 2u128;
        while n > 1 {
            if n % r == 0 {
                while n % r == 0 {
                    n /= r;
                }
                while ord % r == 0 && self.pow(ord / r) == self.field.one() {
                    ord /= r;
                }
            }
            r += 1;
        }
        Some(ord)
    }
}
