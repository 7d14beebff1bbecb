//! Construction of `K = Q_p(ζ)(π)` and arithmetic on unit coordinates.
//!
//! Elements of the ring of integers are stored as `e·f` residues modulo `p^N`
//! in the basis `ζ^i π^j`, flattened as `j·f + i`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use smallvec::SmallVec;

use super::modular::{val_p, Acc, Modulus, MAX_MODULUS_BITS};
use super::PadicError;

/// Unit coordinates of an element of the ring of integers.
pub type Coords = SmallVec<[u128; 2]>;

/// Shared handle to a finite extension of `Q_p`.
#[derive(Clone)]
pub struct PadicField(pub(crate) Arc<FieldData>);

pub(crate) struct FieldData {
    pub p: u64,
    pub f: usize,
    pub e: usize,
    pub n: u32,
    pub modulus: Modulus,
    /// `p^0, …, p^N`.
    pub ppow: Vec<u128>,
    /// Monic minimal polynomial of `ζ`, `f + 1` coefficients.
    pub unram: Vec<u128>,
    /// Eisenstein polynomial, `e + 1` coefficients in the unramified ring.
    pub eis: Vec<Coords>,
    /// Indices `i < e` with a nonzero Eisenstein coefficient.
    pub eis_support: Vec<usize>,
    /// Whether every Eisenstein coefficient lies in `Z/p^N`.
    pub eis_scalar: bool,
    /// Powers `(π^e/p)^q` for `0 <= q <= N`.
    pub ue_pows: Vec<Coords>,
    /// Powers `(p/π^e)^q` for `0 <= q <= N`.
    pub w_pows: Vec<Coords>,
}

impl PartialEq for PadicField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.f == other.0.f
                && self.0.e == other.0.e
                && self.0.n == other.0.n
                && self.0.unram == other.0.unram
                && self.0.eis == other.0.eis)
    }
}

impl Eq for PadicField {}

impl fmt::Debug for PadicField {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "PadicField(p={}, f={}, e={}, N={})", self.0.p, self.0.f, self.0.e, self.0.n)
    }
}

/// Deterministic primality test for the word-sized primes used here.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn big_mod(x: &BigInt, m: u128) -> u128 {
    let mb = BigInt::from(m);
    x.mod_floor(&mb).to_u128().expect("residue fits")
}

impl PadicField {
    /// Builds `Q_p` extended by an unramified degree `f` and then by the Eisenstein polynomial
    /// `eis` (coefficients listed from the constant term, each given by its coordinates over
    /// the unramified basis `1, ζ, …, ζ^{f-1}`; the leading coefficient must be 1).
    pub fn new(p: u64, f: usize, eis: Option<&[Vec<BigInt>]>, n: u32) -> Result<Self, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if n == 0 || f == 0 {
            return Err(PadicError::PrecisionOutOfRange { p, n });
        }
        let bits = (n as f64) * (p as f64).log2();
        if bits >= MAX_MODULUS_BITS as f64 - 1.0 {
            return Err(PadicError::PrecisionOutOfRange { p, n });
        }
        let m = (p as u128).pow(n);
        let modulus = Modulus::new(m);
        let ppow: Vec<u128> = (0..=n).map(|k| (p as u128).pow(k)).collect();
        let unram = teichmuller_modulus(p, f, &modulus);
        let (eis_c, e) = match eis {
            None => {
                let mut c0: Coords = SmallVec::from_elem(0, f);
                c0[0] = modulus.neg(p as u128);
                let mut one: Coords = SmallVec::from_elem(0, f);
                one[0] = 1;
                (vec![c0, one], 1)
            }
            Some(cs) => {
                if cs.len() < 2 {
                    return Err(PadicError::NonEisenstein("degree must be at least 1".into()));
                }
                let e = cs.len() - 1;
                let conv: Vec<Coords> = cs
                    .iter()
                    .map(|c| {
                        let mut v: Coords = SmallVec::from_elem(0, f);
                        for (i, x) in c.iter().enumerate().take(f) {
                            v[i] = big_mod(x, m);
                        }
                        v
                    })
                    .collect();
                if cs.iter().any(|c| c.len() > f) {
                    return Err(PadicError::NonEisenstein("coefficient has too many coordinates".into()));
                }
                let lead = &conv[e];
                if lead[0] != 1 || lead.iter().skip(1).any(|&x| x != 0) {
                    return Err(PadicError::NonEisenstein("leading coefficient is not 1".into()));
                }
                let vmin = |c: &Coords| c.iter().map(|&x| val_p(x, p as u128, n)).min().unwrap_or(n);
                if vmin(&conv[0]) != 1 {
                    return Err(PadicError::NonEisenstein(
                        "constant term must have valuation exactly 1".into(),
                    ));
                }
                if let Some(i) = (1..e).find(|&i| vmin(&conv[i]) == 0) {
                    return Err(PadicError::NonEisenstein(format!("coefficient of X^{i} is a unit")));
                }
                (conv, e)
            }
        };
        let eis_support: Vec<usize> = (0..e).filter(|&i| eis_c[i].iter().any(|&x| x != 0)).collect();
        let eis_scalar = eis_c.iter().all(|c| c.iter().skip(1).all(|&x| x == 0));
        let mut data = FieldData {
            p,
            f,
            e,
            n,
            modulus,
            ppow,
            unram,
            eis: eis_c,
            eis_support,
            eis_scalar,
            ue_pows: Vec::new(),
            w_pows: Vec::new(),
        };
        // π^e / p = -Σ (E_i / p) π^i, a unit.
        let mut ue: Coords = SmallVec::from_elem(0, e * f);
        for i in 0..e {
            for k in 0..f {
                let c = data.modulus.to_signed(data.eis[i][k]);
                ue[i * f + k] = data.modulus.from_i128(-(c / p as i128));
            }
        }
        let w = data.inv_unit(&ue).expect("Eisenstein quotient is a unit");
        let mut ue_pows = vec![data.one_coords()];
        let mut w_pows = vec![data.one_coords()];
        for q in 1..=n as usize {
            ue_pows.push(data.mul(&ue_pows[q - 1], &ue));
            w_pows.push(data.mul(&w_pows[q - 1], &w));
        }
        data.ue_pows = ue_pows;
        data.w_pows = w_pows;
        Ok(PadicField(Arc::new(data)))
    }

    /// Convenience constructor with small integer Eisenstein coefficients over `Z_p`.
    pub fn with_int_eisenstein(p: u64, f: usize, eis: Option<&[i64]>, n: u32) -> Result<Self, PadicError> {
        let conv: Option<Vec<Vec<BigInt>>> = eis.map(|c| c.iter().map(|&x| vec![BigInt::from(x)]).collect());
        Self::new(p, f, conv.as_deref(), n)
    }

    /// `Q_p` at precision `p^N`.
    pub fn qp(p: u64, n: u32) -> Result<Self, PadicError> {
        Self::new(p, 1, None, n)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Unramified degree.
    pub fn f(&self) -> usize {
        self.0.f
    }

    /// Ramification index.
    pub fn e(&self) -> usize {
        self.0.e
    }

    /// Absolute precision exponent.
    pub fn precision(&self) -> u32 {
        self.0.n
    }

    /// Largest relative precision in units of `π`.
    pub fn max_rel(&self) -> i64 {
        (self.0.e as i64) * (self.0.n as i64)
    }

    /// Degree over `Q_p`.
    pub fn degree(&self) -> usize {
        self.0.e * self.0.f
    }

    pub(crate) fn data(&self) -> &FieldData {
        &self.0
    }

    /// Eisenstein polynomial coefficients as signed coordinate lists (for reports).
    pub fn eisenstein_coefficients(&self) -> Vec<Vec<i128>> {
        self.0
            .eis
            .iter()
            .map(|c| c.iter().map(|&x| self.0.modulus.to_signed(x)).collect())
            .collect()
    }

    /// Minimal polynomial of the Teichmüller generator `ζ` of the unramified part.
    pub fn unramified_modulus(&self) -> Vec<i128> {
        self.0.unram.iter().map(|&x| self.0.modulus.to_signed(x)).collect()
    }

    /// The unramified subfield with the same precision.
    pub fn unramified_subfield(&self) -> PadicField {
        if self.0.e == 1 {
            return self.clone();
        }
        PadicField::new(self.0.p, self.0.f, None, self.0.n).expect("subfield parameters already validated")
    }
}

/// Finds a monic lift of an irreducible degree-`f` polynomial mod p and replaces it by the
/// minimal polynomial of the Teichmüller lift of its root, so that the basis `ζ^i` is built
/// from roots of unity.
fn teichmuller_modulus(p: u64, f: usize, m: &Modulus) -> Vec<u128> {
    if f == 1 {
        return vec![m.neg(0), 1];
    }
    let g = first_irreducible(p, f);
    let lift: Vec<u128> = g.iter().map(|&c| c as u128).collect();
    // Work in (Z/p^N)[X]/(lift): compute ζ = lim X^{q^k}.
    let q = (p as u128).pow(f as u32);
    let mulr = |a: &[u128], b: &[u128]| -> Vec<u128> { poly_mulmod(a, b, &lift, m) };
    let mut zeta = vec![0u128; f];
    zeta[1] = 1;
    let n = (m.value() as f64).log(p as f64).round() as u32;
    for _ in 0..=n {
        let mut r = vec![0u128; f];
        r[0] = 1;
        let mut base = zeta.clone();
        let mut ex = q;
        while ex > 0 {
            if ex & 1 == 1 {
                r = mulr(&r, &base);
            }
            base = mulr(&base, &base);
            ex >>= 1;
        }
        zeta = r;
    }
    // Powers ζ^0..ζ^f as rows, then solve ζ^f = Σ c_j ζ^j.
    let mut pows = vec![{
        let mut one = vec![0u128; f];
        one[0] = 1;
        one
    }];
    for j in 1..=f {
        let next = mulr(&pows[j - 1], &zeta);
        pows.push(next);
    }
    // Matrix columns ζ^j (j < f); system Σ c_j ζ^j = ζ^f.
    let mut mat: Vec<Vec<u128>> = (0..f)
        .map(|row| {
            let mut r: Vec<u128> = (0..f).map(|j| pows[j][row]).collect();
            r.push(pows[f][row]);
            r
        })
        .collect();
    let sol = solve_mod(&mut mat, f, m).expect("Teichmüller powers form a basis");
    let mut minpoly: Vec<u128> = sol.iter().map(|&c| m.neg(c)).collect();
    minpoly.push(1);
    minpoly
}

/// Multiplication in `(Z/m)[X]/(g)` with `g` monic.
fn poly_mulmod(a: &[u128], b: &[u128], g: &[u128], m: &Modulus) -> Vec<u128> {
    let f = g.len() - 1;
    let mut prod = vec![0u128; 2 * f - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = m.add(prod[i + j], m.mul(x, y));
        }
    }
    for k in (f..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..f {
            prod[k - f + i] = m.sub(prod[k - f + i], m.mul(c, g[i]));
        }
    }
    prod.truncate(f);
    prod
}

/// Solves an `n × (n+1)` augmented system modulo `p^N` with unit pivots.
fn solve_mod(mat: &mut [Vec<u128>], n: usize, m: &Modulus) -> Option<Vec<u128>> {
    for col in 0..n {
        let piv = (col..n).find(|&r| m.inv(mat[r][col]).is_some())?;
        mat.swap(col, piv);
        let inv = m.inv(mat[col][col])?;
        for x in mat[col].iter_mut() {
            *x = m.mul(*x, inv);
        }
        for r in 0..n {
            if r != col && mat[r][col] != 0 {
                let c = mat[r][col];
                for k in 0..=n {
                    let t = m.mul(c, mat[col][k]);
                    mat[r][k] = m.sub(mat[r][k], t);
                }
            }
        }
    }
    Some(mat.iter().map(|r| r[n]).collect())
}

/// Lexicographically first monic irreducible polynomial of degree `f` over `F_p`.
pub(crate) fn first_irreducible(p: u64, f: usize) -> Vec<u64> {
    let total = (p as u128).pow(f as u32);
    for idx in 0..total {
        let mut g = Vec::with_capacity(f + 1);
        let mut t = idx;
        for _ in 0..f {
            g.push((t % p as u128) as u64);
            t /= p as u128;
        }
        g.push(1);
        if g[0] != 0 && is_irreducible_mod_p(&g, p) {
            return g;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn is_irreducible_mod_p(g: &[u64], p: u64) -> bool {
    use super::residue::fp_poly;
    let f = g.len() - 1;
    let x = vec![0, 1];
    // Rabin: X^{p^f} ≡ X and gcd(X^{p^{f/r}} - X, g) = 1 for primes r | f.
    let frob = |k: usize| -> Vec<u64> {
        let mut a = x.clone();
        for _ in 0..k {
            a = fp_poly::powmod(&a, p as u128, g, p);
        }
        a
    };
    let full = frob(f);
    if fp_poly::trim(fp_poly::sub(&full, &x, p)) != Vec::<u64>::new() {
        return false;
    }
    let mut r = 2;
    let mut rest = f;
    while rest > 1 {
        if rest % r == 0 {
            while rest % r == 0 {
                rest /= r;
            }
            let h = fp_poly::sub(&frob(f / r), &x, p);
            let gg = fp_poly::gcd(&fp_poly::trim(h), &g.to_vec(), p);
            if gg.len() > 1 {
                return false;
            }
        }
        r += 1;
    }
    true
}

impl FieldData {
    pub fn len(&self) -> usize {
        self.e * self.f
    }

    pub fn zero_coords(&self) -> Coords {
        SmallVec::from_elem(0, self.len())
    }

    pub fn one_coords(&self) -> Coords {
        let mut c = self.zero_coords();
        c[0] = 1;
        c
    }

    /// Product in the unramified ring `O_0` (length-`f` coordinate vectors).
    pub fn mul0(&self, a: &[u128], b: &[u128]) -> Coords {
        let f = self.f;
        let m = &self.modulus;
        if f == 1 {
            return SmallVec::from_elem(m.mul(a[0], b[0]), 1);
        }
        let mut acc = vec![Acc::default(); 2 * f - 1];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                acc[i + j].mac(a[i], b[j]);
            }
        }
        let mut t: Vec<u128> = acc.into_iter().map(|x| m.reduce_acc(x)).collect();
        self.reduce_zeta(&mut t);
        SmallVec::from_slice(&t[..f])
    }

    fn reduce_zeta(&self, t: &mut [u128]) {
        let f = self.f;
        let m = &self.modulus;
        for k in (f..t.len()).rev() {
            let c = t[k];
            if c == 0 {
                continue;
            }
            t[k] = 0;
            for i in 0..f {
                if self.unram[i] != 0 {
                    t[k - f + i] = m.sub(t[k - f + i], m.mul(c, self.unram[i]));
                }
            }
        }
    }

    /// Reduces a `π`-polynomial with `O_0` coefficients (flattened, any length multiple of f)
    /// modulo the Eisenstein polynomial.
    fn reduce_pi(&self, t: &mut Vec<u128>) {
        let (e, f) = (self.e, self.f);
        let m = &self.modulus;
        let terms = t.len() / f;
        for j in (e..terms).rev() {
            let c: Coords = SmallVec::from_slice(&t[j * f..(j + 1) * f]);
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for x in &mut t[j * f..(j + 1) * f] {
                *x = 0;
            }
            for &i in &self.eis_support {
                let base = (j - e + i) * f;
                if self.eis_scalar {
                    let s = self.eis[i][0];
                    for k in 0..f {
                        t[base + k] = m.sub(t[base + k], m.mul(c[k], s));
                    }
                } else {
                    let prod = self.mul0(&c, &self.eis[i]);
                    for k in 0..f {
                        t[base + k] = m.sub(t[base + k], prod[k]);
                    }
                }
            }
        }
        t.truncate(e * f);
    }

    /// Product of two elements of the ring of integers.
    pub fn mul(&self, a: &[u128], b: &[u128]) -> Coords {
        let (e, f) = (self.e, self.f);
        let m = &self.modulus;
        if e == 1 && f == 1 {
            return SmallVec::from_elem(m.mul(a[0], b[0]), 1);
        }
        if e == 1 {
            return self.mul0(a, b);
        }
        if f == 1 {
            let mut acc = vec![Acc::default(); 2 * e - 1];
            for i in 0..e {
                let x = a[i];
                if x == 0 {
                    continue;
                }
                for j in 0..e {
                    acc[i + j].mac(x, b[j]);
                }
            }
            let mut t: Vec<u128> = acc.into_iter().map(|x| m.reduce_acc(x)).collect();
            self.reduce_pi(&mut t);
            return SmallVec::from_vec(t);
        }
        let wz = 2 * f - 1;
        let mut acc = vec![Acc::default(); (2 * e - 1) * wz];
        for j1 in 0..e {
            for i1 in 0..f {
                let x = a[j1 * f + i1];
                if x == 0 {
                    continue;
                }
                for j2 in 0..e {
                    for i2 in 0..f {
                        acc[(j1 + j2) * wz + i1 + i2].mac(x, b[j2 * f + i2]);
                    }
                }
            }
        }
        let mut t = vec![0u128; (2 * e - 1) * f];
        let mut row = vec![0u128; wz];
        for j in 0..2 * e - 1 {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = m.reduce_acc(acc[j * wz + k]);
            }
            self.reduce_zeta(&mut row);
            t[j * f..(j + 1) * f].copy_from_slice(&row[..f]);
            for x in row.iter_mut() {
                *x = 0;
            }
        }
        self.reduce_pi(&mut t);
        SmallVec::from_vec(t)
    }

    pub fn add(&self, a: &[u128], b: &[u128]) -> Coords {
        a.iter().zip(b).map(|(&x, &y)| self.modulus.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u128], b: &[u128]) -> Coords {
        a.iter().zip(b).map(|(&x, &y)| self.modulus.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &[u128]) -> Coords {
        a.iter().map(|&x| self.modulus.neg(x)).collect()
    }

    pub fn scale(&self, a: &[u128], s: u128) -> Coords {
        a.iter().map(|&x| self.modulus.mul(x, s)).collect()
    }

    /// `π`-adic valuation of a coordinate vector, capped at `e·N`.
    pub fn val_coords(&self, a: &[u128]) -> i64 {
        let (e, f, n) = (self.e, self.f, self.n);
        let p = self.p as u128;
        let mut best = (e as i64) * (n as i64);
        for j in 0..e {
            let v = a[j * f..(j + 1) * f].iter().map(|&x| val_p(x, p, n)).min().unwrap_or(n);
            if v < n {
                best = best.min(e as i64 * v as i64 + j as i64);
            }
        }
        best
    }

    /// Multiplication by `π^r` with `0 <= r < e`.
    fn mul_pi_small(&self, a: &[u128], r: usize) -> Coords {
        if r == 0 {
            return SmallVec::from_slice(a);
        }
        let (e, f) = (self.e, self.f);
        let mut t = vec![0u128; (e + r) * f];
        t[r * f..(r + e) * f].copy_from_slice(a);
        self.reduce_pi(&mut t);
        SmallVec::from_vec(t)
    }

    /// Multiplication by `π^k`, `k >= 0`; the result is zero when `k >= e·N`.
    pub fn mul_pi_pow(&self, a: &[u128], k: i64) -> Coords {
        debug_assert!(k >= 0);
        let e = self.e as i64;
        let (q, r) = (k / e, (k % e) as usize);
        if q >= self.n as i64 {
            return self.zero_coords();
        }
        let mut out = self.mul_pi_small(a, r);
        if q > 0 {
            let pq = self.ppow[q as usize];
            out = self.scale(&out, pq);
            if self.e > 1 {
                out = self.mul(&out, &self.ue_pows[q as usize]);
            }
        }
        out
    }

    /// Exact division by `π^k`, assuming the valuation is at least `k`. Coordinates of the
    /// result are meaningful modulo `p^{N - ⌈k/e⌉}`.
    pub fn div_pi_pow(&self, a: &[u128], k: i64) -> Coords {
        if k <= 0 {
            return self.mul_pi_pow(a, -k);
        }
        let e = self.e as i64;
        let q = (k + e - 1) / e;
        let m = (q * e - k) as usize;
        let y = self.mul_pi_small(a, m);
        let pq = self.ppow[(q as usize).min(self.n as usize)];
        let y: Coords = y.iter().map(|&x| x / pq).collect();
        if self.e > 1 {
            self.mul(&y, &self.w_pows[(q as usize).min(self.n as usize)])
        } else {
            y
        }
    }

    /// Relative precision (in `π` units) still available after [`Self::div_pi_pow`] by `π^k`.
    pub fn div_pi_precision(&self, k: i64) -> i64 {
        if k <= 0 {
            return (self.e as i64) * (self.n as i64);
        }
        let e = self.e as i64;
        e * (self.n as i64 - (k + e - 1) / e)
    }

    /// Inverse of a unit by Newton iteration from a residue-field inverse.
    pub fn inv_unit(&self, a: &[u128]) -> Option<Coords> {
        let f = self.f;
        let m = &self.modulus;
        let p = self.p as u128;
        // Residue of a: its π^0 coordinate block taken mod p.
        let a0: Vec<u64> = a[..f].iter().map(|&x| (x % p) as u64).collect();
        if a0.iter().all(|&x| x == 0) {
            return None;
        }
        let g: Vec<u64> = self.unram.iter().map(|&x| (x % p) as u64).collect();
        let inv0 = super::residue::fp_poly::inv_mod(&a0, &g, self.p)?;
        let mut x = self.zero_coords();
        for (i, &c) in inv0.iter().enumerate() {
            x[i] = c as u128;
        }
        let two = {
            let mut c = self.zero_coords();
            c[0] = 2 % m.value();
            c
        };
        // Each step doubles the number of correct π-digits.
        let mut correct = 1i64;
        let target = (self.e as i64) * (self.n as i64);
        while correct < target {
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
            correct *= 2;
        }
        Some(x)
    }

    /// Reduces a rational number's numerator/denominator to a unit residue mod `p^N` given
    /// their p-free parts.
    pub fn unit_from_bigint(&self, num: &BigInt, den: &BigInt) -> u128 {
        let m = self.modulus.value();
        let a = big_mod(num, m);
        let b = big_mod(den, m);
        self.modulus.mul(a, self.modulus.inv(b).expect("p-free denominator"))
    }
}

/// Splits off the power of `p` from a nonzero integer.
pub(crate) fn split_p(x: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        y = q;
        v += 1;
    }
    (v, y)
}
