//! Integral local expansions at the base point, computed over `Z/mZ` (with `m = p^N` for
//! p-adic work and `m = p` on the special fibre).
//!
//! Exponents are powers of `T`, the inverse of the local parameter. A chart exposes the
//! elements of the coordinate ring `A` (regular away from the base point) through one monic
//! generator per non-gap degree, and the regular differentials through their expansions.

use std::collections::BTreeMap;

use super::engine::{poly_derivative_int, poly_mul_int, poly_pow_int, SeriesRing};

/// Superelliptic chart at the unique point above `x = ∞` of `y^d = Π F_k(x)^{a_k}`.
///
/// With `D = Σ a_k deg F_k` prime to `d` and `αD − βd = 1` (`0 < α < d`), the local
/// parameter is `T^{-1}` where `T = y^α / x^β`. Writing `τ = T^{-d}`, `V = 1/x` and
/// `R(V) = Π F̃_k(V)^{a_k}` with `F̃_k` the reversed factors, one has `V = τ R(V)^α`, so
/// `x = T^d W^{-α}` and `y = T^D W^{-β}` with the unit series `W(τ) = R(V(τ))`.
#[derive(Clone, Debug)]
pub(crate) struct InfinityChart {
    pub ring: SeriesRing,
    /// Number of stored `τ`-coefficients.
    pub len: usize,
    pub d: i64,
    pub big_d: i64,
    pub alpha: i64,
    pub beta: i64,
    pub degs: Vec<i64>,
    pub mults: Vec<i64>,
    /// `W(τ)`.
    pub w: Vec<u128>,
    /// `F̃_k(V(τ))` for every branch factor.
    pub ft: Vec<Vec<u128>>,
}

/// The generator `y^j Π F_k^{-c_k}` of one residue class of degrees modulo `d`.
#[derive(Clone, Debug)]
pub(crate) struct ClassGenerator {
    pub j: i64,
    pub c: Vec<i64>,
    /// Leading degree `jD − d Σ c_k deg F_k`.
    pub degree: i64,
}

/// A regular differential `x^i Π F_k^{c_k} y^{-m} dx` in the form `-τ'^{start-1} Z(τ'^d) dτ'`
/// with `τ' = T^{-1}`.
#[derive(Clone, Debug)]
pub(crate) struct RawDifferential {
    pub start: i64,
    pub step: i64,
    /// Coefficients `c_{start + step·k}` of the expansion `Σ c_j τ'^{j-1} dτ'`.
    pub coeffs: Vec<u128>,
}

impl InfinityChart {
    /// Builds the chart with `len` coefficients in `τ`.
    pub fn new(ring: SeriesRing, len: usize, d: i64, factors: &[(Vec<i64>, i64)]) -> Self {
        let len = len.max(2);
        let degs: Vec<i64> = factors.iter().map(|(f, _)| f.len() as i64 - 1).collect();
        let mults: Vec<i64> = factors.iter().map(|(_, a)| *a).collect();
        let big_d: i64 = degs.iter().zip(&mults).map(|(g, a)| g * a).sum();
        let alpha = (1..d).find(|a| (a * big_d).rem_euclid(d) == 1).unwrap_or(1);
        let beta = (alpha * big_d - 1) / d;
        let reversed: Vec<Vec<i128>> =
            factors.iter().map(|(f, _)| f.iter().rev().map(|&c| c as i128).collect()).collect();
        let mut r_poly = vec![1i128];
        for (f, &a) in reversed.iter().zip(&mults) {
            r_poly = poly_mul_int(&r_poly, &poly_pow_int(f, a as u32));
        }
        let r_der = poly_derivative_int(&r_poly);
        // Newton iteration for H(V) = V − τ R(V)^α = 0, doubling the precision each round.
        let mut v = vec![0u128, 1 % ring.value()];
        let mut cur = 2usize;
        loop {
            let next = (2 * cur).min(len);
            v.resize(next, 0);
            let rv = ring.compose(&r_poly, &v, next);
            let ra = ring.pow(&rv, alpha, next).expect("unit series");
            let h = ring.sub(&v, &ring.shift(&ra, 1, next));
            let rd = ring.compose(&r_der, &v, next);
            let ra1 = ring.pow(&rv, alpha - 1, next).expect("unit series");
            let t = ring.scale(&ring.mul(&ra1, &rd, next), ring.from_i128(alpha as i128));
            let hp = ring.sub(&ring.one(next), &ring.shift(&t, 1, next));
            let corr = ring.mul(&h, &ring.inv(&hp, next).expect("unit derivative"), next);
            v = ring.sub(&v, &corr);
            if next == len && cur == len {
                break;
            }
            cur = next;
        }
        let w = ring.compose(&r_poly, &v, len);
        let ft = reversed.iter().map(|f| ring.compose(f, &v, len)).collect();
        InfinityChart { ring, len, d, big_d, alpha, beta, degs, mults, w, ft }
    }

    /// Generator data for class `j`, with optional integer offsets `n_k` raising the allowed
    /// pole order at the branch points (twists by effective or anti-effective divisors).
    pub fn class_generator(&self, j: i64, offsets: &[i64]) -> ClassGenerator {
        let c: Vec<i64> = self
            .mults
            .iter()
            .enumerate()
            .map(|(k, &a)| (j * a + offsets.get(k).copied().unwrap_or(0)).div_euclid(self.d))
            .collect();
        let cc: i64 = c.iter().zip(&self.degs).map(|(c, g)| c * g).sum();
        ClassGenerator { j, c, degree: j * self.big_d - self.d * cc }
    }

    /// `W^{w} Π F̃_k(V)^{e_k}` to `len` terms.
    pub fn unit_product(&self, w_exp: i64, ft_exps: &[i64], len: usize) -> Vec<u128> {
        let mut acc = self.ring.pow(&self.w, w_exp, len).expect("unit series");
        for (f, &e) in self.ft.iter().zip(ft_exps) {
            if e != 0 {
                let t = self.ring.pow(f, e, len).expect("unit series");
                acc = self.ring.mul(&acc, &t, len);
            }
        }
        acc
    }

    /// `S(τ)` with `y^j Π F_k^{-c_k} = T^{degree} S(τ)`.
    pub fn class_series(&self, g: &ClassGenerator, len: usize) -> Vec<u128> {
        let cc: i64 = g.c.iter().zip(&self.degs).map(|(c, d)| c * d).sum();
        let neg: Vec<i64> = g.c.iter().map(|c| -c).collect();
        self.unit_product(-self.beta * g.j + self.alpha * cc, &neg, len)
    }

    /// The `d` class generators (one per residue of the degree modulo `d`).
    pub fn generators(&self, offsets: &[i64]) -> Vec<ClassGenerator> {
        (0..self.d).map(|j| self.class_generator(j, offsets)).collect()
    }

    /// Monic expansions of `x^i · G` for `i = 0..=i_max`, each with `len` coefficients in `τ`.
    pub fn class_multiples(&self, g: &ClassGenerator, i_max: i64, len: usize) -> Vec<Vec<u128>> {
        let winv = self.ring.pow(&self.w, -self.alpha, len).expect("unit series");
        let mut cur = self.class_series(g, len);
        let mut out = Vec::with_capacity(i_max.max(0) as usize + 1);
        for i in 0..=i_max.max(0) {
            if i > 0 {
                cur = self.ring.mul(&cur, &winv, len);
            }
            out.push(cur.clone());
        }
        out
    }

    /// Regular differentials `x^i Π F_k^{c_k} y^{-m} dx` (`c_k = ⌊m a_k/d⌋`, `1 ≤ m < d`),
    /// expanded to `len` coefficients.
    pub fn regular_differentials(&self, len: usize) -> Vec<RawDifferential> {
        let ring = &self.ring;
        let q = ring.pow(&self.w, -self.alpha, len + 1).expect("unit series");
        let qd = ring.derivative(&q);
        // Hx = d (Q − τ Q').
        let hx = ring.scale(&ring.sub(&q, &ring.shift(&qd, 1, len)), ring.from_i128(self.d as i128));
        let mut out = Vec::new();
        for m in 1..self.d {
            let c: Vec<i64> = self.mults.iter().map(|&a| (m * a).div_euclid(self.d)).collect();
            let cc: i64 = c.iter().zip(&self.degs).map(|(c, g)| c * g).sum();
            let mut i = 0;
            loop {
                let start = m * self.big_d - self.d * (i + 1 + cc);
                if start < 1 {
                    break;
                }
                let u = self.unit_product(-self.alpha * (i + cc) + self.beta * m, &c, len);
                let z = ring.mul(&u, &hx, len);
                let coeffs = z.iter().map(|&v| ring.modulus().neg(v)).collect();
                out.push(RawDifferential { start, step: self.d, coeffs });
                i += 1;
            }
        }
        out
    }
}

/// Chart at an affine point `(x₀, y₀)` with `y₀` a unit of a hyperelliptic curve
/// `y² = f(x)`, `deg f = 2g + 1`; the local parameter is `x − x₀ = T^{-1}`.
#[derive(Clone, Debug)]
pub(crate) struct AffineChart {
    pub ring: SeriesRing,
    pub len: usize,
    pub genus: i64,
    pub x0: i128,
    /// `y` as a power series in `T^{-1}`.
    pub y: Vec<u128>,
}

impl AffineChart {
    /// `f` is given expanded (coefficients from the constant term); `y0` selects the square
    /// root of `f(x0)` by its residue.
    pub fn new(ring: SeriesRing, len: usize, f: &[i128], x0: i128, y0: i128, genus: i64) -> Self {
        let len = len.max(1);
        // f(x0 + s) as a polynomial in s.
        let shifted = ring.compose(f, &[ring.from_i128(x0), 1 % ring.value()], len);
        let two_inv = ring.modulus().inv(2 % ring.value()).expect("odd modulus");
        let mut y = vec![ring.from_i128(y0)];
        y.resize(len, 0);
        // Newton for y² = f(x0 + s): y ← (y + f/y)/2; converges from the residue of y0.
        let mut rounds = 2 * (u128::BITS - ring.value().leading_zeros()) as usize + 2 * len.ilog2() as usize + 4;
        loop {
            let q = ring.mul(&shifted, &ring.inv(&y, len).expect("unit base ordinate"), len);
            let next = ring.scale(&ring.add(&y, &q), two_inv);
            rounds -= 1;
            if next == y || rounds == 0 {
                y = next;
                break;
            }
            y = next;
        }
        AffineChart { ring, len, genus, x0, y }
    }

    /// Monic generator of degree `n ≥ g + 1`: `T^n (y + [y]_{<n})` scaled by `1/(2y₀)`;
    /// coefficient `k` sits at `T^{n-k}`.
    pub fn generator(&self, n: i64, len: usize) -> Vec<u128> {
        let ring = &self.ring;
        let inv = ring.modulus().inv(ring.modulus().add(self.y[0], self.y[0])).expect("unit ordinate");
        (0..len)
            .map(|k| {
                let c = self.y.get(k).copied().unwrap_or(0);
                let c = if (k as i64) < n { ring.modulus().add(c, c) } else { c };
                ring.modulus().mul(c, inv)
            })
            .collect()
    }

    /// Differentials `x^i dx / y` for `i < g`, expanded to `len` coefficients.
    pub fn regular_differentials(&self, len: usize) -> Vec<RawDifferential> {
        let ring = &self.ring;
        let yinv = ring.inv(&self.y, len).expect("unit ordinate");
        let base = [ring.from_i128(self.x0), 1 % ring.value()];
        let mut xp = ring.one(len);
        let mut out = Vec::new();
        for _ in 0..self.genus {
            out.push(RawDifferential { start: 1, step: 1, coeffs: ring.mul(&xp, &yinv, len) });
            xp = ring.mul(&xp, &base, len);
        }
        out
    }
}

/// Either chart, with the operations shared by both.
#[derive(Clone, Debug)]
pub(crate) enum Chart {
    Infinity(InfinityChart),
    Affine(AffineChart),
}

/// Decomposition `T^M = a + t + Σ e_i T^{μ_i}` with `a ∈ A` and `t` of negative degree, over
/// `Z/mZ`, kept down to a lowest exponent.
#[derive(Clone, Debug)]
pub(crate) struct RawDecomposition {
    /// Coefficients at the gaps, indexed like `mu`.
    pub e: Vec<u128>,
    /// Coefficients of `t` at exponents `low..=-1`.
    pub tail: BTreeMap<i64, u128>,
}

impl Chart {
    pub fn ring(&self) -> &SeriesRing {
        match self {
            Chart::Infinity(c) => &c.ring,
            Chart::Affine(c) => &c.ring,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Chart::Infinity(c) => c.len,
            Chart::Affine(c) => c.len,
        }
    }

    /// Spacing of the exponents occurring in a single generator.
    pub fn step(&self) -> i64 {
        match self {
            Chart::Infinity(c) => c.d,
            Chart::Affine(_) => 1,
        }
    }

    /// Leading degrees of the generators of `A` up to `cap`.
    pub fn nongaps(&self, cap: i64, offsets: &[i64]) -> Vec<i64> {
        match self {
            Chart::Infinity(c) => {
                let mut v: Vec<i64> = c
                    .generators(offsets)
                    .iter()
                    .flat_map(|g| (0..).map(move |i| g.degree + c.d * i).take_while(move |&n| n <= cap))
                    .collect();
                v.sort_unstable();
                v
            }
            Chart::Affine(c) => std::iter::once(0).chain((c.genus + 1)..=cap).filter(|&n| n <= cap).collect(),
        }
    }

    /// Monic generators with leading degree in `degrees`, each expanded with `len_of(n)`
    /// coefficients (coefficient `k` at exponent `n − step·k`).
    pub fn generator_table(
        &self,
        degrees: &[i64],
        offsets: &[i64],
        len_of: impl Fn(i64) -> usize,
    ) -> BTreeMap<i64, Vec<u128>> {
        let mut out = BTreeMap::new();
        match self {
            Chart::Infinity(c) => {
                for g in c.generators(offsets) {
                    let wanted: Vec<i64> =
                        degrees.iter().copied().filter(|&n| n >= g.degree && (n - g.degree) % c.d == 0).collect();
                    let Some(&top) = wanted.iter().max() else { continue };
                    let len = wanted.iter().map(|&n| len_of(n)).max().unwrap_or(1).min(c.len);
                    let mults = c.class_multiples(&g, (top - g.degree) / c.d, len);
                    for n in wanted {
                        let mut v = mults[((n - g.degree) / c.d) as usize].clone();
                        v.truncate(len_of(n).min(len));
                        out.insert(n, v);
                    }
                }
            }
            Chart::Affine(c) => {
                for &n in degrees {
                    let len = len_of(n).min(c.len);
                    if n == 0 {
                        out.insert(0, c.ring.one(len));
                    } else if n > c.genus {
                        out.insert(n, c.generator(n, len));
                    }
                }
            }
        }
        out
    }

    /// Gaps of the (untwisted) ring `A`.
    pub fn gaps(&self) -> Vec<i64> {
        match self {
            Chart::Infinity(c) => {
                let mut gaps = Vec::new();
                for g in c.generators(&[]) {
                    let r = g.degree.rem_euclid(c.d);
                    let first = if r == 0 { c.d } else { r };
                    gaps.extend((0..).map(|i| first + c.d * i).take_while(|&n| n < g.degree));
                }
                gaps.sort_unstable();
                gaps
            }
            Chart::Affine(c) => (1..=c.genus).collect(),
        }
    }

    /// Top-down decomposition of `T^M` keeping coefficients down to exponent `low ≤ 1`.
    pub fn decompose(&self, power: i64, low: i64, mu: &[i64]) -> RawDecomposition {
        let step = self.step();
        let ring = self.ring();
        let m = ring.modulus();
        let count = ((power - low).div_euclid(step) + 1).max(1) as usize;
        let exps: Vec<i64> = (0..count as i64).map(|k| power - step * k).collect();
        let nongap_degrees: Vec<i64> = {
            let ng = self.nongaps(power, &[]);
            let set: std::collections::BTreeSet<i64> = ng.into_iter().collect();
            exps.iter().copied().filter(|n| *n >= 0 && set.contains(n)).collect()
        };
        let table = self.generator_table(&nongap_degrees, &[], |n| ((n - low).div_euclid(step) + 1) as usize);
        let mut rem = vec![0u128; count];
        rem[0] = 1 % ring.value();
        let mut e = vec![0u128; mu.len()];
        for k in 0..count {
            let n = exps[k];
            if n < 0 {
                break;
            }
            let c = rem[k];
            if c == 0 {
                continue;
            }
            if let Some(pos) = mu.iter().position(|&x| x == n) {
                e[pos] = c;
                rem[k] = 0;
                continue;
            }
            let gen = table.get(&n).expect("non-gap degree has a generator");
            for (t, &gcoef) in gen.iter().enumerate() {
                if k + t >= count {
                    break;
                }
                rem[k + t] = m.sub(rem[k + t], m.mul(c, gcoef));
            }
        }
        let tail = exps
            .iter()
            .zip(&rem)
            .filter(|(n, c)| **n < 0 && **c != 0)
            .map(|(n, c)| (*n, *c))
            .collect();
        RawDecomposition { e, tail }
    }

    /// Raw regular differentials with `len` coefficients each.
    pub fn regular_differentials(&self, len: usize) -> Vec<RawDifferential> {
        match self {
            Chart::Infinity(c) => c.regular_differentials(len),
            Chart::Affine(c) => c.regular_differentials(len),
        }
    }
}

impl RawDifferential {
    /// Coefficient `c_j` of `τ'^{j-1} dτ'`.
    pub fn coeff(&self, j: i64) -> u128 {
        if j < self.start || (j - self.start) % self.step != 0 {
            return 0;
        }
        self.coeffs.get(((j - self.start) / self.step) as usize).copied().unwrap_or(0)
    }

    /// Largest `j` whose coefficient is stored.
    pub fn known_up_to(&self) -> i64 {
        self.start + self.step * (self.coeffs.len() as i64 - 1)
    }
}
