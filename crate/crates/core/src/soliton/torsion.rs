//! Torsion roots of the formal logarithm: the cyclic sets `T_{n,i} = {π : l_i(π) = 0}` through
//! Newton-polygon slope extraction, and the full set `T_1 = {π⃗ : l⃗(π⃗) = 0}` through the
//! residue equations `u + ē u^{(p)} = 0` and multivariate Newton iteration.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::Ratio;

use super::{FormalLog, SolitonError};
use crate::curve::{det_mod_p, matrix_order_mod_p};
use crate::padic::{
    hensel_lift, newton_polygon, slope_factor, teichmuller_root, valuations, PadicElement, PadicField,
    ResidueElement,
};

/// Largest totally ramified degree the cyclic solver adjoins.
const MAX_RAMIFICATION: u64 = 256;

/// A torsion root with its level `s` (`|π| = |p|^{1/(p^s − p^{s−1})}`; level 0 is `π = 0`).
#[derive(Clone, Debug)]
pub struct TorsionRoot {
    pub level: u32,
    pub value: PadicElement,
}

/// The set `T_{n,i}` in the extension `Q_p[X]/(P_n)`.
#[derive(Clone, Debug)]
pub struct CyclicTorsion {
    pub component: usize,
    pub level: u32,
    pub field: PadicField,
    /// The Eisenstein polynomial `P_n` adjoined, from the constant term.
    pub eisenstein: Vec<BigInt>,
    /// Newton polygon of `Q(Z)` with `l_i(X) = X·Q(X^{p−1})`, as `(slope, length)` pairs.
    pub polygon: Vec<(Ratio<i64>, usize)>,
    pub roots: Vec<TorsionRoot>,
    /// `l_i` evaluated at each root.
    pub residuals: Vec<PadicElement>,
    /// Valuation bound for the logarithm terms beyond the available levels.
    pub omitted_bound: Ratio<i64>,
}

impl CyclicTorsion {
    pub fn residuals_zero(&self) -> bool {
        self.residuals.iter().all(|r| r.is_zero() || r.valuation().map_or(false, |v| v >= self.omitted_bound))
    }

    /// Number of roots of each valuation (`None` for the zero root).
    pub fn valuation_counts(&self) -> BTreeMap<Option<Ratio<i64>>, usize> {
        let mut out = BTreeMap::new();
        for r in &self.roots {
            *out.entry(r.value.valuation()).or_insert(0) += 1;
        }
        out
    }

    /// Pairwise differences are nonzero at precision.
    pub fn distinct(&self) -> bool {
        pairwise_distinct(self.roots.iter().map(|r| &r.value).collect())
    }

    /// The Newton polygon predicts `p^{s−1}` roots `Z` of valuation `1/p^{s−1}` for each level
    /// `s`; the roots found must realise `(p − 1)p^{s−1}` values `X` of valuation
    /// `1/((p − 1)p^{s−1})` for `s ≤ n`, plus the zero root.
    pub fn polygon_matches(&self) -> bool {
        let p = self.field.p() as i64;
        let expected: Vec<(Ratio<i64>, usize)> =
            (0..=self.level).map(|s| (Ratio::new(-1, p.pow(s)), p.pow(s) as usize)).collect();
        if self.polygon != expected {
            return false;
        }
        let counts = self.valuation_counts();
        let mut want: BTreeMap<Option<Ratio<i64>>, usize> = BTreeMap::new();
        want.insert(None, 1);
        for s in 1..=self.level {
            let len = self.polygon[s as usize - 1].1;
            want.insert(Some(Ratio::new(1, (p - 1) * p.pow(s - 1))), (p as usize - 1) * len);
        }
        counts == want
    }
}

fn pairwise_distinct(xs: Vec<&PadicElement>) -> bool {
    for (a, x) in xs.iter().enumerate() {
        for y in &xs[a + 1..] {
            if x.sub_ref(y).is_zero() {
                return false;
            }
        }
    }
    true
}

/// `T_{n,i}` for `n ≤ 2`: extracts the level-`n` slope factor `Q_n` of `Q(Z)`, adjoins a root
/// of the Eisenstein polynomial `P_n(X) = Q_n(X^{p−1})` and finds every root by Newton
/// iteration from explicit seeds.
pub fn solve_torsion_cyclic(log: &FormalLog, i: usize, n: u32) -> Result<CyclicTorsion, SolitonError> {
    let p = log.p();
    let qp = log.field().clone();
    if i >= log.genus() || n == 0 {
        return Err(SolitonError::PreconditionUnmet(format!("component {i} and level {n} out of range")));
    }
    if !log.is_diagonal() {
        return Err(SolitonError::PreconditionUnmet("the logarithm does not split into components".into()));
    }
    let needed = n as usize + 2;
    if log.levels() < needed {
        return Err(SolitonError::MissingLevels { needed, available: log.levels() });
    }
    for k in 1..=n as usize {
        if log.e(k)[i][i].valuation() != Some(Ratio::from_integer(0)) {
            return Err(SolitonError::NonUnitCoefficient { k: k as u32, i });
        }
    }
    let c = log.component(i);
    let idx = |k: u32| ((p.pow(k) - 1) / (p - 1)) as usize;
    let mut q = vec![qp.zero(); idx(n + 1) + 1];
    for k in 0..=n + 1 {
        q[idx(k)] = c[k as usize].clone();
    }
    let polygon = newton_polygon(&valuations(&q))?;
    let (g_all, _) = slope_factor(&q, idx(n))?;
    let (q_lower, q_n) = if n == 1 {
        (None, g_all)
    } else {
        let (g1, h) = slope_factor(&g_all, idx(n - 1))?;
        let lead = h.last().unwrap().inv()?;
        (Some(g1), h.iter().map(|x| x * &lead).collect::<Vec<_>>())
    };
    let degree = (p - 1) * p.pow(n - 1);
    let mut eis: Vec<BigInt> = vec![BigInt::from(0); degree as usize + 1];
    for (j, cj) in q_n.iter().enumerate() {
        eis[j * (p as usize - 1)] = if j + 1 == q_n.len() {
            BigInt::from(1)
        } else {
            cj.to_bigint_mod().ok_or_else(|| SolitonError::RootFinding("slope factor is not integral".into()))?
        };
    }
    if n > 2 || degree > MAX_RAMIFICATION {
        return Err(SolitonError::ExtensionUnavailable { level: n, degree, polynomial: render_poly(&eis) });
    }
    let coords: Vec<Vec<BigInt>> = eis.iter().map(|c| vec![c.clone()]).collect();
    let field = PadicField::new(p, 1, Some(&coords), qp.precision())?;
    let pi = PadicElement::uniformizer(&field);
    let zeta = teichmuller_root(&field, p - 1)?;
    let zetas: Vec<PadicElement> = (0..p - 1).map(|j| zeta.pow(j)).collect();
    let q_n_k: Vec<PadicElement> = q_n.iter().map(|x| x.qp_into(&field)).collect::<Result<_, _>>()?;

    let mut roots = vec![TorsionRoot { level: 0, value: field.zero() }];
    if n == 1 {
        roots.extend(zetas.iter().map(|z| TorsionRoot { level: 1, value: z * &pi }));
    } else {
        // A level-1 root w₀ = π^p·U^{1/(p−1)} with U = z₁/π^{(p−1)p} of residue 1.
        let z1 = q_lower.unwrap()[0].neg_ref().qp_into(&field)?;
        let u = z1.div(&pi.pow((p - 1) * p))?;
        if u.residue()? != field.residue_field().one() {
            return Err(SolitonError::RootFinding("level-1 roots do not lie in the level-2 extension".into()));
        }
        let mut root_poly = vec![field.zero(); p as usize];
        root_poly[0] = u.neg_ref();
        root_poly[p as usize - 1] = field.one();
        let w0 = &hensel_lift(&root_poly, &field.one())? * &pi.pow(p);
        roots.extend(zetas.iter().map(|z| TorsionRoot { level: 1, value: z * &w0 }));
        let shifts: Vec<PadicElement> =
            std::iter::once(field.zero()).chain(zetas.iter().map(|z| z * &w0)).collect();
        for z in &zetas {
            for s in &shifts {
                let seed = z * &(&pi + s);
                let r = newton_eisenstein(&q_n_k, p, &seed)?;
                roots.push(TorsionRoot { level: 2, value: r });
            }
        }
    }
    // Polish against the full truncated logarithm; the slope factors carry rounding error.
    let q_k: Vec<PadicElement> = q.iter().map(|x| x.qp_into(&field)).collect::<Result<_, _>>()?;
    for r in roots.iter_mut().filter(|r| r.level > 0) {
        r.value = newton_eisenstein(&q_k, p, &r.value)?;
    }
    let residuals: Vec<PadicElement> =
        roots.iter().map(|r| log.eval_component(i, &r.value)).collect::<Result<_, _>>()?;
    let min_val = roots.iter().filter_map(|r| r.value.valuation()).min().unwrap_or(Ratio::from_integer(1));
    let omitted_bound = log.omitted_bound(min_val);
    Ok(CyclicTorsion { component: i, level: n, field, eisenstein: eis, polygon, roots, residuals, omitted_bound })
}

/// Newton iteration for a root of `Q_n(X^{p−1})` from a seed in its basin.
fn newton_eisenstein(q: &[PadicElement], p: u64, seed: &PadicElement) -> Result<PadicElement, SolitonError> {
    let dq: Vec<PadicElement> = q
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c * &PadicElement::from_i64(c.field(), j as i64))
        .collect();
    let horner = |cs: &[PadicElement], z: &PadicElement| {
        cs.iter().rev().fold(z.field().zero(), |acc, c| &(&acc * z) + c)
    };
    let pm1 = PadicElement::from_i64(seed.field(), p as i64 - 1);
    let mut x = seed.clone();
    for _ in 0..400 {
        let xp = x.pow(p - 2);
        let z = &xp * &x;
        let f = horner(q, &z);
        if f.is_zero() {
            return Ok(x);
        }
        let df = &(&pm1 * &xp) * &horner(&dq, &z);
        let step = f.div(&df)?;
        if step.is_zero() {
            return Ok(x);
        }
        x = &x - &step;
    }
    Err(SolitonError::RootFinding("Newton iteration did not converge".into()))
}

fn render_poly(c: &[BigInt]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, x)| **x != BigInt::from(0))
        .map(|(j, x)| match j {
            0 => format!("{x}"),
            1 => format!("{x}*X"),
            _ => format!("{x}*X^{j}"),
        })
        .collect();
    terms.join(" + ")
}

/// The set `T_1` over `K = Q_{p^f}(ϖ)`, `ϖ^{p−1} = p`.
#[derive(Clone, Debug)]
pub struct FullTorsion {
    pub field: PadicField,
    /// Unramified degree `f`, the multiplicative order of `−ē`.
    pub residue_degree: usize,
    /// Eisenstein polynomial `X^{p−1} − p`, from the constant term.
    pub eisenstein: Vec<i64>,
    /// Residue vectors `u⃗` with `π⃗ ≡ ϖ u⃗`.
    pub residues: Vec<Vec<ResidueElement>>,
    pub points: Vec<Vec<PadicElement>>,
    /// `l⃗` evaluated at each point.
    pub residuals: Vec<Vec<PadicElement>>,
    pub omitted_bound: Ratio<i64>,
}

impl FullTorsion {
    pub fn residuals_zero(&self) -> bool {
        self.residuals
            .iter()
            .flatten()
            .all(|r| r.is_zero() || r.valuation().map_or(false, |v| v >= self.omitted_bound))
    }

    /// Number of points whose `j`-th coordinate has valuation exactly `v`.
    pub fn count_with_valuation(&self, j: usize, v: Ratio<i64>) -> usize {
        self.points.iter().filter(|x| x[j].valuation() == Some(v)).count()
    }

    /// Points are pairwise distinct at precision.
    pub fn distinct(&self) -> bool {
        for (a, x) in self.points.iter().enumerate() {
            for y in &self.points[a + 1..] {
                if x.iter().zip(y).all(|(s, t)| s.sub_ref(t).is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

/// `T_1` for an ordinary logarithm, over the unramified degree needed by the residue
/// equations (at most `max_unramified`).
pub fn solve_torsion_full(log: &FormalLog, max_unramified: usize) -> Result<FullTorsion, SolitonError> {
    let p = log.p();
    let g = log.genus();
    if log.levels() < 2 {
        return Err(SolitonError::MissingLevels { needed: 2, available: log.levels() });
    }
    let ebar: Vec<Vec<u64>> = log
        .e(1)
        .iter()
        .map(|r| {
            r.iter()
                .map(|c| {
                    let v = c.to_bigint_mod().unwrap_or_default() % BigInt::from(p);
                    let v = if v < BigInt::from(0) { v + BigInt::from(p) } else { v };
                    u64::try_from(v).unwrap()
                })
                .collect()
        })
        .collect();
    if det_mod_p(&ebar, p) == 0 {
        return Err(SolitonError::NotOrdinary);
    }
    let neg: Vec<Vec<u64>> = ebar.iter().map(|r| r.iter().map(|&x| (p - x) % p).collect()).collect();
    let limit = (p as u128).pow(g as u32).min(1 << 20) as u64;
    let f = matrix_order_mod_p(&neg, p, limit)
        .ok_or(SolitonError::ResidueFieldTooSmall { required: None, max: max_unramified })?;
    if f as usize > max_unramified {
        return Err(SolitonError::ResidueFieldTooSmall { required: Some(f), max: max_unramified });
    }
    let f = f as usize;
    let mut eis = vec![0i64; p as usize];
    eis[0] = -(p as i64);
    eis[p as usize - 1] = 1;
    let field = PadicField::with_int_eisenstein(p, f, Some(&eis), log.field().precision())?;
    let rf = field.residue_field();
    let kernel = residue_kernel(&rf, &ebar, p)?;
    if kernel.len() != g {
        return Err(SolitonError::RootFinding(format!("residue equations have a kernel of dimension {}", kernel.len())));
    }
    let varpi = PadicElement::uniformizer(&field);
    let mut residues = Vec::new();
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    let total = (p as usize).pow(g as u32);
    for idx in 0..total {
        // Coefficients of the kernel basis, most significant first.
        let mut digits = vec![0u64; g];
        let mut rest = idx;
        for d in digits.iter_mut().rev() {
            *d = (rest % p as usize) as u64;
            rest /= p as usize;
        }
        let u: Vec<ResidueElement> = (0..g)
            .map(|slot| {
                digits
                    .iter()
                    .zip(&kernel)
                    .fold(rf.zero(), |acc, (&a, b)| acc.add(&b[slot].mul(&rf.from_u64(a))))
            })
            .collect();
        let seed: Vec<PadicElement> =
            u.iter().map(|r| &varpi * &PadicElement::lift_residue(&field, r)).collect();
        let x = newton_vector(log, seed)?;
        residuals.push(log.eval(&x)?);
        points.push(x);
        residues.push(u);
    }
    let omitted_bound = log.omitted_bound(Ratio::new(1, p as i64 - 1));
    Ok(FullTorsion { field, residue_degree: f, eisenstein: eis, residues, points, residuals, omitted_bound })
}

/// `F_p`-basis of `{u⃗ ∈ F_q^g : u⃗ + ē φ(u⃗) = 0}` in reduced echelon order.
fn residue_kernel(
    rf: &crate::padic::ResidueField,
    ebar: &[Vec<u64>],
    p: u64,
) -> Result<Vec<Vec<ResidueElement>>, SolitonError> {
    let g = ebar.len();
    let f = rf.f();
    let dim = g * f;
    let unit = |t: usize| {
        let mut c = vec![0u64; f];
        c[t] = 1;
        rf.from_coords(&c)
    };
    // Column (j, t): image of ζ^t placed in slot j.
    let mut m = vec![vec![0u64; dim]; dim];
    for j in 0..g {
        for t in 0..f {
            let b = unit(t);
            let fb = b.frobenius();
            for r in 0..g {
                let mut img = fb.mul(&rf.from_u64(ebar[r][j]));
                if r == j {
                    img = img.add(&b);
                }
                for (s, &x) in img.coords().iter().enumerate() {
                    m[r * f + s][j * f + t] = x % p;
                }
            }
        }
    }
    let null = nullspace_mod_p(m, p);
    Ok(null
        .into_iter()
        .map(|v| (0..g).map(|j| rf.from_coords(&v[j * f..(j + 1) * f])).collect())
        .collect())
}

fn nullspace_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let inv = |a: u64| crate::padic::fp_poly::inv_scalar(a, p);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let s = inv(m[r][c]);
        for x in m[r].iter_mut() {
            *x = *x * s % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let fct = m[i][c];
                for k in 0..cols {
                    m[i][k] = (m[i][k] + (p - fct) * m[r][k]) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u64; cols];
            v[fc] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[row][fc]) % p;
            }
            v
        })
        .collect()
}

/// Multivariate Newton iteration `x ← x − J(x)^{-1} l⃗(x)`.
fn newton_vector(log: &FormalLog, mut x: Vec<PadicElement>) -> Result<Vec<PadicElement>, SolitonError> {
    for _ in 0..200 {
        let fx = log.eval(&x)?;
        if fx.iter().all(|c| c.is_zero()) {
            return Ok(x);
        }
        let j = log.jacobian(&x)?;
        let step = solve_linear(j, fx)?;
        if step.iter().all(|c| c.is_zero()) {
            return Ok(x);
        }
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi = &*xi - si;
        }
    }
    Err(SolitonError::RootFinding("vector Newton iteration did not converge".into()))
}

/// Solves `m·y = b` by Gaussian elimination with largest-norm pivots.
pub(crate) fn solve_linear(
    mut m: Vec<Vec<PadicElement>>,
    mut b: Vec<PadicElement>,
) -> Result<Vec<PadicElement>, SolitonError> {
    let n = b.len();
    for c in 0..n {
        let pr = (c..n)
            .filter(|&r| !m[r][c].is_zero())
            .min_by_key(|&r| m[r][c].val_units().unwrap())
            .ok_or_else(|| SolitonError::RootFinding("singular Jacobian".into()))?;
        m.swap(c, pr);
        b.swap(c, pr);
        let inv = m[c][c].inv()?;
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let fct = &m[r][c] * &inv;
                for k in c..n {
                    let t = &fct * &m[c][k];
                    m[r][k] = &m[r][k] - &t;
                }
                let t = &fct * &b[c];
                b[r] = &b[r] - &t;
            }
        }
    }
    Ok((0..n).map(|i| &b[i] * &m[i][i].inv().unwrap()).collect())
}
