//! Polynomial algorithms over p-adic fields: evaluation, Hensel lifting, Newton polygons,
//! Teichmüller roots and slope factorisation.

use num_rational::Ratio;

use super::{PadicElement, PadicError, PadicField, ResidueElement};

/// Horner evaluation of `Σ c_i x^i`.
pub fn poly_eval(coeffs: &[PadicElement], x: &PadicElement) -> PadicElement {
    let mut acc = PadicElement::zero(x.field());
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn poly_derivative(coeffs: &[PadicElement]) -> Vec<PadicElement> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * &PadicElement::from_i64(c.field(), i as i64))
        .collect()
}

pub fn poly_mul(a: &[PadicElement], b: &[PadicElement]) -> Vec<PadicElement> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let field = a[0].field();
    let mut out = vec![PadicElement::zero(field); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// Quotient and remainder; the leading coefficient of `b` must be nonzero at precision.
pub fn poly_divrem(
    a: &[PadicElement],
    b: &[PadicElement],
) -> Result<(Vec<PadicElement>, Vec<PadicElement>), PadicError> {
    let db = b.len() - 1;
    let lead_inv = b[db].inv()?;
    let mut r = a.to_vec();
    if a.len() <= db {
        return Ok((Vec::new(), r));
    }
    let field = a[0].field();
    let mut q = vec![PadicElement::zero(field); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] * &lead_inv;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] = &r[k + i] - &(&c * bi);
        }
        q[k] = c;
    }
    r.truncate(db);
    Ok((q, r))
}

/// Valuations of a coefficient list (`None` for zeros).
pub fn valuations(coeffs: &[PadicElement]) -> Vec<Option<Ratio<i64>>> {
    coeffs.iter().map(|c| c.valuation()).collect()
}

/// Lower convex hull of the points `(i, v_i)`, as `(slope, length)` pairs with increasing
/// slopes. A segment of slope `s` and length `l` accounts for `l` roots of valuation `-s`.
pub fn newton_polygon(vals: &[Option<Ratio<i64>>]) -> Result<Vec<(Ratio<i64>, usize)>, PadicError> {
    let pts: Vec<(i64, Ratio<i64>)> = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i as i64, v)))
        .collect();
    if pts.is_empty() {
        return Err(PadicError::Empty);
    }
    let mut hull: Vec<(i64, Ratio<i64>)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // Remove the middle point when it lies on or above the chord.
            let lhs = (y2 - y1) * Ratio::from_integer(pt.0 - x1);
            let rhs = (pt.1 - y1) * Ratio::from_integer(x2 - x1);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    Ok(hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            ((w[1].1 - w[0].1) / Ratio::from_integer(len), len as usize)
        })
        .collect())
}

/// Newton iteration from `approx` to a root of `poly`.
pub fn hensel_lift(poly: &[PadicElement], approx: &PadicElement) -> Result<PadicElement, PadicError> {
    let dpoly = poly_derivative(poly);
    let mut x = approx.clone();
    let fx = poly_eval(poly, &x);
    if fx.is_zero() {
        return Ok(x);
    }
    let dfx = poly_eval(&dpoly, &x);
    let (vf, vd) = match (fx.val_units(), dfx.val_units()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(PadicError::NotContracting),
    };
    if vf <= 2 * vd {
        return Err(PadicError::NotContracting);
    }
    let max_iter = 2 * (64 - (x.field().max_rel() as u64).leading_zeros()) as usize + 8;
    for _ in 0..max_iter {
        let fx = poly_eval(poly, &x);
        if fx.is_zero() {
            return Ok(x);
        }
        let dfx = poly_eval(&dpoly, &x);
        let step = fx.div(&dfx)?;
        x = &x - &step;
    }
    let fx = poly_eval(poly, &x);
    if fx.is_zero() {
        Ok(x)
    } else {
        Err(PadicError::NotContracting)
    }
}

/// Teichmüller lift of a residue class: the unique root of unity (or zero) reducing to it.
pub fn teichmuller_lift(field: &PadicField, r: &ResidueElement) -> PadicElement {
    let mut x = PadicElement::lift_residue(field, r);
    if r.is_zero() {
        return PadicElement::zero(field);
    }
    let q = field.residue_field().order();
    // Each power x ↦ x^q gains at least one p-adic digit.
    for _ in 0..=field.precision() {
        x = pow_u128(&x, q);
    }
    x
}

fn pow_u128(x: &PadicElement, mut e: u128) -> PadicElement {
    let mut r = PadicElement::one(x.field());
    let mut b = x.clone();
    while e > 0 {
        if e & 1 == 1 {
            r = &r * &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    r
}

/// A primitive `d`-th root of unity: the Teichmüller lift of the first residue (in
/// coordinate order) of exact multiplicative order `d`.
pub fn teichmuller_root(field: &PadicField, d: u64) -> Result<PadicElement, PadicError> {
    let rf = field.residue_field();
    let q = rf.order();
    if d == 0 || (q - 1) % d as u128 != 0 {
        return Err(PadicError::NoRoot { d, q });
    }
    let r = rf
        .elements()
        .skip(1)
        .find(|x| x.order() == Some(d as u128))
        .ok_or(PadicError::NoRoot { d, q })?;
    Ok(teichmuller_lift(field, &r))
}

/// Splits `poly = G·H` where `G` is monic of degree `m` and carries the `m` roots of largest
/// valuation (the Newton polygon must have a vertex at `m`).
pub fn slope_factor(
    poly: &[PadicElement],
    m: usize,
) -> Result<(Vec<PadicElement>, Vec<PadicElement>), PadicError> {
    let field = poly[0].field().clone();
    let n = poly.len() - 1;
    if m == 0 || m >= n {
        return Err(PadicError::FactorisationFailed(format!("degree {m} out of range 1..{n}")));
    }
    let mut h_inv: Vec<PadicElement> = vec![PadicElement::one(&field)];
    let mut g_prev: Option<Vec<PadicElement>> = None;
    for _ in 0..400 {
        // G = [poly · H^{-1}] truncated to degree m.
        let g: Vec<PadicElement> = (0..=m)
            .map(|k| {
                let mut s = PadicElement::zero(&field);
                for i in 0..=k.min(n) {
                    if k - i < h_inv.len() {
                        s = &s + &(&poly[i] * &h_inv[k - i]);
                    }
                }
                s
            })
            .collect();
        if let Some(prev) = &g_prev {
            if prev.iter().zip(&g).all(|(a, b)| a.eq_at_precision(b)) {
                let lead = g[m].inv()?;
                let gm: Vec<PadicElement> = g.iter().map(|c| c * &lead).collect();
                let (hq, _) = poly_divrem(poly, &gm)?;
                return Ok((gm, hq));
            }
        }
        let (hq, _) = poly_divrem(poly, &g)?;
        let c0 = hq[0].inv()?;
        let hn: Vec<PadicElement> = hq.iter().map(|c| c * &c0).collect();
        h_inv = series_inverse(&hn, m + 1)?;
        g_prev = Some(g);
    }
    Err(PadicError::FactorisationFailed("no convergence after 400 rounds".into()))
}

/// Power-series inverse to `len` terms of a series with invertible constant term.
fn series_inverse(a: &[PadicElement], len: usize) -> Result<Vec<PadicElement>, PadicError> {
    let field = a[0].field();
    let c0 = a[0].inv()?;
    let mut out = vec![c0.clone()];
    for k in 1..len {
        let mut s = PadicElement::zero(field);
        for i in 1..=k.min(a.len() - 1) {
            s = &s + &(&a[i] * &out[k - i]);
        }
        out.push(-(&s * &c0));
    }
    Ok(out)
}
