//! Partitions, Maya diagrams, hook lengths and Schur functions evaluated on loop coefficients.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{PadicElement, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatError {
    #[error("parts {0:?} are not weakly decreasing positive integers")]
    NotAPartition(Vec<i64>),
    #[error("cell ({i}, {j}) lies outside the shape")]
    CellOutOfShape { i: usize, j: usize },
    #[error("need coefficients up to index {needed}, only {available} available")]
    InsufficientCoefficients { needed: usize, available: usize },
    #[error("shape with l + λ_1 = {size} exceeds p = {p}")]
    ShapeTooLarge { size: usize, p: u64 },
}

/// A partition `κ_1 ≥ κ_2 ≥ … > 0` (trailing zeros implicit).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from parts, dropping trailing zeros.
    pub fn new(parts: &[i64]) -> Result<Self, CombinatError> {
        let mut v: Vec<i64> = parts.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        if v.iter().any(|&x| x <= 0) || v.windows(2).any(|w| w[0] < w[1]) {
            return Err(CombinatError::NotAPartition(parts.to_vec()));
        }
        Ok(Partition { parts: v.into_iter().map(|x| x as usize).collect() })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Part `κ_i` with 1-based `i`; zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    /// Number of nonzero parts `l(κ)`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Weight `|κ| = Σ κ_i`.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Componentwise order `self ≤ other` with implicit zeros.
    pub fn le(&self, other: &Partition) -> bool {
        (1..=self.len()).all(|i| self.part(i) <= other.part(i))
    }

    pub fn conjugate(&self) -> Partition {
        let m = self.part(1);
        Partition { parts: (1..=m).map(|j| self.parts.iter().filter(|&&x| x >= j).count()).collect() }
    }

    /// Hook length at the 1-based cell `(i, j)`.
    pub fn hook_length(&self, i: usize, j: usize) -> Result<usize, CombinatError> {
        if i == 0 || j == 0 || i > self.len() || j > self.part(i) {
            return Err(CombinatError::CellOutOfShape { i, j });
        }
        let arm = self.part(i) - j;
        let leg = self.parts.iter().skip(i).filter(|&&x| x >= j).count();
        Ok(arm + leg + 1)
    }

    /// Product of all hook lengths.
    pub fn hook_product(&self) -> u128 {
        let mut prod = 1u128;
        for i in 1..=self.len() {
            for j in 1..=self.part(i) {
                prod *= self.hook_length(i, j).expect("cell in shape") as u128;
            }
        }
        prod
    }

    /// All partitions of `n`, in reverse lexicographic order.
    pub fn all_of(n: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            for k in (1..=n.min(max)).rev() {
                cur.push(k);
                rec(n - k, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }

    /// All partitions of weight at most `n`, by increasing weight.
    pub fn all_up_to(n: usize) -> Vec<Partition> {
        (0..=n).flat_map(Partition::all_of).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A subset `M ⊂ Z` with `M ∩ Z_{≤0}` and `Z_{>0} ∖ M` finite.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MayaDiagram {
    low: BTreeSet<i64>,
    gaps: BTreeSet<i64>,
}

impl MayaDiagram {
    /// Diagram from its non-positive elements and its positive gaps.
    pub fn new(low: impl IntoIterator<Item = i64>, gaps: impl IntoIterator<Item = i64>) -> Self {
        let low = low.into_iter().filter(|&x| x <= 0).collect();
        let gaps = gaps.into_iter().filter(|&x| x > 0).collect();
        MayaDiagram { low, gaps }
    }

    /// Diagram containing `elements` and every integer `≥ from`.
    pub fn from_elements(elements: impl IntoIterator<Item = i64>, from: i64) -> Self {
        let els: BTreeSet<i64> = elements.into_iter().collect();
        let low = els.iter().copied().filter(|&x| x <= 0).chain(from..=0).collect();
        let gaps = (1..from).filter(|x| !els.contains(x)).collect();
        MayaDiagram { low, gaps }
    }

    /// `Z_{>0}`.
    pub fn vacuum() -> Self {
        MayaDiagram { low: BTreeSet::new(), gaps: BTreeSet::new() }
    }

    pub fn low(&self) -> &BTreeSet<i64> {
        &self.low
    }

    pub fn gaps(&self) -> &BTreeSet<i64> {
        &self.gaps
    }

    pub fn contains(&self, n: i64) -> bool {
        if n <= 0 {
            self.low.contains(&n)
        } else {
            !self.gaps.contains(&n)
        }
    }

    /// Index `i(M) = |M ∩ Z_{≤0}| − |Z_{>0} ∖ M|`.
    pub fn index(&self) -> i64 {
        self.low.len() as i64 - self.gaps.len() as i64
    }

    /// The increasing enumeration `s_1 < s_2 < …` truncated to `count` terms.
    pub fn enumerate(&self, count: usize) -> Vec<i64> {
        let start = self.low.iter().next().copied().unwrap_or(1).min(1);
        (start..).filter(|&n| self.contains(n)).take(count).collect()
    }

    /// Elements up to `n` inclusive.
    pub fn elements_up_to(&self, n: i64) -> Vec<i64> {
        let start = self.low.iter().next().copied().unwrap_or(1).min(1);
        (start..=n).filter(|&x| self.contains(x)).collect()
    }
}

/// `M ↦ (i(M), κ(M))` with `κ_i = i − i(M) − s_i`.
pub fn maya_to_pair(m: &MayaDiagram) -> (i64, Partition) {
    let idx = m.index();
    let count = m.low.len() + m.gaps.iter().next_back().copied().unwrap_or(0) as usize + 1;
    let s = m.enumerate(count);
    let parts: Vec<i64> = s.iter().enumerate().map(|(k, &si)| (k as i64 + 1) - idx - si).collect();
    (idx, Partition::new(&parts).expect("Maya diagrams give partitions"))
}

/// Inverse of [`maya_to_pair`].
pub fn pair_to_maya(index: i64, kappa: &Partition) -> MayaDiagram {
    let l = kappa.len() as i64;
    let s: BTreeSet<i64> = (1..=l).map(|i| i - index - kappa.part(i as usize) as i64).collect();
    // Every s_i with i > l equals i − index, so M ⊇ [l + 1 − index, ∞).
    MayaDiagram::from_elements(s, l + 1 - index)
}

/// Hook length of the 1-based cell `(i, j)` of `lambda`.
pub fn hook_length(lambda: &Partition, cell: (usize, usize)) -> Result<usize, CombinatError> {
    lambda.hook_length(cell.0, cell.1)
}

/// Determinant by elimination, choosing the pivot of least valuation in each column.
pub fn determinant<C: Scalar>(field: &C::Field, mut m: Vec<Vec<C>>) -> C {
    let n = m.len();
    let mut det = C::one_in(field);
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].valuation());
        let Some(pr) = pivot else {
            return C::zero_in(field);
        };
        if pr != col {
            m.swap(pr, col);
            det = det.neg();
        }
        let piv = m[col][col].clone();
        det = det.mul(&piv);
        let inv = piv.inv().expect("nonzero pivot");
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].mul(&inv);
            for c in col..n {
                let t = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&t);
            }
        }
    }
    det
}

/// Jacobi–Trudi determinant `S_λ(h) = det(h_{λ_i − i + j})` with `h_k = 0` for `k < 0`.
pub fn schur<C: Scalar>(lambda: &Partition, h: &[C]) -> Result<C, CombinatError> {
    let l = lambda.len();
    let field = h.first().map(|x| x.field_of()).ok_or(CombinatError::InsufficientCoefficients { needed: 0, available: 0 })?;
    if l == 0 {
        return Ok(C::one_in(&field));
    }
    let needed = (1..=l).map(|i| lambda.part(i) + l - i).max().unwrap_or(0);
    if needed >= h.len() {
        return Err(CombinatError::InsufficientCoefficients { needed, available: h.len().saturating_sub(1) });
    }
    let m: Vec<Vec<C>> = (1..=l)
        .map(|i| {
            (1..=l)
                .map(|j| {
                    let k = lambda.part(i) as i64 - i as i64 + j as i64;
                    if k < 0 {
                        C::zero_in(&field)
                    } else {
                        h[k as usize].clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok(determinant(&field, m))
}

/// Closed form `π^{|λ|} / Π HL(λ)` of the Schur function on the Artin–Hasse loop.
pub fn hook_schur_value(lambda: &Partition, pi: &PadicElement, p: u64) -> Result<PadicElement, CombinatError> {
    let size = lambda.len() + lambda.part(1);
    if size as u64 > p {
        return Err(CombinatError::ShapeTooLarge { size, p });
    }
    let k = pi.field();
    let hp = PadicElement::from_bigint(k, &num_bigint::BigInt::from(lambda.hook_product()));
    Ok(pi.pow(lambda.weight() as u64).div(&hp).expect("hook product is a unit"))
}
