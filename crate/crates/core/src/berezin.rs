//! Berezin integral, Pfaffian over matchings, and exponentials of even elements.
//!
//! Sign convention: for a monomial written `dx_I ∧ e_1 ∧ … ∧ e_r` (forms
//! first), `T` returns `σ(r) dx_I` with `σ(r) = (−1)^{r(r−1)/2}`. For rank
//! `r = 2k` this is `(−1)^k`; it makes the fiber integral of the Thom form
//! `+1` and `T(exp(π*R)) = Pf(R)` under the identification
//! `R ↦ −½ Σ R_ij e_i ∧ e_j` used by `chern_weil`.

use crate::error::{GbcError, Result};
use crate::exterior::{GradedElement, ZERO_THRESHOLD};

/// Global sign of the Berezin integral on rank `r`.
pub fn berezin_sign(r: usize) -> f64 {
    if (r * r.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Projects onto the top fiber monomial; the result has fiber rank 0.
pub fn berezin_integral(a: &GradedElement) -> GradedElement {
    let r = a.fiber_rank();
    let top = if r == 0 { 0 } else { (1u32 << r) - 1 };
    let sign = berezin_sign(r);
    let mut out = GradedElement::zero(a.form_dim(), 0);
    for (forms, fibers, c) in a.terms() {
        if fibers == top {
            out.add_term(forms, 0, sign * c);
        }
    }
    out
}

/// An `r × r` antisymmetric matrix with even-degree graded entries.
#[derive(Clone, Debug)]
pub struct AntisymmetricFormMatrix {
    size: usize,
    entries: Vec<GradedElement>,
}

impl AntisymmetricFormMatrix {
    /// Builds from row-major entries, validating antisymmetry.
    pub fn new(size: usize, entries: Vec<GradedElement>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(GbcError::Dimension(format!(
                "{} entries for a {size}×{size} matrix",
                entries.len()
            )));
        }
        let m = Self { size, entries };
        let residual = m.antisymmetry_residual();
        if residual > ZERO_THRESHOLD {
            return Err(GbcError::NotAntisymmetric(residual));
        }
        Ok(m)
    }

    /// Builds from the strict upper triangle, filling the rest by antisymmetry.
    pub fn from_upper(size: usize, form_dim: usize, fiber_rank: usize, mut upper: impl FnMut(usize, usize) -> GradedElement) -> Self {
        let mut entries = vec![GradedElement::zero(form_dim, fiber_rank); size * size];
        for i in 0..size {
            for j in i + 1..size {
                let v = upper(i, j);
                entries[j * size + i] = -v.clone();
                entries[i * size + j] = v;
            }
        }
        Self { size, entries }
    }

    /// Scalar matrix (row-major) with the given algebra shape.
    pub fn from_scalars(size: usize, values: &[f64]) -> Result<Self> {
        let entries = values.iter().map(|&v| GradedElement::scalar(0, 0, v)).collect();
        Self::new(size, entries)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &GradedElement {
        &self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[GradedElement] {
        &self.entries
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.size;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(self.get(i, i).max_abs());
            for j in i + 1..n {
                worst = worst.max((self.get(i, j).clone() + self.get(j, i).clone()).max_abs());
            }
        }
        worst
    }

    /// Max-norm distance to another matrix of the same size.
    pub fn distance(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// Pfaffian as a signed sum over perfect matchings, products by wedge.
pub fn pfaffian(m: &AntisymmetricFormMatrix) -> Result<GradedElement> {
    let n = m.size();
    if n % 2 == 1 {
        return Err(GbcError::OddRank(n));
    }
    let residual = m.antisymmetry_residual();
    if residual > ZERO_THRESHOLD {
        return Err(GbcError::NotAntisymmetric(residual));
    }
    let (p, r) = m
        .entries()
        .first()
        .map(|e| (e.form_dim(), e.fiber_rank()))
        .unwrap_or((0, 0));
    if m.entries().iter().any(|e| e.degrees().any(|(i, j)| (i + j) % 2 == 1)) {
        return Err(GbcError::Dimension("Pfaffian entries must have even total degree".into()));
    }
    let indices: Vec<usize> = (0..n).collect();
    Ok(pfaffian_rec(m, &indices, p, r))
}

// Expansion along the first remaining index:
// Pf = Σ_j (−1)^{j−1} M[i₀][i_j] Pf(M without i₀, i_j).
fn pfaffian_rec(m: &AntisymmetricFormMatrix, idx: &[usize], p: usize, r: usize) -> GradedElement {
    if idx.is_empty() {
        return GradedElement::scalar(p, r, 1.0);
    }
    let first = idx[0];
    let mut out = GradedElement::zero(p, r);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let entry = m.get(first, j);
        if entry.is_empty() {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != j).collect();
        let sub = pfaffian_rec(m, &rest, p, r);
        let term = entry * &sub;
        if pos % 2 == 1 {
            out += &term;
        } else {
            out -= &term;
        }
    }
    out
}

/// `exp(a)` for `a` of purely even total degree.
///
/// Splits `a = s + n` with `n` nilpotent and returns
/// `eˢ Σ_{j ≤ ⌊(p+r)/2⌋} nʲ / j!`, which is exact.
pub fn exp_even(a: &GradedElement) -> Result<GradedElement> {
    let odd = a
        .terms()
        .filter(|(i, j, _)| (i.count_ones() + j.count_ones()) % 2 == 1)
        .fold(0.0f64, |m, (_, _, c)| m.max(c.abs()));
    if odd > ZERO_THRESHOLD {
        return Err(GbcError::OddExponent(odd));
    }
    let (p, r) = (a.form_dim(), a.fiber_rank());
    let s = a.scalar_part();
    let nil = a.filter(|i, j| i + j > 0 && (i + j) % 2 == 0);
    let order = (p + r) / 2;
    let mut term = GradedElement::scalar(p, r, 1.0);
    let mut sum = term.clone();
    for j in 1..=order {
        term = &term * &nil * (1.0 / j as f64);
        if term.is_empty() {
            break;
        }
        sum += &term;
    }
    Ok(sum * s.exp())
}
