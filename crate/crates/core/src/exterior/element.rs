//! Elements of `Λ(ℝᵖ)* ⊗ Λ(ℝʳ)`, stored sparsely.
//!
//! A monomial `dx_I ∧ e_J` is encoded as a single bit mask over `p + r`
//! anticommuting generators: form generators occupy bits `0..p`, fiber
//! generators bits `p..p+r`. The canonical ordering of a monomial is
//! ascending bit order, so every sign is a count of transpositions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{GbcError, Result};

/// Absolute threshold below which a coefficient is treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Sign of moving the generators of `right` past those of `left` into
/// ascending order, assuming `left & right == 0`.
#[inline]
pub(crate) fn reorder_sign(left: u32, right: u32) -> f64 {
    let mut swaps = 0u32;
    let mut r = right;
    while r != 0 {
        let bit = r.trailing_zeros();
        // generators of `left` strictly above `bit` must hop over it
        swaps += (left >> (bit + 1)).count_ones();
        r &= r - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An element of the bigraded algebra of forms with fiber exterior coefficients.
#[derive(Clone, PartialEq)]
pub struct GradedElement {
    form_dim: usize,
    fiber_rank: usize,
    coeffs: BTreeMap<u32, f64>,
}

impl GradedElement {
    pub fn zero(form_dim: usize, fiber_rank: usize) -> Self {
        assert!(form_dim + fiber_rank <= 30, "too many generators");
        Self {
            form_dim,
            fiber_rank,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(form_dim: usize, fiber_rank: usize, value: f64) -> Self {
        Self::monomial(form_dim, fiber_rank, 0, 0, value)
    }

    /// `value · dx_I ∧ e_J` from bit sets over the form and fiber indices.
    pub fn monomial(form_dim: usize, fiber_rank: usize, form: u32, fiber: u32, value: f64) -> Self {
        let mut out = Self::zero(form_dim, fiber_rank);
        out.add_term(form, fiber, value);
        out
    }

    /// The 1-form `dxⁱ` (zero-based index).
    pub fn dx(form_dim: usize, fiber_rank: usize, i: usize) -> Self {
        assert!(i < form_dim);
        Self::monomial(form_dim, fiber_rank, 1 << i, 0, 1.0)
    }

    /// The fiber generator `eⱼ` (zero-based index).
    pub fn e(form_dim: usize, fiber_rank: usize, j: usize) -> Self {
        assert!(j < fiber_rank);
        Self::monomial(form_dim, fiber_rank, 0, 1 << j, 1.0)
    }

    /// A 1-form `Σ cᵢ dxⁱ`.
    pub fn one_form(form_dim: usize, fiber_rank: usize, components: &[f64]) -> Self {
        assert_eq!(components.len(), form_dim);
        let mut out = Self::zero(form_dim, fiber_rank);
        for (i, &c) in components.iter().enumerate() {
            out.add_term(1 << i, 0, c);
        }
        out
    }

    pub fn form_dim(&self) -> usize {
        self.form_dim
    }

    pub fn fiber_rank(&self) -> usize {
        self.fiber_rank
    }

    fn form_mask(&self) -> u32 {
        (1u32 << self.form_dim) - 1
    }

    fn pack(&self, form: u32, fiber: u32) -> u32 {
        debug_assert!(form >> self.form_dim == 0);
        debug_assert!(fiber >> self.fiber_rank == 0);
        form | (fiber << self.form_dim)
    }

    fn unpack(&self, key: u32) -> (u32, u32) {
        (key & self.form_mask(), key >> self.form_dim)
    }

    /// Adds `value · dx_I ∧ e_J`.
    pub fn add_term(&mut self, form: u32, fiber: u32, value: f64) {
        if value == 0.0 {
            return;
        }
        let key = self.pack(form, fiber);
        let entry = self.coeffs.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.coeffs.remove(&key);
        }
    }

    /// Coefficient of `dx_I ∧ e_J`; zero for absent keys.
    pub fn get(&self, form: u32, fiber: u32) -> f64 {
        self.coeffs.get(&self.pack(form, fiber)).copied().unwrap_or(0.0)
    }

    pub fn scalar_part(&self) -> f64 {
        self.get(0, 0)
    }

    /// Iterates `(form bits, fiber bits, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.coeffs.iter().map(move |(&k, &c)| {
            let (i, j) = self.unpack(k);
            (i, j, c)
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn prune(mut self, tol: f64) -> Self {
        self.coeffs.retain(|_, c| c.abs() > tol);
        self
    }

    /// Max-norm distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).max_abs()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.form_dim == other.form_dim
            && self.fiber_rank == other.fiber_rank
            && self.distance(other) <= tol
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.form_dim != other.form_dim || self.fiber_rank != other.fiber_rank {
            return Err(GbcError::Dimension(format!(
                "(p, r) = ({}, {}) vs ({}, {})",
                self.form_dim, self.fiber_rank, other.form_dim, other.fiber_rank
            )));
        }
        Ok(())
    }

    /// Graded-commutative product with the Koszul sign over total degree.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.wedge_unchecked(other))
    }

    pub(crate) fn wedge_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.form_dim, self.fiber_rank);
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &other.coeffs {
                if a & b != 0 {
                    continue;
                }
                let key = a | b;
                let v = reorder_sign(a, b) * ca * cb;
                *out.coeffs.entry(key).or_insert(0.0) += v;
            }
        }
        out.coeffs.retain(|_, c| *c != 0.0);
        out
    }

    /// Total degrees `|I| + |J|` that carry a nonzero coefficient.
    pub fn degrees(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.terms()
            .map(|(i, j, _)| (i.count_ones() as usize, j.count_ones() as usize))
    }

    /// Largest total degree of a coefficient above `tol`, if any.
    pub fn max_total_degree(&self, tol: f64) -> Option<usize> {
        self.terms()
            .filter(|(_, _, c)| c.abs() > tol)
            .map(|(i, j, _)| (i.count_ones() + j.count_ones()) as usize)
            .max()
    }

    /// Keeps only the terms whose bidegree satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let mut out = Self::zero(self.form_dim, self.fiber_rank);
        for (i, j, c) in self.terms() {
            if keep(i.count_ones() as usize, j.count_ones() as usize) {
                out.add_term(i, j, c);
            }
        }
        out
    }

    /// Same coefficients viewed with a different shape: form generators are
    /// sent through `form_map` (old index → new index), fiber generators kept.
    /// Signs are recomputed because the new indices may be reordered.
    pub fn reindexed(&self, form_dim: usize, fiber_rank: usize, form_map: &[usize]) -> Self {
        assert_eq!(form_map.len(), self.form_dim);
        assert!(fiber_rank >= self.fiber_rank);
        let mut out = Self::zero(form_dim, fiber_rank);
        for (i, j, c) in self.terms() {
            // rebuild dx_{map(i1)} ∧ dx_{map(i2)} ∧ … in order
            let mut mask = 0u32;
            let mut sign = 1.0;
            let mut bits = i;
            while bits != 0 {
                let old = bits.trailing_zeros() as usize;
                let new = 1u32 << form_map[old];
                sign *= reorder_sign(mask, new);
                mask |= new;
                bits &= bits - 1;
            }
            out.add_term(mask, j, sign * c);
        }
        out
    }

    /// Embeds a form with `p` generators into `form_dim ≥ p` generators,
    /// keeping the first `p` indices.
    pub fn widened(&self, form_dim: usize, fiber_rank: usize) -> Self {
        let map: Vec<usize> = (0..self.form_dim).collect();
        self.reindexed(form_dim, fiber_rank, &map)
    }

    /// Drops the fiber factor, keeping only the `J = ∅` terms.
    pub fn form_part(&self) -> Self {
        let mut out = Self::zero(self.form_dim, 0);
        for (i, j, c) in self.terms() {
            if j == 0 {
                out.add_term(i, 0, c);
            }
        }
        out
    }
}

impl fmt::Debug for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedElement(p={}, r={}) {{", self.form_dim, self.fiber_rank)?;
        for (n, (i, j, c)) in self.terms().enumerate() {
            if n > 0 {
                write!(f, " +")?;
            }
            write!(f, " {c:.6e}")?;
            for b in 0..self.form_dim {
                if i & (1 << b) != 0 {
                    write!(f, " dx{}", b + 1)?;
                }
            }
            for b in 0..self.fiber_rank {
                if j & (1 << b) != 0 {
                    write!(f, " e{}", b + 1)?;
                }
            }
        }
        write!(f, " }}")
    }
}

impl AddAssign<&GradedElement> for GradedElement {
    fn add_assign(&mut self, rhs: &GradedElement) {
        assert_eq!((self.form_dim, self.fiber_rank), (rhs.form_dim, rhs.fiber_rank));
        for (&k, &c) in &rhs.coeffs {
            *self.coeffs.entry(k).or_insert(0.0) += c;
        }
        self.coeffs.retain(|_, c| *c != 0.0);
    }
}

impl SubAssign<&GradedElement> for GradedElement {
    fn sub_assign(&mut self, rhs: &GradedElement) {
        assert_eq!((self.form_dim, self.fiber_rank), (rhs.form_dim, rhs.fiber_rank));
        for (&k, &c) in &rhs.coeffs {
            *self.coeffs.entry(k).or_insert(0.0) -= c;
        }
        self.coeffs.retain(|_, c| *c != 0.0);
    }
}

impl Add for GradedElement {
    type Output = GradedElement;
    fn add(mut self, rhs: GradedElement) -> GradedElement {
        self += &rhs;
        self
    }
}

impl Sub for GradedElement {
    type Output = GradedElement;
    fn sub(mut self, rhs: GradedElement) -> GradedElement {
        self -= &rhs;
        self
    }
}

impl Mul<f64> for GradedElement {
    type Output = GradedElement;
    fn mul(mut self, rhs: f64) -> GradedElement {
        if rhs == 0.0 {
            self.coeffs.clear();
        } else {
            self.coeffs.values_mut().for_each(|c| *c *= rhs);
        }
        self
    }
}

impl Neg for GradedElement {
    type Output = GradedElement;
    fn neg(self) -> GradedElement {
        self * -1.0
    }
}

/// Shorthand for the wedge product, panicking on shape mismatch.
impl Mul<&GradedElement> for &GradedElement {
    type Output = GradedElement;
    fn mul(self, rhs: &GradedElement) -> GradedElement {
        assert_eq!((self.form_dim, self.fiber_rank), (rhs.form_dim, rhs.fiber_rank));
        self.wedge_unchecked(rhs)
    }
}
