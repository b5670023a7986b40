//! Cube-parametrized chains, their boundary, quadrature and `ℝ/cℤ` values.

mod integrate;
pub mod library;
mod modular;
pub mod witness;

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

pub use integrate::{integrate, integrate_cell, AtlasForm, FormSource, DEFAULT_ORDER};
pub use modular::{mod_distance, mod_reduce, ModValue};

use crate::error::{GbcError, Result};
use crate::exterior::{Chart, SmoothMap};

pub type CellMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Step for finite-difference cell Jacobians (parameter units).
const CELL_FD_STEP: f64 = 1e-5;
/// Parameter values used to compare and sample cells.
const PROBES: [f64; 4] = [0.0, 0.29, 0.61, 1.0];
const MATCH_TOL: f64 = 1e-9;

/// A smooth map from the unit cube `[0,1]^q` into a chart.
#[derive(Clone)]
pub struct Cell {
    pub label: String,
    chart: Arc<Chart>,
    dim: usize,
    map: CellMap,
    /// Row-major `chart_dim × q`.
    jacobian: Option<CellMap>,
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cell({} in {}, dim {})", self.label, self.chart.name, self.dim)
    }
}

impl Cell {
    pub fn new(
        label: impl Into<String>,
        chart: Arc<Chart>,
        dim: usize,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            chart,
            dim,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// A 0-cell.
    pub fn point(label: impl Into<String>, chart: Arc<Chart>, x: Vec<f64>) -> Self {
        Self::new(label, chart, 0, move |_| x.clone()).with_jacobian(|_| Vec::new())
    }

    /// The affine box `u ↦ lower + u·(upper − lower)` (degenerate axes allowed
    /// when `lower[a] == upper[a]`; such axes are not parameters).
    pub fn rectangle(label: impl Into<String>, chart: Arc<Chart>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let free: Vec<usize> = (0..lower.len()).filter(|&a| lower[a] != upper[a]).collect();
        let (q, n) = (free.len(), lower.len());
        let (f1, f2) = (free.clone(), free);
        let (lo, up) = (lower.clone(), upper.clone());
        Self::new(label, chart, q, move |u| {
            let mut x = lo.clone();
            for (k, &a) in f1.iter().enumerate() {
                x[a] = lo[a] + u[k] * (up[a] - lo[a]);
            }
            x
        })
        .with_jacobian(move |_| {
            let mut j = vec![0.0; n * q];
            for (k, &a) in f2.iter().enumerate() {
                j[a * q + k] = upper[a] - lower[a];
            }
            j
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (self.map)(u)
    }

    pub fn jacobian(&self, u: &[f64]) -> Vec<f64> {
        match &self.jacobian {
            Some(j) => j(u),
            None => self.fd_jacobian(u),
        }
    }

    pub fn fd_jacobian(&self, u: &[f64]) -> Vec<f64> {
        let (n, q, h) = (self.chart.dim(), self.dim, CELL_FD_STEP);
        let mut out = vec![0.0; n * q];
        let mut v = u.to_vec();
        for k in 0..q {
            let mut at = |d: f64| {
                v[k] = u[k] + d;
                (self.map)(&v)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
            v[k] = u[k];
            for i in 0..n {
                out[i * q + k] = (m2[i] - p2[i] + 8.0 * (p1[i] - m1[i])) / (12.0 * h);
            }
        }
        out
    }

    /// The face `u_axis = side` as a `(q−1)`-cell.
    pub fn face(&self, axis: usize, side: f64) -> Cell {
        assert!(axis < self.dim);
        let insert = move |u: &[f64]| {
            let mut full = Vec::with_capacity(u.len() + 1);
            full.extend_from_slice(&u[..axis]);
            full.push(side);
            full.extend_from_slice(&u[axis..]);
            full
        };
        let (this, this2) = (self.clone(), self.clone());
        let (q, n) = (self.dim, self.chart.dim());
        Cell::new(format!("{}|{axis}={side}", self.label), self.chart.clone(), q - 1, move |u| {
            this.apply(&insert(u))
        })
        .with_jacobian(move |u| {
            let j = this2.jacobian(&insert(u));
            let mut out = Vec::with_capacity(n * (q - 1));
            for i in 0..n {
                for k in 0..q {
                    if k != axis {
                        out.push(j[i * q + k]);
                    }
                }
            }
            out
        })
    }

    /// `m ∘ self`, a cell in the target chart of `m`.
    pub fn push_forward(&self, m: &SmoothMap) -> Result<Cell> {
        if m.source().name != self.chart.name {
            return Err(GbcError::ChartMismatch {
                expected: m.source().name.clone(),
                found: self.chart.name.clone(),
            });
        }
        let (c1, c2, m1, m2) = (self.clone(), self.clone(), m.clone(), m.clone());
        let (q, n, p) = (self.dim, self.chart.dim(), m.target().dim());
        Ok(Cell::new(self.label.clone(), m.target().clone(), q, move |u| m1.apply(&c1.apply(u))).with_jacobian(
            move |u| {
                let x = c2.apply(u);
                let (jm, jc) = (m2.jacobian(&x), c2.jacobian(u));
                let mut out = vec![0.0; p * q];
                for i in 0..p {
                    for k in 0..q {
                        out[i * q + k] = (0..n).map(|a| jm[i * n + a] * jc[a * q + k]).sum();
                    }
                }
                out
            },
        ))
    }

    /// Image points on a regular `per_axis^q` parameter grid including the
    /// cube's corners.
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(2);
        let ticks: Vec<f64> = (0..per_axis).map(|i| i as f64 / (per_axis - 1) as f64).collect();
        grid(self.dim, &ticks).iter().map(|u| self.apply(u)).collect()
    }

    /// Whether the cell has no `q`-dimensional extent on the manifold: its
    /// probes all coincide, or its Jacobian is rank deficient everywhere.
    pub fn is_degenerate(&self) -> bool {
        if self.dim == 0 {
            return false;
        }
        let probes = grid(self.dim, &PROBES);
        let first = self.apply(&probes[0]);
        if probes.iter().all(|u| self.chart.same_point(&first, &self.apply(u), MATCH_TOL)) {
            return true;
        }
        let inner = grid(self.dim, &[0.23, 0.5, 0.81]);
        inner.iter().all(|u| gram_volume(&self.jacobian(u), self.chart.dim(), self.dim) < 1e-12)
    }

    /// `Some(1)` if both cells parametrize the same image the same way,
    /// `Some(−1)` for a reversed 1-cell, `None` otherwise.
    pub fn matches(&self, other: &Cell) -> Option<i64> {
        if self.chart.name != other.chart.name || self.dim != other.dim {
            return None;
        }
        let probes = grid(self.dim, &PROBES);
        let same = |flip: bool| {
            probes.iter().all(|u| {
                let v: Vec<f64> = if flip { u.iter().map(|t| 1.0 - t).collect() } else { u.clone() };
                self.chart.same_point(&self.apply(u), &other.apply(&v), MATCH_TOL)
            })
        };
        if same(false) {
            Some(1)
        } else if self.dim == 1 && same(true) {
            Some(-1)
        } else {
            None
        }
    }
}

fn gram_volume(j: &[f64], n: usize, q: usize) -> f64 {
    let mut g = vec![0.0; q * q];
    for a in 0..q {
        for b in 0..q {
            g[a * q + b] = (0..n).map(|i| j[i * q + a] * j[i * q + b]).sum();
        }
    }
    crate::bundle::determinant(&g, q).max(0.0).sqrt()
}

/// All points of `ticks^q`.
pub(crate) fn grid(q: usize, ticks: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..q {
        out = out
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut p = p.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    out
}

/// A formal integer combination of cells of one dimension.
#[derive(Clone, Debug, Default)]
pub struct Chain {
    dim: usize,
    terms: Vec<(i64, Cell)>,
}

impl Chain {
    pub fn empty(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn from_cell(cell: Cell) -> Self {
        Self {
            dim: cell.dim,
            terms: vec![(1, cell)],
        }
    }

    pub fn from_terms(dim: usize, terms: Vec<(i64, Cell)>) -> Result<Self> {
        let mut c = Self::empty(dim);
        for (k, cell) in terms {
            c.push(k, cell)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, coefficient: i64, cell: Cell) -> Result<()> {
        if cell.dim != self.dim {
            return Err(GbcError::Dimension(format!(
                "cell `{}` of dimension {} in a {}-chain",
                cell.label, cell.dim, self.dim
            )));
        }
        if coefficient != 0 {
            self.terms.push((coefficient, cell));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(i64, Cell)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|_| k != 0).map(|(c, cell)| (c * k, cell.clone())).collect(),
        }
    }

    /// Sum of two chains of the same dimension (empty chains adapt).
    pub fn plus(&self, other: &Chain) -> Result<Chain> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.dim != other.dim {
            return Err(GbcError::Dimension(format!("adding a {}-chain to a {}-chain", other.dim, self.dim)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Chain { dim: self.dim, terms })
    }

    /// Merges cells with matching images and drops degenerate cells and zero
    /// coefficients.
    pub fn simplify(&self) -> Chain {
        let mut merged: Vec<(i64, Cell)> = Vec::new();
        for (k, cell) in &self.terms {
            if cell.is_degenerate() {
                continue;
            }
            match merged.iter_mut().find_map(|(c, m)| m.matches(cell).map(|s| (c, s))) {
                Some((c, s)) => *c += s * k,
                None => merged.push((*k, cell.clone())),
            }
        }
        merged.retain(|(k, _)| *k != 0);
        Chain {
            dim: self.dim,
            terms: merged,
        }
    }

    /// `∂`: faces `u_i = s` with sign `(−1)^{i+s+1}`, simplified.
    pub fn boundary(&self) -> Result<Chain> {
        if self.dim == 0 {
            return Err(GbcError::Dimension("boundary of a 0-chain".into()));
        }
        let mut out = Chain::empty(self.dim - 1);
        for (k, cell) in &self.terms {
            for i in 0..self.dim {
                for s in [0usize, 1] {
                    let sign = if (i + s + 1) % 2 == 0 { 1 } else { -1 };
                    out.terms.push((sign * k, cell.face(i, s as f64)));
                }
            }
        }
        Ok(out.simplify())
    }

    /// `m ∘` every cell.
    pub fn push_forward(&self, m: &SmoothMap) -> Result<Chain> {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| c.push_forward(m).map(|c| (*k, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain { dim: self.dim, terms })
    }

    /// Image points of every cell on a parameter grid.
    pub fn sample_points(&self, per_axis: usize) -> Vec<(Arc<Chart>, Vec<f64>)> {
        self.terms
            .iter()
            .flat_map(|(_, c)| c.sample_grid(per_axis).into_iter().map(move |x| (c.chart.clone(), x)))
            .collect()
    }
}

impl From<Cell> for Chain {
    fn from(cell: Cell) -> Self {
        Chain::from_cell(cell)
    }
}

impl Neg for &Chain {
    type Output = Chain;

    fn neg(self) -> Chain {
        self.scaled(-1)
    }
}

impl Add for &Chain {
    type Output = Chain;

    /// Panics on a dimension mismatch; see [`Chain::plus`].
    fn add(self, other: &Chain) -> Chain {
        self.plus(other).expect("chains of equal dimension")
    }
}

impl Sub for &Chain {
    type Output = Chain;

    fn sub(self, other: &Chain) -> Chain {
        self + &(-other)
    }
}
