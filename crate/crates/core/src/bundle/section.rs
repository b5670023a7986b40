use std::fmt;
use std::sync::Arc;

use super::{sample_box, BundleWithConnection};
use crate::error::{GbcError, Result};
use crate::exterior::{PointMap, DEFAULT_FD_STEP};

/// Frame components of a section over one chart.
#[derive(Clone)]
pub struct LocalSection {
    components: PointMap,
    /// Row-major `r × n`: `∂_a sᵢ`.
    jacobian: Option<PointMap>,
    rank: usize,
    base_dim: usize,
    fd_step: f64,
}

impl fmt::Debug for LocalSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalSection")
            .field("rank", &self.rank)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl LocalSection {
    pub fn new(rank: usize, base_dim: usize, components: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            components: Arc::new(components),
            jacobian: None,
            rank,
            base_dim,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn constant(rank: usize, base_dim: usize, value: Vec<f64>) -> Self {
        assert_eq!(value.len(), rank);
        Self::new(rank, base_dim, move |_| value.clone()).with_jacobian(move |_| vec![0.0; rank * base_dim])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn components(&self, x: &[f64]) -> Vec<f64> {
        (self.components)(x)
    }

    pub fn component_map(&self) -> PointMap {
        self.components.clone()
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => self.fd_jacobian(x),
        }
    }

    pub fn fd_jacobian(&self, x: &[f64]) -> Vec<f64> {
        let (r, n, h) = (self.rank, self.base_dim, self.fd_step);
        let mut out = vec![0.0; r * n];
        let mut y = x.to_vec();
        for a in 0..n {
            let mut at = |delta: f64| {
                y[a] = x[a] + delta;
                (self.components)(&y)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
            y[a] = x[a];
            for i in 0..r {
                out[i * n + a] = (m2[i] - p2[i] + 8.0 * (p1[i] - m1[i])) / (12.0 * h);
            }
        }
        out
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.components(x).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Pointwise product with a scalar function and its gradient.
    pub fn scaled_by(
        &self,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> LocalSection {
        let f = Arc::new(f);
        let (this, this2, f2) = (self.clone(), self.clone(), f.clone());
        let (r, n) = (self.rank, self.base_dim);
        LocalSection::new(r, n, move |x| this.components(x).into_iter().map(|c| c * f(x)).collect()).with_jacobian(
            move |x| {
                let s = this2.components(x);
                let js = this2.jacobian(x);
                let (fx, g) = (f2(x), grad(x));
                let mut out = vec![0.0; r * n];
                for i in 0..r {
                    for a in 0..n {
                        out[i * n + a] = g[a] * s[i] + fx * js[i * n + a];
                    }
                }
                out
            },
        )
    }
}

/// A section given by its components on (some of) the bundle's charts.
#[derive(Clone, Debug)]
pub struct SectionField {
    pub name: String,
    rank: usize,
    locals: Vec<Option<LocalSection>>,
}

impl SectionField {
    pub fn new(name: impl Into<String>, rank: usize, locals: Vec<Option<LocalSection>>) -> Self {
        Self {
            name: name.into(),
            rank,
            locals,
        }
    }

    pub fn zero(bundle: &BundleWithConnection) -> Self {
        let (r, n) = (bundle.rank(), bundle.base_dim());
        let locals = bundle.locals().iter().map(|_| Some(LocalSection::constant(r, n, vec![0.0; r]))).collect();
        Self::new("zero", r, locals)
    }

    /// The same constant components on every chart (meaningful when
    /// transitions are the identity, e.g. trivial bundles).
    pub fn constant(bundle: &BundleWithConnection, value: Vec<f64>) -> Self {
        let (r, n) = (bundle.rank(), bundle.base_dim());
        let locals = bundle
            .locals()
            .iter()
            .map(|_| Some(LocalSection::constant(r, n, value.clone())))
            .collect();
        Self::new("constant", r, locals)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn local(&self, chart: usize) -> Result<&LocalSection> {
        self.locals
            .get(chart)
            .and_then(|l| l.as_ref())
            .ok_or_else(|| GbcError::InvalidParameter(format!("section `{}` undefined on chart {chart}", self.name)))
    }

    pub fn locals(&self) -> &[Option<LocalSection>] {
        &self.locals
    }

    pub fn map_locals(&self, name: impl Into<String>, f: impl Fn(&LocalSection) -> LocalSection) -> Self {
        Self::new(name, self.rank, self.locals.iter().map(|l| l.as_ref().map(&f)).collect())
    }

    /// Max residual of `s_to(y) = g(x) s_from(x)` over sampled overlap points.
    pub fn transition_residual(&self, bundle: &BundleWithConnection, samples: usize, seed: u64) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for t in bundle.transitions() {
            let (Some(Some(from)), Some(Some(to))) = (self.locals.get(t.from), self.locals.get(t.to)) else {
                continue;
            };
            for x in sample_box(&t.overlap.0, &t.overlap.1, samples, seed) {
                let g = (t.frame)(&x);
                let s = from.components(&x);
                let y = t.coord_map.apply(&x);
                let st = to.components(&y);
                for i in 0..r {
                    let v: f64 = (0..r).map(|j| g[i * r + j] * s[j]).sum();
                    worst = worst.max((v - st[i]).abs());
                }
            }
        }
        worst
    }
}
