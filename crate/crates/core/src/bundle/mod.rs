//! Oriented Euclidean vector bundles in orthonormal local frames.
//!
//! A connection on a trivialization is a matrix `ω` of 1-forms acting on
//! frame components, `∇s = ds + ω s`; in orthonormal frames metric
//! compatibility is antisymmetry of `ω`. Transitions map components by
//! `s_to = g s_from`, so `ω_to = g ω_from g⁻¹ − (dg) g⁻¹`.

mod builtin;
mod manifold;
mod section;
mod total;

use std::fmt;
use std::sync::Arc;

use crate::berezin::AntisymmetricFormMatrix;
use crate::error::{GbcError, Result};
use crate::exterior::{Chart, GradedElement, PointMap, SmoothMap};

pub use builtin::{builtin, monopole_section, rotation_section, BuiltinParams};
pub use manifold::BaseManifold;
pub use section::{LocalSection, SectionField};
pub use total::{sphere_bundle, tautological_section, SphereBundle, TotalSpace, RHO_MAX};

/// Row-major `r × r × n` coefficients: entry `(i·r + j)·n + a` is the
/// `duᵃ` component of `ω_ij`.
pub type ConnectionCoefficients = PointMap;

/// Connection matrix of 1-forms on one chart.
#[derive(Clone)]
pub struct LocalConnection {
    chart: Arc<Chart>,
    rank: usize,
    coeffs: ConnectionCoefficients,
    /// `((i·r + j)·n + a)·n + b` ↦ `∂_b ω_ij,a`.
    derivative: Option<PointMap>,
    fd_step: f64,
}

impl fmt::Debug for LocalConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalConnection")
            .field("chart", &self.chart.name)
            .field("rank", &self.rank)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl LocalConnection {
    pub fn new(
        chart: Arc<Chart>,
        rank: usize,
        coeffs: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            chart,
            rank,
            coeffs: Arc::new(coeffs),
            derivative: None,
            fd_step: crate::exterior::DEFAULT_FD_STEP,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// The flat connection `ω = 0`.
    pub fn flat(chart: Arc<Chart>, rank: usize) -> Self {
        let n = chart.dim();
        Self::new(chart, rank, move |_| vec![0.0; rank * rank * n])
            .with_derivative(move |_| vec![0.0; rank * rank * n * n])
    }

    /// Rank-2 connection `ω₁₂ = −ω₂₁ = Σ cₐ duᵃ`, with optional analytic
    /// `∂_b c_a` (row-major `a·n + b`).
    pub fn so2(
        chart: Arc<Chart>,
        one_form: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        derivative: Option<Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
    ) -> Self {
        let n = chart.dim();
        let mut conn = Self::new(chart, 2, move |x| {
            let c = one_form(x);
            let mut out = vec![0.0; 4 * n];
            for a in 0..n {
                out[n + a] = c[a];
                out[2 * n + a] = -c[a];
            }
            out
        });
        if let Some(d) = derivative {
            conn = conn.with_derivative(move |x| {
                let dc = d(x);
                let mut out = vec![0.0; 4 * n * n];
                for k in 0..n * n {
                    out[n * n + k] = dc[k];
                    out[2 * n * n + k] = -dc[k];
                }
                out
            });
        }
        conn
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        (self.coeffs)(x)
    }

    /// `∂_b ω_ij,a`, analytic when available.
    pub fn derivative_coefficients(&self, x: &[f64]) -> Vec<f64> {
        match &self.derivative {
            Some(d) => d(x),
            None => self.fd_derivative_coefficients(x),
        }
    }

    pub fn fd_derivative_coefficients(&self, x: &[f64]) -> Vec<f64> {
        let n = self.base_dim();
        let m = self.rank * self.rank * n;
        let h = self.fd_step;
        let mut out = vec![0.0; m * n];
        let mut y = x.to_vec();
        for b in 0..n {
            let mut at = |delta: f64| {
                y[b] = x[b] + delta;
                (self.coeffs)(&y)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
            y[b] = x[b];
            for k in 0..m {
                out[k * n + b] = (m2[k] - p2[k] + 8.0 * (p1[k] - m1[k])) / (12.0 * h);
            }
        }
        out
    }

    /// The matrix of 1-forms `ω_ij` as elements with fiber rank 0.
    pub fn omega_matrix(&self, x: &[f64]) -> Vec<GradedElement> {
        let (r, n) = (self.rank, self.base_dim());
        let c = self.coefficients(x);
        (0..r * r)
            .map(|ij| GradedElement::one_form(n, 0, &c[ij * n..(ij + 1) * n]))
            .collect()
    }

    /// `R = dω + ω ∧ ω` at `x`.
    pub fn curvature(&self, x: &[f64]) -> Result<AntisymmetricFormMatrix> {
        let margin = if self.derivative.is_some() { 0.0 } else { 2.0 * self.fd_step };
        self.chart.check_interior(x, margin)?;
        Ok(self.curvature_unchecked(x))
    }

    /// [`Self::curvature`] without the chart check (stencils, quadrature nodes).
    pub fn curvature_unchecked(&self, x: &[f64]) -> AntisymmetricFormMatrix {
        let (r, n) = (self.rank, self.base_dim());
        let omega = self.omega_matrix(x);
        let domega = self.derivative_coefficients(x);
        let mut entries = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let mut e = GradedElement::zero(n, 0);
                let base = (i * r + j) * n;
                for a in 0..n {
                    for b in a + 1..n {
                        // (∂_a ω_b − ∂_b ω_a) duᵃ ∧ duᵇ
                        let v = domega[(base + b) * n + a] - domega[(base + a) * n + b];
                        e.add_term((1 << a) | (1 << b), 0, v);
                    }
                }
                for l in 0..r {
                    e += &(&omega[i * r + l] * &omega[l * r + j]);
                }
                entries.push(e);
            }
        }
        AntisymmetricFormMatrix::from_upper(r, n, 0, |i, j| entries[i * r + j].clone())
    }

    /// `∇s` at `x` from frame components and their Jacobian (`r × n`,
    /// row-major), returned as `Σᵢ (∇s)ᵢ ∧ eᵢ`.
    pub fn covariant_derivative_from(&self, x: &[f64], s: &[f64], ds: &[f64]) -> GradedElement {
        let (r, n) = (self.rank, self.base_dim());
        let c = self.coefficients(x);
        let mut out = GradedElement::zero(n, r);
        for i in 0..r {
            for a in 0..n {
                let mut v = ds[i * n + a];
                for j in 0..r {
                    v += c[(i * r + j) * n + a] * s[j];
                }
                out.add_term(1 << a, 1 << i, v);
            }
        }
        out
    }

    /// `m*ω` on the source chart of `m`.
    pub fn pullback(&self, m: &SmoothMap) -> Result<LocalConnection> {
        if m.target().name != self.chart.name {
            return Err(GbcError::ChartMismatch {
                expected: self.chart.name.clone(),
                found: m.target().name.clone(),
            });
        }
        let (r, n, k) = (self.rank, self.base_dim(), m.source().dim());
        let this = self.clone();
        let map = m.clone();
        Ok(LocalConnection::new(m.source().clone(), r, move |q| {
            let x = map.apply(q);
            let c = this.coefficients(&x);
            let jac = map.jacobian(q);
            let mut out = vec![0.0; r * r * k];
            for ij in 0..r * r {
                for a in 0..k {
                    out[ij * k + a] = (0..n).map(|b| c[ij * n + b] * jac[b * k + a]).sum();
                }
            }
            out
        })
        .with_fd_step(self.fd_step))
    }
}

/// Frame change between two trivializations over a coordinate overlap.
#[derive(Clone)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    /// Coordinates of `to` as a function of coordinates of `from`.
    pub coord_map: SmoothMap,
    /// `g(u)`, row-major `r × r`, with `s_to = g s_from`.
    pub frame: PointMap,
    /// Overlap region in `from` coordinates used for sampled checks.
    pub overlap: (Vec<f64>, Vec<f64>),
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transition({} -> {})", self.from, self.to)
    }
}

/// `(π: E → X, h^E, ∇^E)` as local connection matrices plus transitions.
#[derive(Clone, Debug)]
pub struct BundleWithConnection {
    pub name: String,
    pub base: BaseManifold,
    rank: usize,
    locals: Vec<LocalConnection>,
    transitions: Vec<Transition>,
}

impl BundleWithConnection {
    pub fn new(
        name: impl Into<String>,
        base: BaseManifold,
        rank: usize,
        locals: Vec<LocalConnection>,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        if locals.is_empty() {
            return Err(GbcError::InvalidParameter("bundle without charts".into()));
        }
        if locals.iter().any(|l| l.rank != rank) {
            return Err(GbcError::Dimension("local connection rank".into()));
        }
        for t in &transitions {
            if t.from >= locals.len() || t.to >= locals.len() {
                return Err(GbcError::InvalidParameter("transition chart index".into()));
            }
        }
        Ok(Self {
            name: name.into(),
            base,
            rank,
            locals,
            transitions,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_dim(&self) -> usize {
        self.locals[0].base_dim()
    }

    pub fn locals(&self) -> &[LocalConnection] {
        &self.locals
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn chart_index(&self, name: &str) -> Result<usize> {
        self.locals
            .iter()
            .position(|l| l.chart.name == name)
            .ok_or_else(|| GbcError::UnknownFixture(format!("chart `{name}` of bundle `{}`", self.name)))
    }

    pub fn local(&self, chart: usize) -> &LocalConnection {
        &self.locals[chart]
    }

    /// `R = dω + ω∧ω` on `chart` at `p`.
    pub fn curvature(&self, chart: usize, p: &[f64]) -> Result<AntisymmetricFormMatrix> {
        self.locals[chart].curvature(p)
    }

    /// `(ds)ᵢ + Σⱼ ωᵢⱼ sⱼ` as `Σᵢ (∇s)ᵢ ∧ eᵢ`.
    pub fn covariant_derivative(&self, s: &SectionField, chart: usize, p: &[f64]) -> Result<GradedElement> {
        let local = s.local(chart)?;
        let margin = if local.has_analytic_jacobian() { 0.0 } else { 2.0 * local.fd_step() };
        self.locals[chart].chart.check_interior(p, margin)?;
        let comps = local.components(p);
        let jac = local.jacobian(p);
        Ok(self.locals[chart].covariant_derivative_from(p, &comps, &jac))
    }

    /// Max residual of `ω_to = g ω_from g⁻¹ − (dg) g⁻¹` over `samples`
    /// points per transition, with `dg` by central differences.
    pub fn transition_residual(&self, samples: usize, seed: u64) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for t in &self.transitions {
            let from = &self.locals[t.from];
            let to = &self.locals[t.to];
            let n = from.base_dim();
            for x in sample_box(&t.overlap.0, &t.overlap.1, samples, seed) {
                let g = (t.frame)(&x);
                let gt = transpose(&g, r);
                let wf = from.coefficients(&x);
                let y = t.coord_map.apply(&x);
                let jac = t.coord_map.jacobian(&x);
                let wt_native = to.coefficients(&y);
                let m = to.base_dim();
                let h = 1e-5;
                for a in 0..n {
                    // pulled-back ω_to along the coordinate map, a-component
                    let mut wt = vec![0.0; r * r];
                    for ij in 0..r * r {
                        wt[ij] = (0..m).map(|b| wt_native[ij * m + b] * jac[b * n + a]).sum();
                    }
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[a] += h;
                    xm[a] -= h;
                    let (gp, gm) = ((t.frame)(&xp), (t.frame)(&xm));
                    let dg: Vec<f64> = gp.iter().zip(&gm).map(|(p, q)| (p - q) / (2.0 * h)).collect();
                    let wa: Vec<f64> = (0..r * r).map(|ij| wf[ij * n + a]).collect();
                    let expected = sub(&matmul(&matmul(&g, &wa, r), &gt, r), &matmul(&dg, &gt, r));
                    for ij in 0..r * r {
                        worst = worst.max((expected[ij] - wt[ij]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Max of `‖gᵀg − 1‖` and `|det g − 1|` over sampled overlap points.
    pub fn frame_orthogonality_residual(&self, samples: usize, seed: u64) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for t in &self.transitions {
            for x in sample_box(&t.overlap.0, &t.overlap.1, samples, seed) {
                let g = (t.frame)(&x);
                let gtg = matmul(&transpose(&g, r), &g, r);
                for i in 0..r {
                    for j in 0..r {
                        let id = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((gtg[i * r + j] - id).abs());
                    }
                }
                worst = worst.max((determinant(&g, r) - 1.0).abs());
            }
        }
        worst
    }

    /// Max residual of `R_to = g R_from g⁻¹` on overlaps (identity coordinate maps).
    pub fn curvature_covariance_residual(&self, samples: usize, seed: u64) -> Result<f64> {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for t in &self.transitions {
            for x in sample_box(&t.overlap.0, &t.overlap.1, samples, seed) {
                let y = t.coord_map.apply(&x);
                let rf = self.locals[t.from].curvature(&x)?;
                let rt = self.locals[t.to].curvature(&y)?;
                let jac = t.coord_map.jacobian(&x);
                let n = self.locals[t.from].base_dim();
                let g = (t.frame)(&x);
                for i in 0..r {
                    for j in 0..r {
                        let mut expected = GradedElement::zero(n, 0);
                        for k in 0..r {
                            for l in 0..r {
                                let w = g[i * r + k] * g[j * r + l];
                                if w != 0.0 {
                                    expected += &(rf.get(k, l).clone() * w);
                                }
                            }
                        }
                        let pulled = crate::exterior::pullback_element(rt.get(i, j), &jac, n);
                        worst = worst.max(expected.distance(&pulled));
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Max residual of `dR + ω∧R − R∧ω` at sampled points of every chart.
    pub fn bianchi_residual(&self, samples: usize, seed: u64, h: f64) -> Result<f64> {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for local in &self.locals {
            let chart = local.chart.clone();
            let (lo, hi) = shrunken_box(&chart, 0.1);
            for x in sample_box(&lo, &hi, samples, seed) {
                let n = chart.dim();
                let omega = local.omega_matrix(&x);
                let rx = local.curvature(&x)?;
                for i in 0..r {
                    for j in 0..r {
                        // d R_ij by central differences of the curvature entries
                        let mut d = GradedElement::zero(n, 0);
                        for a in 0..n {
                            let mut xp = x.clone();
                            let mut xm = x.clone();
                            xp[a] += h;
                            xm[a] -= h;
                            let diff = local.curvature(&xp)?.get(i, j).clone() - local.curvature(&xm)?.get(i, j).clone();
                            d += &(&GradedElement::dx(n, 0, a) * &(diff * (0.5 / h)));
                        }
                        for l in 0..r {
                            d += &(&omega[i * r + l] * rx.get(l, j));
                            d -= &(rx.get(i, l) * &omega[l * r + j]);
                        }
                        worst = worst.max(d.max_abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Bundle over `m.source()` with connection `m*ω` of the chart `m` lands in.
    pub fn pullback_bundle(&self, m: &SmoothMap) -> Result<BundleWithConnection> {
        let idx = self.chart_index(&m.target().name)?;
        let local = self.locals[idx].pullback(m)?;
        BundleWithConnection::new(
            format!("{}*{}", m.source().name, self.name),
            BaseManifold::Patch(m.source().dim()),
            self.rank,
            vec![local],
            Vec::new(),
        )
    }
}

pub(crate) fn matmul(a: &[f64], b: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = (0..r).map(|k| a[i * r + k] * b[k * r + j]).sum();
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], r: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            out[j * r + i] = a[i * r + j];
        }
    }
    out
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(a: &[f64], r: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for c in 0..r {
        let pivot = (c..r).max_by(|&i, &j| m[i * r + c].abs().total_cmp(&m[j * r + c].abs())).unwrap();
        if m[pivot * r + c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            for k in 0..r {
                m.swap(c * r + k, pivot * r + k);
            }
            det = -det;
        }
        det *= m[c * r + c];
        for i in c + 1..r {
            let f = m[i * r + c] / m[c * r + c];
            for k in c..r {
                m[i * r + k] -= f * m[c * r + k];
            }
        }
    }
    det
}

/// `count` deterministic pseudo-random points in a box.
pub fn sample_box(lower: &[f64], upper: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| lower.iter().zip(upper).map(|(&l, &u)| rng.gen_range(l..u)).collect())
        .collect()
}

/// The chart box with a relative inset, clipping infinite and periodic axes.
pub fn shrunken_box(chart: &Chart, inset: f64) -> (Vec<f64>, Vec<f64>) {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for a in 0..chart.dim() {
        let (mut l, mut u) = (chart.lower[a], chart.upper[a]);
        if let Some(p) = chart.periods[a] {
            l = l.max(0.0);
            u = u.min(p);
        }
        if !l.is_finite() {
            l = -3.0;
        }
        if !u.is_finite() {
            u = 3.0;
        }
        let w = u - l;
        lo.push(l + inset * w);
        hi.push(u - inset * w);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_connection_has_zero_curvature() {
        let b = builtin("trivial", &BuiltinParams { rank: 2, base: "t2".into(), ..Default::default() }).unwrap();
        let r = b.curvature(0, &[0.3, 1.2]).unwrap();
        assert!(r.entries().iter().all(|e| e.is_zero(0.0)));
    }

    #[test]
    fn monopole_curvature_matches_analytic() {
        for m in [1, 2, 3] {
            let b = builtin("monopole", &BuiltinParams { charge: m, ..Default::default() }).unwrap();
            let north = b.chart_index("north").unwrap();
            for &th in &[0.2, 1.0, 2.0] {
                let r = b.curvature(north, &[th, 0.7]).unwrap();
                let expected = 0.5 * m as f64 * f64::sin(th);
                assert!((r.get(0, 1).get(0b11, 0) - expected).abs() < 1e-12);
                // the same through finite differences of ω
                let fd = LocalConnection::new(b.local(north).chart().clone(), 2, {
                    let l = b.local(north).clone();
                    move |x| l.coefficients(x)
                });
                let rfd = fd.curvature(&[th, 0.7]).unwrap();
                assert!((rfd.get(0, 1).get(0b11, 0) - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tangent_curvature_is_area_form() {
        let b = builtin("tangent_s2", &BuiltinParams::default()).unwrap();
        for chart in 0..b.locals().len() {
            let th = match b.local(chart).chart().name.as_str() {
                "south" => 2.0,
                _ => 1.0,
            };
            let r = b.curvature(chart, &[th, -0.4]).unwrap();
            assert!((r.get(0, 1).get(0b11, 0) - th.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn transitions_are_compatible() {
        for name in ["monopole", "tangent_s2"] {
            let b = builtin(name, &BuiltinParams { charge: 1, ..Default::default() }).unwrap();
            assert!(b.transition_residual(20, 7) < 1e-8, "{name}");
            assert!(b.frame_orthogonality_residual(20, 7) < 1e-10, "{name}");
            assert!(b.curvature_covariance_residual(20, 7).unwrap() < 1e-6, "{name}");
            assert!(b.bianchi_residual(10, 3, 1e-4).unwrap() < 1e-6, "{name}");
        }
    }

    #[test]
    fn monopole_gauge_difference_on_equator_band() {
        let m = 1;
        let b = builtin("monopole", &BuiltinParams { charge: m, ..Default::default() }).unwrap();
        let (n, s) = (b.chart_index("north").unwrap(), b.chart_index("south").unwrap());
        for x in sample_box(&[PI / 4.0 + 0.01, 0.0], &[3.0 * PI / 4.0 - 0.01, 2.0 * PI], 25, 1) {
            let wn = b.local(n).coefficients(&x);
            let ws = b.local(s).coefficients(&x);
            // ω_S − ω_N = −m dφ in the (1,2) slot
            assert!((ws[3] - wn[3] + m as f64).abs() < 1e-12);
            assert!((ws[2] - wn[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_along_identity_and_constant() {
        let b = builtin("monopole", &BuiltinParams { charge: 2, ..Default::default() }).unwrap();
        let north = b.local(0).chart().clone();
        let id = SmoothMap::identity(north.clone());
        let pb = b.pullback_bundle(&id).unwrap();
        let p = [0.8, 1.9];
        assert!(pb.curvature(0, &p).unwrap().distance(&b.curvature(0, &p).unwrap()) < 1e-7);

        let constant = SmoothMap::new(north.clone(), north, |_| vec![1.0, 1.0]);
        let flat = b.pullback_bundle(&constant).unwrap();
        assert!(flat.curvature(0, &p).unwrap().entries().iter().all(|e| e.is_zero(1e-9)));
    }

    #[test]
    fn curvature_commutes_with_pullback() {
        let b = builtin("tangent_s2", &BuiltinParams::default()).unwrap();
        let sphere = b.local(b.chart_index("sphere").unwrap()).chart().clone();
        let src = Arc::new(Chart::new("patch", vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
        let m = SmoothMap::new(src, sphere, |q| vec![1.4 + 0.3 * q[0] * q[1], 0.5 * q[0] - q[1] * q[1]]);
        let pb = b.pullback_bundle(&m).unwrap();
        let idx = b.chart_index("sphere").unwrap();
        for q in sample_box(&[-0.8, -0.8], &[0.8, 0.8], 10, 5) {
            let direct = pb.curvature(0, &q).unwrap();
            let pulled = b.curvature(idx, &m.apply(&q)).unwrap();
            let jac = m.jacobian(&q);
            let diff = direct.get(0, 1).distance(&crate::exterior::pullback_element(pulled.get(0, 1), &jac, 2));
            assert!(diff < 1e-6, "{diff}");
        }
    }
}
