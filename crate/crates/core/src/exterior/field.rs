//! Charts, form fields, smooth maps, exterior derivative and pullback.

use std::fmt;
use std::sync::Arc;

use super::element::GradedElement;
use crate::error::{GbcError, Result};

/// Default finite-difference step (chart units).
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Agreement expected between analytic and finite-difference derivatives.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;

/// An open coordinate box in ℝⁿ with an orientation sign.
///
/// A coordinate may carry a period; points differing by a multiple of it
/// describe the same point of the manifold (used when matching chain faces).
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub orientation: i8,
    pub periods: Vec<Option<f64>>,
    /// Coordinate hyperplanes `x[axis] = value` along which the listed axes
    /// stop mattering (e.g. `θ = 0` on polar coordinates, where φ is free).
    pub collapsed: Vec<(usize, f64, Vec<usize>)>,
}

impl Chart {
    pub fn new(name: impl Into<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(GbcError::InvalidParameter(format!("empty coordinate box for chart `{name}`")));
        }
        let periods = vec![None; lower.len()];
        Ok(Self {
            name,
            lower,
            upper,
            orientation: 1,
            periods,
            collapsed: Vec::new(),
        })
    }

    /// The whole of ℝⁿ (used for fibers and test charts).
    pub fn euclidean(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            orientation: 1,
            periods: vec![None; dim],
            collapsed: Vec::new(),
        }
    }

    pub fn with_orientation(mut self, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        self.orientation = sign;
        self
    }

    pub fn with_period(mut self, axis: usize, period: f64) -> Self {
        self.periods[axis] = Some(period);
        self
    }

    pub fn with_collapsed(mut self, axis: usize, value: f64, ignored: Vec<usize>) -> Self {
        self.collapsed.push((axis, value, ignored));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Distance from `point` to the boundary of the box (negative outside).
    pub fn clearance(&self, point: &[f64]) -> f64 {
        point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| (x - l).min(u - x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_interior(&self, point: &[f64], margin: f64) -> Result<()> {
        if point.len() != self.dim() {
            return Err(GbcError::Dimension(format!(
                "point of dimension {} in chart `{}` of dimension {}",
                point.len(),
                self.name,
                self.dim()
            )));
        }
        if self.clearance(point) < margin {
            return Err(GbcError::ChartBoundary {
                chart: self.name.clone(),
                point: point.to_vec(),
                margin,
            });
        }
        Ok(())
    }

    /// Whether two coordinate points agree modulo the chart periods.
    pub fn same_point(&self, a: &[f64], b: &[f64], tol: f64) -> bool {
        let ignored: Vec<usize> = self
            .collapsed
            .iter()
            .filter(|(axis, v, _)| (a[*axis] - v).abs() <= tol && (b[*axis] - v).abs() <= tol)
            .flat_map(|(_, _, ig)| ig.iter().copied())
            .collect();
        a.iter().zip(b).zip(&self.periods).enumerate().all(|(i, ((&x, &y), p))| {
            if ignored.contains(&i) {
                return true;
            }
            let diff = x - y;
            match p {
                Some(period) => {
                    let r = diff - period * (diff / period).round();
                    r.abs() <= tol
                }
                None => diff.abs() <= tol,
            }
        })
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> GradedElement + Send + Sync>;

/// A smooth assignment of [`GradedElement`] values to the points of a chart.
///
/// Evaluators are pure; clones share them.
#[derive(Clone)]
pub struct FormField {
    chart: Arc<Chart>,
    fiber_rank: usize,
    degree: usize,
    eval: Evaluator,
    derivative: Option<Evaluator>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormField")
            .field("chart", &self.chart.name)
            .field("fiber_rank", &self.fiber_rank)
            .field("degree", &self.degree)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl FormField {
    pub fn new(
        chart: Arc<Chart>,
        fiber_rank: usize,
        degree: usize,
        eval: impl Fn(&[f64]) -> GradedElement + Send + Sync + 'static,
    ) -> Self {
        Self {
            chart,
            fiber_rank,
            degree,
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    /// Attaches an analytic exterior derivative.
    pub fn with_derivative(
        mut self,
        derivative: impl Fn(&[f64]) -> GradedElement + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn zero(chart: Arc<Chart>, fiber_rank: usize, degree: usize) -> Self {
        let p = chart.dim();
        Self::new(chart, fiber_rank, degree, move |_| GradedElement::zero(p, fiber_rank))
            .with_derivative(move |_| GradedElement::zero(p, fiber_rank))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn form_dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn fiber_rank(&self) -> usize {
        self.fiber_rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Evaluates at a point of the chart.
    pub fn eval(&self, point: &[f64]) -> Result<GradedElement> {
        self.chart.check_interior(point, 0.0)?;
        Ok((self.eval)(point))
    }

    /// Evaluates without the interior check (quadrature nodes, stencils).
    pub fn eval_unchecked(&self, point: &[f64]) -> GradedElement {
        (self.eval)(point)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }

    /// Same evaluator on a renamed chart with identical coordinates.
    pub fn on_chart(&self, chart: Arc<Chart>) -> Self {
        assert_eq!(chart.dim(), self.chart.dim());
        Self {
            chart,
            ..self.clone()
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let eval = self.eval.clone();
        let derivative = self.derivative.clone();
        Self {
            chart: self.chart.clone(),
            fiber_rank: self.fiber_rank,
            degree: self.degree,
            eval: Arc::new(move |x| eval(x) * factor),
            derivative: derivative.map(|d| Arc::new(move |x: &[f64]| d(x) * factor) as Evaluator),
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.chart.name != other.chart.name {
            return Err(GbcError::ChartMismatch {
                expected: self.chart.name.clone(),
                found: other.chart.name.clone(),
            });
        }
        if self.fiber_rank != other.fiber_rank {
            return Err(GbcError::Dimension("fiber rank of summands".into()));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let derivative = match (&self.derivative, &other.derivative) {
            (Some(da), Some(db)) => {
                let (da, db) = (da.clone(), db.clone());
                Some(Arc::new(move |x: &[f64]| da(x) + db(x) * sign) as Evaluator)
            }
            _ => None,
        };
        Ok(Self {
            chart: self.chart.clone(),
            fiber_rank: self.fiber_rank,
            degree: self.degree.max(other.degree),
            eval: Arc::new(move |x| a(x) + b(x) * sign),
            derivative,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Pointwise wedge product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.chart.name != other.chart.name {
            return Err(GbcError::ChartMismatch {
                expected: self.chart.name.clone(),
                found: other.chart.name.clone(),
            });
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(Self {
            chart: self.chart.clone(),
            fiber_rank: self.fiber_rank,
            degree: self.degree + other.degree,
            eval: Arc::new(move |x| &a(x) * &b(x)),
            derivative: None,
        })
    }

    /// The field `d f`, by the analytic derivative when present and
    /// fourth-order central differences with step `h` otherwise.
    pub fn d(&self, h: f64) -> Self {
        let this = self.clone();
        Self {
            chart: self.chart.clone(),
            fiber_rank: self.fiber_rank,
            degree: self.degree + 1,
            eval: Arc::new(move |x| match &this.derivative {
                Some(d) => d(x),
                None => fd_derivative(&this.eval, this.form_dim(), this.fiber_rank, x, h),
            }),
            derivative: None,
        }
    }
}

/// `Σ_a dxᵃ ∧ ∂_a f` with fourth-order central differences.
pub(crate) fn fd_derivative(
    eval: &Evaluator,
    form_dim: usize,
    fiber_rank: usize,
    x: &[f64],
    h: f64,
) -> GradedElement {
    let mut out = GradedElement::zero(form_dim, fiber_rank);
    let mut shifted = x.to_vec();
    for a in 0..form_dim {
        let mut sample = |delta: f64| {
            shifted[a] = x[a] + delta;
            eval(&shifted)
        };
        let partial = (sample(-2.0 * h) - sample(2.0 * h)) * (1.0 / (12.0 * h))
            + (sample(h) - sample(-h)) * (8.0 / (12.0 * h));
        shifted[a] = x[a];
        let dxa = GradedElement::dx(form_dim, fiber_rank, a);
        out += &(&dxa * &partial);
    }
    out
}

/// Exterior derivative of `f` at `point`.
///
/// Uses the analytic derivative when `f` carries one; otherwise central
/// differences, which need a clearance of `2h` from the chart boundary.
pub fn exterior_derivative(f: &FormField, point: &[f64], h: f64) -> Result<GradedElement> {
    if let Some(d) = &f.derivative {
        f.chart.check_interior(point, 0.0)?;
        return Ok(d(point));
    }
    fd_exterior_derivative(f, point, h)
}

/// Finite-difference `d`, ignoring any analytic derivative (cross-checks).
pub fn fd_exterior_derivative(f: &FormField, point: &[f64], h: f64) -> Result<GradedElement> {
    f.chart.check_interior(point, 2.0 * h)?;
    Ok(fd_derivative(&f.eval, f.form_dim(), f.fiber_rank, point, h))
}

pub type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth map between charts with a Jacobian (row-major, target × source).
#[derive(Clone)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    map: PointMap,
    jacobian: Option<PointMap>,
    fd_step: f64,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.source.name, self.target.name)
    }
}

impl SmoothMap {
    pub fn new(
        source: Arc<Chart>,
        target: Arc<Chart>,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            source,
            target,
            map: Arc::new(map),
            jacobian: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let n = chart.dim();
        Self::new(chart.clone(), chart, |x| x.to_vec()).with_jacobian(move |_| identity_matrix(n))
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => self.fd_jacobian(x),
        }
    }

    /// Central-difference Jacobian (fourth order).
    pub fn fd_jacobian(&self, x: &[f64]) -> Vec<f64> {
        let (n, m) = (self.source.dim(), self.target.dim());
        let h = self.fd_step;
        let mut jac = vec![0.0; m * n];
        let mut y = x.to_vec();
        for a in 0..n {
            let mut at = |delta: f64| {
                y[a] = x[a] + delta;
                (self.map)(&y)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
            y[a] = x[a];
            for i in 0..m {
                jac[i * n + a] = (m2[i] - p2[i] + 8.0 * (p1[i] - m1[i])) / (12.0 * h);
            }
        }
        jac
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SmoothMap) -> Result<SmoothMap> {
        if self.target.name != other.source.name {
            return Err(GbcError::ChartMismatch {
                expected: other.source.name.clone(),
                found: self.target.name.clone(),
            });
        }
        let (f, g) = (self.clone(), other.clone());
        let (f2, g2) = (self.clone(), other.clone());
        let (n, k, m) = (self.source.dim(), self.target.dim(), other.target.dim());
        Ok(SmoothMap::new(self.source.clone(), other.target.clone(), move |x| g.apply(&f.apply(x)))
            .with_jacobian(move |x| {
                let y = f2.apply(x);
                let jf = f2.jacobian(x);
                let jg = g2.jacobian(&y);
                let mut out = vec![0.0; m * n];
                for i in 0..m {
                    for a in 0..n {
                        out[i * n + a] = (0..k).map(|j| jg[i * k + j] * jf[j * n + a]).sum();
                    }
                }
                out
            }))
    }
}

pub(crate) fn identity_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Pulls back every form generator of `value` through the Jacobian `jac`
/// (target × source), producing an element over `source_dim` generators.
pub fn pullback_element(value: &GradedElement, jac: &[f64], source_dim: usize) -> GradedElement {
    let target_dim = value.form_dim();
    let r = value.fiber_rank();
    debug_assert_eq!(jac.len(), target_dim * source_dim);
    let pulled: Vec<GradedElement> = (0..target_dim)
        .map(|i| GradedElement::one_form(source_dim, r, &jac[i * source_dim..(i + 1) * source_dim]))
        .collect();
    let mut out = GradedElement::zero(source_dim, r);
    for (forms, fibers, c) in value.terms() {
        let mut term = GradedElement::scalar(source_dim, r, c);
        let mut bits = forms;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            term = &term * &pulled[i];
            if term.is_empty() {
                break;
            }
            bits &= bits - 1;
        }
        if fibers != 0 && !term.is_empty() {
            term = &term * &GradedElement::monomial(source_dim, r, 0, fibers, 1.0);
        }
        out += &term;
    }
    out
}

/// `m* f`: substitutes the transposed Jacobian on the form factor and
/// leaves the fiber factor untouched.
pub fn pullback_form(m: &SmoothMap, f: &FormField) -> Result<FormField> {
    if m.target.name != f.chart.name {
        return Err(GbcError::ChartMismatch {
            expected: f.chart.name.clone(),
            found: m.target.name.clone(),
        });
    }
    let (m, eval) = (m.clone(), f.eval.clone());
    let n = m.source.dim();
    Ok(FormField::new(m.source.clone(), f.fiber_rank, f.degree, move |q| {
        let x = m.apply(q);
        pullback_element(&eval(&x), &m.jacobian(q), n)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Arc<Chart> {
        Arc::new(Chart::euclidean("plane", 2))
    }

    #[test]
    fn d_of_linear_coefficient() {
        // f = x¹ dx²
        let f = FormField::new(plane(), 0, 1, |x| GradedElement::one_form(2, 0, &[0.0, x[0]]));
        let df = exterior_derivative(&f, &[0.3, -1.2], DEFAULT_FD_STEP).unwrap();
        assert!((df.get(0b11, 0) - 1.0).abs() < 1e-9);
        assert_eq!(df.len(), 1);
    }

    #[test]
    fn d_of_constant_vanishes() {
        let f = FormField::new(plane(), 0, 0, |_| GradedElement::scalar(2, 0, 4.2));
        let df = exterior_derivative(&f, &[1.0, 2.0], DEFAULT_FD_STEP).unwrap();
        assert!(df.is_zero(1e-12));
    }

    #[test]
    fn boundary_margin_enforced() {
        let chart = Arc::new(Chart::new("box", vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let f = FormField::new(chart, 0, 0, |x| GradedElement::scalar(2, 0, x[0]));
        let err = exterior_derivative(&f, &[1e-5, 0.5], DEFAULT_FD_STEP).unwrap_err();
        assert!(matches!(err, GbcError::ChartBoundary { .. }));
    }

    #[test]
    fn polar_pullback_of_area() {
        let polar = Arc::new(Chart::new("polar", vec![0.0, -10.0], vec![10.0, 10.0]).unwrap());
        let m = SmoothMap::new(polar, plane(), |q| vec![q[0] * q[1].cos(), q[0] * q[1].sin()]);
        let area = FormField::new(plane(), 0, 2, |_| GradedElement::monomial(2, 0, 0b11, 0, 1.0));
        let pulled = pullback_form(&m, &area).unwrap();
        for &(r, th) in &[(0.5, 0.3), (2.0, -1.1), (1.3, 2.9)] {
            let v = pulled.eval(&[r, th]).unwrap();
            assert!((v.get(0b11, 0) - r).abs() < 1e-9, "{v:?}");
        }
    }

    #[test]
    fn identity_pullback_is_noop() {
        let f = FormField::new(plane(), 1, 1, |x| {
            &GradedElement::one_form(2, 1, &[x[1], x[0] * x[0]]) * &GradedElement::e(2, 1, 0)
        });
        let g = pullback_form(&SmoothMap::identity(plane()), &f).unwrap();
        let p = [0.7, -0.4];
        assert!(g.eval(&p).unwrap().approx_eq(&f.eval(&p).unwrap(), 1e-14));
    }

    #[test]
    fn constant_map_kills_positive_degree() {
        let m = SmoothMap::new(plane(), plane(), |_| vec![1.0, 2.0]);
        let f = FormField::new(plane(), 0, 1, |x| GradedElement::one_form(2, 0, &[x[0], 1.0]));
        let g = pullback_form(&m, &f).unwrap();
        assert!(g.eval(&[0.1, 0.2]).unwrap().is_zero(1e-9));
    }

    #[test]
    fn chart_mismatch() {
        let other = Arc::new(Chart::euclidean("other", 2));
        let m = SmoothMap::identity(other);
        let f = FormField::zero(plane(), 0, 1);
        assert!(matches!(pullback_form(&m, &f), Err(GbcError::ChartMismatch { .. })));
    }
}
