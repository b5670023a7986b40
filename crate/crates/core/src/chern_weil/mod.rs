//! Euler form, Mathai–Quillen Thom forms and their transgressions.

mod moments;
mod mq;

use std::f64::consts::PI;
use std::sync::Arc;

pub use moments::gaussian_moment;
pub use mq::{collect_t_polynomial, curvature_element, MQElementField, TPolynomial};

use crate::berezin::{berezin_integral, exp_even, pfaffian};
use crate::bundle::{BundleWithConnection, LocalConnection, SectionField, SphereBundle, TotalSpace};
use crate::error::{GbcError, Result};
use crate::exterior::{pullback_form, Chart, FormField, GradedElement, SmoothMap};

/// `(−1)^{k(2k+1)} / (2π)^k`.
pub fn a_const(k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign / (2.0 * PI).powi(k as i32)
}

fn half_rank(r: usize) -> Result<usize> {
    if r % 2 != 0 {
        return Err(GbcError::OddRank(r));
    }
    Ok(r / 2)
}

/// `Pf(R) / (2π)^k` for a local connection.
pub fn euler_form_local(connection: &LocalConnection) -> Result<FormField> {
    let k = half_rank(connection.rank())?;
    let c = connection.clone();
    let scale = (2.0 * PI).powi(-(k as i32));
    Ok(FormField::new(connection.chart().clone(), 0, 2 * k, move |x| {
        pfaffian(&c.curvature_unchecked(x)).expect("curvature is antisymmetric with even entries") * scale
    }))
}

/// The Euler form `χ(∇) = Pf(R)/(2π)^k` on one chart of the base.
pub fn euler_form(bundle: &BundleWithConnection, chart: usize) -> Result<FormField> {
    euler_form_local(bundle.local(chart))
}

/// `T(e^{−Ω_t}) / (2π)^k` for any Mathai–Quillen element field.
pub fn thom_form_of(field: &MQElementField) -> Result<FormField> {
    let k = half_rank(field.rank())?;
    if !(field.t() > 0.0) {
        return Err(GbcError::NonPositiveScale(field.t()));
    }
    let f = field.clone();
    let scale = (2.0 * PI).powi(-(k as i32));
    Ok(FormField::new(field.chart().clone(), 0, 2 * k, move |x| {
        berezin_integral(&exp_even(&-f.eval(x)).expect("Ω_t is even")) * scale
    }))
}

/// The Thom form `U_t` on the total-space chart.
pub fn thom_form(total: &TotalSpace, t: f64) -> Result<FormField> {
    thom_form_of(&MQElementField::on_total_space(total, t))
}

/// `T(v ∧ e^{−Ω_t})` as a form field (degree `r − 1`).
pub fn transgression_integrand(field: &MQElementField) -> Result<FormField> {
    let k = half_rank(field.rank())?;
    let f = field.clone();
    Ok(FormField::new(field.chart().clone(), 0, 2 * k - 1, move |x| {
        f.transgression_integrand(x).expect("Ω_t is even")
    }))
}

/// `a(k) ∫₀^upper T(v ∧ e^{−Ω_t}) dt` at `x`, integrated exactly in `t`.
pub fn transgression_at(field: &MQElementField, x: &[f64], upper: f64) -> Result<GradedElement> {
    let k = half_rank(field.rank())?;
    let poly = collect_t_polynomial(field, x)?;
    Ok(match poly.integrate(upper)? {
        Some(v) => v * a_const(k),
        None => GradedElement::zero(field.form_dim(), 0),
    })
}

/// [`transgression_at`] as a form field of degree `r − 1`.
pub fn transgression_form(field: &MQElementField, upper: f64) -> Result<FormField> {
    let k = half_rank(field.rank())?;
    let f = field.clone();
    Ok(FormField::new(field.chart().clone(), 0, 2 * k - 1, move |x| {
        transgression_at(&f, x, upper).expect("finite Gaussian moments")
    }))
}

/// `∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt` on base chart `chart`, whose exterior
/// derivative is `χ(∇) − v*U`.
pub fn transgression_unit_interval(bundle: &BundleWithConnection, v: &SectionField, chart: usize) -> Result<FormField> {
    transgression_form(&MQElementField::for_section(bundle, v, chart, 1.0)?, 1.0)
}

/// `∫₀^∞ a(k) T(x e^{−Ω_t}) dt` at a total-space point on the unit sphere bundle.
pub fn transgression_infinite_at(total: &TotalSpace, x: &[f64]) -> Result<GradedElement> {
    let n = total.base_dim();
    let norm = x[n..].iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(GbcError::OffSphereBundle(norm));
    }
    transgression_at(&MQElementField::on_total_space(total, 1.0), x, f64::INFINITY)
}

/// The form `Q = ∫₀^∞ a(k) T(x e^{−Ω_t}) dt` on the sphere-bundle chart, with
/// `dQ = χ(π̃*∇)`.
pub fn transgression_infinite(se: &SphereBundle) -> Result<FormField> {
    let k = half_rank(se.rank())?;
    let field = MQElementField::on_total_space(&se.total, 1.0);
    let on_total = FormField::new(se.total.chart.clone(), 0, 2 * k - 1, move |x| {
        // the inclusion lands on ‖x‖ = 1 up to rounding, where a = ‖x‖² > 0
        transgression_at(&field, x, f64::INFINITY).expect("positive Gaussian width on the sphere bundle")
    });
    pullback_form(&se.inclusion, &on_total)
}

/// A form on the total space pulled back to the open unit-ball bundle by
/// `y ↦ y / √(1 − ‖y‖²)`.
#[derive(Clone, Debug)]
pub struct BallForm {
    /// Extended by zero where `‖y‖ ≥ 1`.
    pub field: FormField,
    base_dim: usize,
}

impl BallForm {
    pub fn eval(&self, point: &[f64]) -> Result<GradedElement> {
        let norm = point[self.base_dim..].iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm >= 1.0 {
            return Err(GbcError::OutsideBall(norm));
        }
        self.field.eval(point)
    }
}

/// The fiberwise ball map from the ball chart `(u, y)`, `‖y‖ < 1`, to the
/// total-space chart.
pub fn ball_map(total: &TotalSpace) -> SmoothMap {
    let (n, r) = (total.base_dim(), total.rank());
    let base = total.base_chart();
    let mut lower = base.lower.clone();
    let mut upper = base.upper.clone();
    lower.extend(std::iter::repeat(-1.0).take(r));
    upper.extend(std::iter::repeat(1.0).take(r));
    let mut chart = Chart::new(format!("{}/B", base.name), lower, upper)
        .expect("valid box")
        .with_orientation(base.orientation);
    for (a, p) in base.periods.iter().enumerate() {
        if let Some(p) = p {
            chart = chart.with_period(a, *p);
        }
    }
    let p = n + r;
    SmoothMap::new(Arc::new(chart), total.chart.clone(), move |y| {
        let s = (1.0 - y[n..].iter().map(|c| c * c).sum::<f64>()).max(f64::MIN_POSITIVE).sqrt();
        let mut x = y.to_vec();
        for c in &mut x[n..] {
            *c /= s;
        }
        x
    })
    .with_jacobian(move |y| {
        let s2 = (1.0 - y[n..].iter().map(|c| c * c).sum::<f64>()).max(f64::MIN_POSITIVE);
        let s = s2.sqrt();
        let mut j = vec![0.0; p * p];
        for a in 0..n {
            j[a * p + a] = 1.0;
        }
        // ∂(yᵢ/s)/∂yⱼ = δᵢⱼ/s + yᵢ yⱼ / s³
        for i in n..p {
            for jj in n..p {
                j[i * p + jj] = y[i] * y[jj] / (s2 * s) + if i == jj { 1.0 / s } else { 0.0 };
            }
        }
        j
    })
}

/// Pulls `f` back along [`ball_map`]; the result vanishes towards `‖y‖ = 1`
/// when `f` decays like a Gaussian in the fiber.
pub fn compactify_to_ball(total: &TotalSpace, f: &FormField) -> Result<BallForm> {
    let map = ball_map(total);
    let pulled = pullback_form(&map, f)?;
    let n = total.base_dim();
    let (p, r) = (map.source().dim(), f.fiber_rank());
    let eval = pulled.evaluator();
    let field = FormField::new(map.source().clone(), r, f.degree(), move |y| {
        let rho2: f64 = y[n..].iter().map(|c| c * c).sum();
        if rho2 >= 1.0 - 1e-12 {
            GradedElement::zero(p, r)
        } else {
            eval(y)
        }
    });
    Ok(BallForm { field, base_dim: n })
}
