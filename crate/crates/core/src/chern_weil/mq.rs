use std::sync::Arc;

use crate::berezin::{berezin_integral, exp_even, AntisymmetricFormMatrix};
use crate::bundle::{BundleWithConnection, LocalConnection, LocalSection, SectionField, TotalSpace};
use crate::error::{GbcError, Result};
use crate::exterior::{Chart, GradedElement};

use super::gaussian_moment;

/// The Mathai–Quillen element `Ω_{t,v} = t²‖v‖²/2 + t ∇v − π*R` of a
/// connection and a section over one chart.
///
/// `∇v` enters as `Σᵢ eᵢ ∧ (∇v)ᵢ` and `π*R` as `−½ Σᵢⱼ Rᵢⱼ eᵢ ∧ eⱼ`, so that
/// `T(exp π*R) = Pf(R)`. Without a section the element is `−π*R`.
#[derive(Clone, Debug)]
pub struct MQElementField {
    connection: LocalConnection,
    section: Option<LocalSection>,
    t: f64,
}

impl MQElementField {
    pub fn new(connection: LocalConnection, section: Option<LocalSection>, t: f64) -> Result<Self> {
        if let Some(s) = &section {
            if s.rank() != connection.rank() || s.base_dim() != connection.base_dim() {
                return Err(GbcError::Dimension(format!(
                    "section of rank {} over dim {} for connection of rank {} over dim {}",
                    s.rank(),
                    s.base_dim(),
                    connection.rank(),
                    connection.base_dim()
                )));
            }
        }
        Ok(Self { connection, section, t })
    }

    /// `Ω_t` on the total space, built from the tautological section.
    pub fn on_total_space(total: &TotalSpace, t: f64) -> Self {
        let x = crate::bundle::tautological_section(total);
        Self {
            connection: total.connection.clone(),
            section: x.local(0).ok().cloned(),
            t,
        }
    }

    /// `Ω_{t,v}` on base chart `chart`.
    pub fn for_section(bundle: &BundleWithConnection, v: &SectionField, chart: usize, t: f64) -> Result<Self> {
        Self::new(bundle.local(chart).clone(), Some(v.local(chart)?.clone()), t)
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.connection.chart()
    }

    pub fn connection(&self) -> &LocalConnection {
        &self.connection
    }

    pub fn section(&self) -> Option<&LocalSection> {
        self.section.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.connection.rank()
    }

    pub fn form_dim(&self) -> usize {
        self.connection.base_dim()
    }

    /// `‖v‖²` (0 without a section).
    pub fn width(&self, x: &[f64]) -> f64 {
        self.section
            .as_ref()
            .map_or(0.0, |s| s.components(x).iter().map(|c| c * c).sum())
    }

    /// `Σᵢ vᵢ eᵢ`.
    pub fn front(&self, x: &[f64]) -> GradedElement {
        let (p, r) = (self.form_dim(), self.rank());
        let mut out = GradedElement::zero(p, r);
        if let Some(s) = &self.section {
            for (i, c) in s.components(x).into_iter().enumerate() {
                out.add_term(0, 1 << i, c);
            }
        }
        out
    }

    /// `Σᵢ eᵢ ∧ (∇v)ᵢ`.
    pub fn nabla(&self, x: &[f64]) -> GradedElement {
        match &self.section {
            Some(s) => -self.connection.covariant_derivative_from(x, &s.components(x), &s.jacobian(x)),
            None => GradedElement::zero(self.form_dim(), self.rank()),
        }
    }

    /// `π*R = −½ Σᵢⱼ Rᵢⱼ eᵢ ∧ eⱼ`.
    pub fn pulled_curvature(&self, x: &[f64]) -> GradedElement {
        curvature_element(&self.connection.curvature_unchecked(x), self.form_dim())
    }

    /// `Ω_t` at `x`.
    pub fn eval(&self, x: &[f64]) -> GradedElement {
        let (p, r, t) = (self.form_dim(), self.rank(), self.t);
        GradedElement::scalar(p, r, 0.5 * t * t * self.width(x)) + self.nabla(x) * t - self.pulled_curvature(x)
    }

    /// `T(v ∧ e^{−Ω_t})`.
    pub fn transgression_integrand(&self, x: &[f64]) -> Result<GradedElement> {
        let e = exp_even(&-self.eval(x))?;
        Ok(berezin_integral(&(&self.front(x) * &e)))
    }
}

/// `−½ Σᵢⱼ Rᵢⱼ eᵢ ∧ eⱼ` for a curvature matrix of forms over `form_dim` generators.
pub fn curvature_element(curv: &AntisymmetricFormMatrix, form_dim: usize) -> GradedElement {
    let r = curv.size();
    let mut out = GradedElement::zero(form_dim, r);
    for i in 0..r {
        for j in i + 1..r {
            let rij = curv.get(i, j).widened(form_dim, r);
            out -= &(&rij * &GradedElement::monomial(form_dim, r, 0, (1 << i) | (1 << j), 1.0));
        }
    }
    out
}

/// `v ∧ e^{−Ω_t} = e^{−t²a/2} Σ_m t^m c_m` with `a = ‖v‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct TPolynomial {
    pub terms: Vec<(u32, GradedElement)>,
    pub width: f64,
}

impl TPolynomial {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| *m).max()
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> Option<GradedElement> {
        let mut it = self.terms.iter();
        let (m0, c0) = it.next()?;
        let mut out = c0.clone() * t.powi(*m0 as i32);
        for (m, c) in it {
            out += &(c.clone() * t.powi(*m as i32));
        }
        Some(out * (-0.5 * t * t * self.width).exp())
    }

    /// Berezin integral of each coefficient, dropping terms that vanish.
    pub fn berezin(&self) -> Vec<(u32, GradedElement)> {
        self.terms
            .iter()
            .map(|(m, c)| (*m, berezin_integral(c)))
            .filter(|(_, c)| !c.is_empty())
            .collect()
    }

    /// `∫₀^upper T(v ∧ e^{−Ω_t}) dt`; `None` for an empty polynomial.
    pub fn integrate(&self, upper: f64) -> Result<Option<GradedElement>> {
        let mut out: Option<GradedElement> = None;
        for (m, c) in self.berezin() {
            let w = gaussian_moment(m, self.width, upper)?;
            let term = c * w;
            match &mut out {
                Some(o) => *o += &term,
                None => out = Some(term),
            }
        }
        Ok(out)
    }
}

/// Expands `v ∧ exp(−t∇v) ∧ exp(π*R)` by powers of `t`.
pub fn collect_t_polynomial(field: &MQElementField, x: &[f64]) -> Result<TPolynomial> {
    let front = field.front(x);
    let width = field.width(x);
    if front.is_empty() {
        return Ok(TPolynomial { terms: Vec::new(), width });
    }
    let curv = exp_even(&field.pulled_curvature(x))?;
    let base = &front * &curv;
    let neg_nabla = -field.nabla(x);
    let mut terms = Vec::new();
    let mut power = GradedElement::scalar(field.form_dim(), field.rank(), 1.0);
    let mut m = 0u32;
    loop {
        let c = &base * &power;
        if !c.is_empty() {
            terms.push((m, c));
        }
        m += 1;
        power = &power * &neg_nabla * (1.0 / m as f64);
        if power.is_empty() {
            break;
        }
    }
    Ok(TPolynomial { terms, width })
}
