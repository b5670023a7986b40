use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use super::{grid, Cell, Chain};
use crate::error::{GbcError, Result};
use crate::exterior::{pullback_element, FormField};

pub const DEFAULT_ORDER: usize = 16;

/// Something that supplies a form field on (some) charts by name.
pub trait FormSource: Sync {
    fn degree(&self) -> usize;
    fn field_for(&self, chart: &str) -> Option<&FormField>;
}

impl FormSource for FormField {
    fn degree(&self) -> usize {
        FormField::degree(self)
    }

    fn field_for(&self, chart: &str) -> Option<&FormField> {
        (self.chart().name == chart).then_some(self)
    }
}

/// One form field per chart of an atlas.
#[derive(Clone, Debug)]
pub struct AtlasForm {
    degree: usize,
    fields: Vec<FormField>,
}

impl AtlasForm {
    pub fn new(degree: usize, fields: Vec<FormField>) -> Self {
        Self { degree, fields }
    }

    pub fn fields(&self) -> &[FormField] {
        &self.fields
    }

    pub fn map(&self, f: impl Fn(&FormField) -> FormField) -> Self {
        Self::new(self.degree, self.fields.iter().map(f).collect())
    }
}

impl FormSource for AtlasForm {
    fn degree(&self) -> usize {
        self.degree
    }

    fn field_for(&self, chart: &str) -> Option<&FormField> {
        self.fields.iter().find(|f| f.chart().name == chart)
    }
}

fn rule(order: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 {
        return Err(GbcError::InvalidParameter("quadrature order must be positive".into()));
    }
    let gl = GaussLegendre::new(order).map_err(|e| GbcError::InvalidParameter(e.to_string()))?;
    // nodes and weights moved from [−1, 1] to [0, 1]
    Ok(gl.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect())
}

/// `∫_cell f` by a tensor Gauss–Legendre rule of `order` nodes per axis.
pub fn integrate_cell(f: &FormField, cell: &Cell, order: usize) -> Result<f64> {
    if f.chart().name != cell.chart().name {
        return Err(GbcError::ChartMismatch {
            expected: f.chart().name.clone(),
            found: cell.chart().name.clone(),
        });
    }
    if f.fiber_rank() != 0 {
        return Err(GbcError::Dimension("integrand has fiber generators".into()));
    }
    let q = cell.dim();
    if q == 0 {
        let x = cell.apply(&[]);
        return Ok(f.eval(&x)?.scalar_part());
    }
    let nodes = rule(order)?;
    let ticks: Vec<f64> = nodes.iter().map(|(x, _)| *x).collect();
    let weights: Vec<f64> = nodes.iter().map(|(_, w)| *w).collect();
    let top = (1u32 << q) - 1;
    let mut total = 0.0;
    for (idx, u) in grid(q, &ticks).into_iter().enumerate() {
        let mut w = 1.0;
        let mut rest = idx;
        for _ in 0..q {
            // grid() varies the last axis fastest
            w *= weights[rest % order];
            rest /= order;
        }
        let x = cell.apply(&u);
        f.chart().check_interior(&x, 0.0)?;
        let pulled = pullback_element(&f.eval_unchecked(&x), &cell.jacobian(&u), q);
        total += w * pulled.get(top, 0);
    }
    Ok(total)
}

/// `∫_c f = Σ k · ∫_cell f` over the chain's cells.
pub fn integrate(f: &(impl FormSource + ?Sized), c: &Chain, order: usize) -> Result<f64> {
    if c.is_empty() {
        return Ok(0.0);
    }
    if f.degree() != c.dim() {
        return Err(GbcError::Dimension(format!(
            "integrating a {}-form over a {}-chain",
            f.degree(),
            c.dim()
        )));
    }
    let parts = c
        .terms()
        .par_iter()
        .map(|(k, cell)| {
            let field = f.field_for(&cell.chart().name).ok_or_else(|| GbcError::ChartMismatch {
                expected: "a chart carrying the form".into(),
                found: cell.chart().name.clone(),
            })?;
            Ok(*k as f64 * integrate_cell(field, cell, order)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{Chart, GradedElement};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn area_of_the_round_sphere() {
        let chart = Arc::new(Chart::new("polar", vec![0.0, -10.0], vec![PI, 10.0]).unwrap());
        let area = FormField::new(chart.clone(), 0, 2, |x| GradedElement::monomial(2, 0, 0b11, 0, x[0].sin()));
        let c = Chain::from(Cell::rectangle("s2", chart, vec![0.0, 0.0], vec![PI, 2.0 * PI]));
        assert!((integrate(&area, &c, 32).unwrap() - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn circle_length_and_orientation() {
        let chart = Arc::new(Chart::euclidean("angle", 1));
        let dtheta = FormField::new(chart.clone(), 0, 1, |_| GradedElement::dx(1, 0, 0));
        let c = Chain::from(Cell::rectangle("s1", chart, vec![0.0], vec![2.0 * PI]));
        assert!((integrate(&dtheta, &c, 8).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((integrate(&dtheta, &(-&c), 8).unwrap() + 2.0 * PI).abs() < 1e-13);
        let both = &c + &c;
        assert!((integrate(&dtheta, &both, 8).unwrap() - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn degree_mismatch_and_domain() {
        let chart = Arc::new(Chart::new("box", vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let one = FormField::new(chart.clone(), 0, 1, |_| GradedElement::dx(2, 0, 0));
        let sq = Chain::from(Cell::rectangle("sq", chart.clone(), vec![0.0, 0.0], vec![1.0, 1.0]));
        assert!(matches!(integrate(&one, &sq, 4), Err(GbcError::Dimension(_))));
        let outside = Chain::from(Cell::rectangle("out", chart, vec![0.5, 0.0], vec![1.5, 0.0]));
        assert!(matches!(integrate(&one, &outside, 4), Err(GbcError::ChartBoundary { .. })));
    }

    #[test]
    fn zero_chain_evaluates_functions() {
        let chart = Arc::new(Chart::euclidean("plane", 2));
        let f = FormField::new(chart.clone(), 0, 0, |x| GradedElement::scalar(2, 0, x[0] * x[1]));
        let c = Chain::from_terms(
            0,
            vec![
                (1, Cell::point("a", chart.clone(), vec![2.0, 3.0])),
                (-1, Cell::point("b", chart, vec![1.0, 1.0])),
            ],
        )
        .unwrap();
        assert_eq!(integrate(&f, &c, 4).unwrap(), 5.0);
    }
}
