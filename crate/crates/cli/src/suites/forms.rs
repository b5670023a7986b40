//! Pointwise and integral checks of the Chern–Weil and Mathai–Quillen forms.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use gbc_core::bundle::{sample_box, shrunken_box, sphere_bundle, BaseManifold, BundleWithConnection, TotalSpace, RHO_MAX};
use gbc_core::chains::library::polar_sphere;
use gbc_core::chains::{integrate, Cell, Chain};
use gbc_core::chern_weil::{
    a_const, euler_form, thom_form, thom_form_of, transgression_infinite, transgression_integrand, MQElementField,
};
use gbc_core::exterior::pullback_form;
use gbc_core::{FormField, GbcError, Result};

use super::oracles::integrate_box;
use super::{chart_points, share, Setup};
use crate::config::SuiteConfig;
use crate::report::CaseRecord;

const EULER_TOL: f64 = 1e-6;
const FIBER_TOL: f64 = 1e-5;
const TRANSGRESSION_TOL: f64 = 1e-4;
const Q_FIBER_TOL: f64 = 1e-6;
const INSET: f64 = 0.03;
const BASE_POINTS: usize = 5;

pub fn run(config: &SuiteConfig, setup: &Setup) -> Result<Vec<CaseRecord>> {
    let bundle = &setup.bundle;
    if bundle.rank() != 2 {
        return Err(GbcError::InvalidParameter(format!(
            "the form suite checks rank-2 bundles, got rank {}",
            bundle.rank()
        )));
    }
    let mut cases = Vec::new();
    if let Some(expected) = setup.euler_number() {
        if let Some(v) = euler_integral(bundle, config.quad_order)? {
            cases.push(
                CaseRecord::below("euler_integral", (v - expected).abs(), EULER_TOL)
                    .with("value", v)
                    .with("expected", expected),
            );
        }
    }
    cases.push(thom_fiber_integral(bundle, config)?);
    for t in [0.5, 1.0, 2.0] {
        cases.push(transgression_ode(bundle, config, t)?);
    }
    cases.push(q_fiber_integral(bundle, config)?);
    cases.push(q_derivative(bundle, config)?);
    Ok(cases)
}

/// `∫_X χ(∇)` over the whole base: one polar rectangle on `S²`, the period
/// box on `T²`. `None` for other bases.
pub fn euler_integral(bundle: &BundleWithConnection, order: usize) -> Result<Option<f64>> {
    let (idx, chain) = match bundle.base {
        BaseManifold::Sphere => {
            let idx = bundle.chart_index("sphere")?;
            (idx, polar_sphere(bundle.local(idx).chart()))
        }
        BaseManifold::Torus => {
            let chart = bundle.local(0).chart().clone();
            (0, Chain::from(Cell::rectangle("torus", chart, vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI])))
        }
        _ => return Ok(None),
    };
    Ok(Some(integrate(&euler_form(bundle, idx)?, &chain, order)?))
}

fn charts(bundle: &BundleWithConnection) -> Vec<usize> {
    (0..bundle.locals().len()).collect()
}

fn base_points(bundle: &BundleWithConnection, chart: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    chart_points(bundle.local(chart).chart(), count, seed)
}

/// Total-space points with fiber coordinates in `[−1.5, 1.5]`.
fn total_points(total: &TotalSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let (mut lo, mut hi) = shrunken_box(total.base_chart(), INSET);
    lo.extend([-1.5; 2]);
    hi.extend([1.5; 2]);
    sample_box(&lo, &hi, count, seed)
}

fn max_distance(a: &FormField, b: &FormField, points: &[Vec<f64>]) -> f64 {
    points
        .par_iter()
        .map(|x| a.eval_unchecked(x).distance(&b.eval_unchecked(x)))
        .reduce(|| 0.0, f64::max)
}

/// `∫_{ρ ≤ ρ_max} U` over the fiber at a few base points of every chart.
pub fn thom_fiber_integral(bundle: &Arc<BundleWithConnection>, config: &SuiteConfig) -> Result<CaseRecord> {
    let mut worst = 0.0f64;
    for chart in charts(bundle) {
        let total = TotalSpace::new(bundle.clone(), chart);
        let u = thom_form(&total, 1.0)?;
        let n = bundle.base_dim();
        let fiber = (1u32 << n) | (1u32 << (n + 1));
        for x in base_points(bundle, chart, BASE_POINTS, config.seed + chart as u64) {
            let v = integrate_box(&[0.0, 0.0], &[RHO_MAX, 2.0 * PI], config.quad_order, |q| {
                let (s, c) = q[1].sin_cos();
                let mut p = x.clone();
                p.extend([q[0] * c, q[0] * s]);
                q[0] * u.eval_unchecked(&p).get(fiber, 0)
            });
            worst = worst.max((v - 1.0).abs());
        }
    }
    Ok(CaseRecord::below("thom_fiber_integral", worst, FIBER_TOL).with("rho_max", RHO_MAX))
}

/// `∂U_t/∂t + a(k) d T(x e^{−Ω_t})` at random total-space points, with the
/// `t`-derivative by central differences.
pub fn transgression_ode(bundle: &Arc<BundleWithConnection>, config: &SuiteConfig, t: f64) -> Result<CaseRecord> {
    let h = config.fd_step;
    let per_chart = share(config.samples, bundle.locals().len());
    let mut worst = 0.0f64;
    for chart in charts(bundle) {
        let total = TotalSpace::new(bundle.clone(), chart);
        let field = MQElementField::on_total_space(&total, 1.0);
        let up = thom_form_of(&field.with_t(t + h))?;
        let down = thom_form_of(&field.with_t(t - h))?;
        let dt = up.sub(&down)?.scale(0.5 / h);
        let rhs = transgression_integrand(&field.with_t(t))?.d(h).scale(-a_const(1));
        let pts = total_points(&total, per_chart, config.seed + 100 + chart as u64);
        worst = worst.max(max_distance(&dt, &rhs, &pts));
    }
    Ok(CaseRecord::below(format!("transgression_ode_t{t}"), worst, TRANSGRESSION_TOL)
        .with("t", t)
        .with("points", per_chart * bundle.locals().len()))
}

/// `∫_{S¹} Q = 1` on the fiber circle over a few base points of every chart.
pub fn q_fiber_integral(bundle: &Arc<BundleWithConnection>, config: &SuiteConfig) -> Result<CaseRecord> {
    let mut worst = 0.0f64;
    for chart in charts(bundle) {
        let se = sphere_bundle(bundle.clone(), chart)?;
        let q = transgression_infinite(&se)?;
        let fiber = 1u32 << bundle.base_dim();
        for x in base_points(bundle, chart, BASE_POINTS, config.seed + 200 + chart as u64) {
            let v = integrate_box(&[0.0], &[2.0 * PI], config.quad_order, |psi| {
                let mut p = x.clone();
                p.push(psi[0]);
                q.eval_unchecked(&p).get(fiber, 0)
            });
            worst = worst.max((v - 1.0).abs());
        }
    }
    Ok(CaseRecord::below("q_fiber_integral", worst, Q_FIBER_TOL))
}

/// `dQ − π̃*χ(∇)` at random points of the sphere bundle.
pub fn q_derivative(bundle: &Arc<BundleWithConnection>, config: &SuiteConfig) -> Result<CaseRecord> {
    let per_chart = share(config.samples, bundle.locals().len());
    let mut worst = 0.0f64;
    for chart in charts(bundle) {
        let se = sphere_bundle(bundle.clone(), chart)?;
        let q = transgression_infinite(&se)?;
        let chi = pullback_form(&se.projection, &euler_form(bundle, chart)?)?;
        let (mut lo, mut hi) = shrunken_box(bundle.local(chart).chart(), INSET);
        lo.push(-3.0);
        hi.push(3.0);
        let pts = sample_box(&lo, &hi, per_chart, config.seed + 300 + chart as u64);
        worst = worst.max(max_distance(&q.d(config.fd_step), &chi, &pts));
    }
    Ok(CaseRecord::below("q_derivative_is_euler_form", worst, config.tol_form))
}
