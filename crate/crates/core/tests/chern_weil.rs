use std::f64::consts::PI;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use gbc_core::bundle::{
    builtin, monopole_section, rotation_section, sample_box, sphere_bundle, BuiltinParams, BundleWithConnection,
    TotalSpace,
};
use gbc_core::chern_weil::*;
use gbc_core::exterior::{exterior_derivative, pullback_form, FormField, GradedElement, SmoothMap};

const H: f64 = 1e-4;

fn bundle(name: &str, base: &str, rank: usize, charge: i32) -> Arc<BundleWithConnection> {
    Arc::new(
        builtin(
            name,
            &BuiltinParams {
                rank,
                base: base.into(),
                charge,
            },
        )
        .unwrap(),
    )
}

/// Tensor Gauss–Legendre rule on a box.
fn integrate_box(lower: &[f64], upper: &[f64], n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let rule = GaussLegendre::new(n).unwrap();
    let nodes: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    let d = lower.len();
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    let mut point = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for a in 0..d {
            let half = 0.5 * (upper[a] - lower[a]);
            let (x, wx) = nodes[idx[a]];
            point[a] = lower[a] + half * (x + 1.0);
            w *= wx * half;
        }
        total += w * f(&point);
        let mut a = 0;
        loop {
            if a == d {
                return total;
            }
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Adaptive Simpson on [a, b] (test oracle for t-integrals).
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

#[test]
fn a_const_values() {
    assert!((a_const(1) + 1.0 / (2.0 * PI)).abs() < 1e-16);
    assert!((a_const(2) - 1.0 / (4.0 * PI * PI)).abs() < 1e-16);
    assert!((a_const(3) + 1.0 / (2.0 * PI).powi(3)).abs() < 1e-16);
}

#[test]
fn gaussian_moments_match_adaptive_quadrature() {
    for m in 0..7u32 {
        for &(a, u) in &[(1.0, 1.0), (0.0, 1.0), (2.5, 3.0), (0.4, 2.0)] {
            let exact = gaussian_moment(m, a, u).unwrap();
            let f = move |t: f64| t.powi(m as i32) * (-0.5 * a * t * t).exp();
            let oracle = adaptive_simpson(&f, 0.0, u, 1e-14);
            assert!((exact - oracle).abs() < 1e-10, "m={m} a={a} u={u}: {exact} vs {oracle}");
        }
        // truncated at 16: the tail is far below 1e-10
        let exact = gaussian_moment(m, 1.0, f64::INFINITY).unwrap();
        let f = move |t: f64| t.powi(m as i32) * (-0.5 * t * t).exp();
        let oracle: f64 = (0..8).map(|i| adaptive_simpson(&f, 2.0 * i as f64, 2.0 * (i + 1) as f64, 1e-15)).sum();
        assert!((exact - oracle).abs() < 1e-10, "m={m}: {exact} vs {oracle}");
    }
}

#[test]
fn euler_form_integrals() {
    let sphere = |b: &BundleWithConnection| {
        let idx = b.chart_index("sphere").unwrap();
        let chi = euler_form(b, idx).unwrap();
        integrate_box(&[0.0, 0.0], &[PI, 2.0 * PI], 24, |x| chi.eval_unchecked(x).get(0b11, 0))
    };
    for m in [-2, 1, 3] {
        let v = sphere(&bundle("monopole", "s2", 2, m));
        assert!((v - m as f64).abs() < 1e-6, "m = {m}: {v}");
    }
    assert!((sphere(&bundle("tangent_s2", "s2", 2, 0)) - 2.0).abs() < 1e-6);
    let flat = bundle("trivial", "t2", 2, 0);
    assert!(euler_form(&flat, 0).unwrap().eval(&[0.3, 0.2]).unwrap().is_empty());
    assert!(matches!(euler_form(&bundle("trivial", "t2", 3, 0), 0), Err(gbc_core::GbcError::OddRank(3))));
}

#[test]
fn flat_thom_form_is_normalized_gaussian() {
    let total = TotalSpace::new(bundle("trivial", "t2", 2, 0), 0);
    let u = thom_form(&total, 1.0).unwrap();
    for x in [[0.1f64, 0.2, 0.0, 0.0], [0.1, 0.2, 1.0, -0.5], [1.0, -2.0, 2.5, 0.3]] {
        let rho2 = x[2] * x[2] + x[3] * x[3];
        let expected = GradedElement::monomial(4, 0, 0b1100, 0, (-0.5 * rho2).exp() / (2.0 * PI));
        assert!(u.eval(&x).unwrap().approx_eq(&expected, 1e-14), "{x:?}");
    }
    // polar fiber integral
    let v = integrate_box(&[0.0, 0.0], &[8.0, 2.0 * PI], 40, |q| {
        let (s, c) = q[1].sin_cos();
        q[0] * u.eval_unchecked(&[0.1, 0.2, q[0] * c, q[0] * s]).get(0b1100, 0)
    });
    assert!((v - 1.0).abs() < 1e-6);
    assert!(matches!(thom_form(&total, 0.0), Err(gbc_core::GbcError::NonPositiveScale(_))));
}

#[test]
fn thom_form_on_zero_section_is_euler_form() {
    let b = bundle("monopole", "s2", 2, 2);
    for chart in 0..3 {
        let total = TotalSpace::new(b.clone(), chart);
        let u = thom_form(&total, 1.0).unwrap();
        let chi = euler_form(&b, chart).unwrap();
        let x = [1.0, 0.7];
        let zero = u.eval(&[x[0], x[1], 0.0, 0.0]).unwrap();
        assert!((zero.get(0b11, 0) - chi.eval(&x).unwrap().get(0b11, 0)).abs() < 1e-10);
    }
}

#[test]
fn thom_form_decays_on_the_sphere_bundle() {
    let b = bundle("tangent_s2", "s2", 2, 0);
    let se = sphere_bundle(b, 2).unwrap();
    let u = pullback_form(&se.inclusion, &thom_form(&se.total, 20.0).unwrap()).unwrap();
    for q in sample_box(&[0.3, -3.0, -3.0], &[2.8, 3.0, 3.0], 50, 4) {
        assert!(u.eval(&q).unwrap().max_abs() < 1e-8);
    }
}

#[test]
fn t_polynomial_structure() {
    let total = TotalSpace::new(bundle("trivial", "t2", 2, 0), 0);
    let field = MQElementField::on_total_space(&total, 1.0);
    let poly = collect_t_polynomial(&field, &[0.1, 0.2, 1.0, 0.0]).unwrap();
    let powers: Vec<u32> = poly.terms.iter().map(|(m, _)| *m).collect();
    assert_eq!(powers, vec![0, 1]);
    assert_eq!(poly.width, 1.0);
    let zero = collect_t_polynomial(&field, &[0.1, 0.2, 0.0, 0.0]).unwrap();
    assert!(zero.is_empty());
    // matches the direct exponential
    let b = bundle("monopole", "s2", 2, 3);
    let total = TotalSpace::new(b, 2);
    let field = MQElementField::on_total_space(&total, 1.0);
    let x = [1.1, 0.4, 0.6, -0.9];
    let poly = collect_t_polynomial(&field, &x).unwrap();
    for t in [0.3, 1.0, 2.2] {
        let direct = &field.front(&x) * &gbc_core::berezin::exp_even(&-field.with_t(t).eval(&x)).unwrap();
        assert!(poly.eval(t).unwrap().approx_eq(&direct, 1e-12));
    }
    assert!((field.eval(&x).scalar_part() - 0.5 * (0.36 + 0.81)).abs() < 1e-15);
}

/// Max over components of `|a − b|` at sampled points.
fn residual(a: &FormField, b: &FormField, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| a.eval_unchecked(x).distance(&b.eval_unchecked(x)))
        .fold(0.0, f64::max)
}

fn total_points(total: &TotalSpace, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let base = total.base_chart();
    let mut lo: Vec<f64> = base.lower.iter().map(|v| v.max(-3.0) + 0.1).collect();
    let mut hi: Vec<f64> = base.upper.iter().map(|v| v.min(3.0) - 0.1).collect();
    lo.extend([-1.5, -1.5]);
    hi.extend([1.5, 1.5]);
    sample_box(&lo, &hi, count, seed)
}

#[test]
fn thom_form_t_derivative_is_exact() {
    for b in [bundle("monopole", "s2", 2, 2), bundle("tangent_s2", "s2", 2, 0)] {
        let total = TotalSpace::new(b, 2);
        let field = MQElementField::on_total_space(&total, 1.0);
        let pts = total_points(&total, 20, 11);
        for t in [0.5, 1.0, 2.0] {
            let up = thom_form_of(&field.with_t(t + H)).unwrap();
            let down = thom_form_of(&field.with_t(t - H)).unwrap();
            let dt = up.sub(&down).unwrap().scale(0.5 / H);
            let rhs = transgression_integrand(&field.with_t(t)).unwrap().d(H).scale(-a_const(1));
            let r = residual(&dt, &rhs, &pts);
            assert!(r < 1e-4, "t = {t}: {r}");
        }
    }
}

#[test]
fn finite_t_transgression() {
    let b = bundle("monopole", "s2", 2, 1);
    let total = TotalSpace::new(b.clone(), 0);
    let chi = pullback_form(&total.projection, &euler_form(&b, 0).unwrap()).unwrap();
    let field = MQElementField::on_total_space(&total, 1.0);
    let pts = total_points(&total, 30, 5);
    for t in [1.0, 3.0] {
        let u = thom_form_of(&field.with_t(t)).unwrap();
        let lhs = chi.sub(&u).unwrap();
        let d_trans = transgression_form(&field, t).unwrap().d(H);
        let r = residual(&lhs, &d_trans, &pts);
        assert!(r < 1e-5, "t = {t}: {r}");
    }
}

#[test]
fn gbc_form_identity() {
    let mono = bundle("monopole", "s2", 2, 2);
    let tangent = bundle("tangent_s2", "s2", 2, 0);
    let cases = vec![
        (mono.clone(), monopole_section(&mono, &[-3.8, 0.0, 1.0]).unwrap()),
        (tangent.clone(), rotation_section(&tangent, -1.0, 0.5).unwrap()),
    ];
    for (b, v) in cases {
        for chart in 0..3 {
            let total = TotalSpace::new(b.clone(), chart);
            let vu = pullback_form(&total.section_map(&v).unwrap(), &thom_form(&total, 1.0).unwrap()).unwrap();
            let chi = euler_form(&b, chart).unwrap();
            let lhs = chi.sub(&vu).unwrap();
            let trans = transgression_unit_interval(&b, &v, chart).unwrap().d(H);
            let c = b.local(chart).chart();
            let lo = [c.lower[0] + 0.05, -3.0];
            let hi = [c.upper[0] - 0.05, 3.0];
            let pts = sample_box(&lo, &hi, 100, 17);
            let r = residual(&lhs, &trans, &pts);
            assert!(r < 1e-5, "{} chart {chart}: {r}", b.name);
        }
    }
}

#[test]
fn unit_interval_transgression_trivial_cases() {
    let flat = bundle("trivial", "t2", 2, 0);
    let unit = gbc_core::bundle::SectionField::constant(&flat, vec![1.0, 0.0]);
    let zero = gbc_core::bundle::SectionField::zero(&flat);
    for v in [unit, zero] {
        let t = transgression_unit_interval(&flat, &v, 0).unwrap();
        assert!(t.eval(&[0.4, -0.2]).unwrap().max_abs() < 1e-15);
    }
}

#[test]
fn q_on_the_flat_sphere_bundle() {
    let se = sphere_bundle(bundle("trivial", "t2", 2, 0), 0).unwrap();
    let q = transgression_infinite(&se).unwrap();
    for p in [[0.1, 0.2, 0.3], [1.0, -1.0, 2.5]] {
        let expected = GradedElement::monomial(3, 0, 0b100, 0, 1.0 / (2.0 * PI));
        assert!(q.eval(&p).unwrap().approx_eq(&expected, 1e-14), "{:?}", q.eval(&p).unwrap());
    }
    assert!(matches!(
        transgression_infinite_at(&se.total, &[0.1, 0.2, 2.0, 0.0]),
        Err(gbc_core::GbcError::OffSphereBundle(_))
    ));
}

#[test]
fn q_has_unit_fiber_integral_and_dq_is_euler() {
    for b in [bundle("monopole", "s2", 2, 3), bundle("tangent_s2", "s2", 2, 0)] {
        for chart in 0..3 {
            let se = sphere_bundle(b.clone(), chart).unwrap();
            let q = transgression_infinite(&se).unwrap();
            let u = [1.2, 0.8];
            let v = integrate_box(&[0.0], &[2.0 * PI], 30, |psi| q.eval_unchecked(&[u[0], u[1], psi[0]]).get(0b100, 0));
            assert!((v - 1.0).abs() < 1e-6, "{} chart {chart}: {v}", b.name);

            let chi = pullback_form(&se.projection, &euler_form(&b, chart).unwrap()).unwrap();
            let c = b.local(chart).chart();
            let pts = sample_box(&[c.lower[0] + 0.05, -3.0, -3.0], &[c.upper[0] - 0.05, 3.0, 3.0], 30, 3);
            let r = residual(&chi, &q.d(H), &pts);
            assert!(r < 1e-5, "{} chart {chart}: {r}", b.name);
        }
    }
}

#[test]
fn closedness_on_total_space() {
    let b = bundle("monopole", "s2", 2, 2);
    let total = TotalSpace::new(b.clone(), 2);
    let u = thom_form(&total, 1.3).unwrap();
    for x in total_points(&total, 20, 9) {
        assert!(exterior_derivative(&u, &x, H).unwrap().max_abs() < 1e-5);
    }
}

#[test]
fn ball_compactification() {
    let total = TotalSpace::new(bundle("trivial", "t2", 2, 0), 0);
    let u = thom_form(&total, 1.0).unwrap();
    let ball = compactify_to_ball(&total, &u).unwrap();
    assert!(ball.eval(&[0.1, 0.2, 0.0, 0.0]).unwrap().approx_eq(&u.eval(&[0.1, 0.2, 0.0, 0.0]).unwrap(), 1e-15));
    assert!(ball.eval(&[0.1, 0.2, 0.99, 0.0]).unwrap().max_abs() < 1e-4);
    assert!(matches!(ball.eval(&[0.1, 0.2, 0.8, 0.6]), Err(gbc_core::GbcError::OutsideBall(_))));
    let v = integrate_box(&[0.0, 0.0], &[1.0, 2.0 * PI], 60, |q| {
        let (s, c) = q[1].sin_cos();
        q[0] * ball.field.eval_unchecked(&[0.1, 0.2, q[0] * c, q[0] * s]).get(0b1100, 0)
    });
    assert!((v - 1.0).abs() < 1e-5, "{v}");
    let _ = SmoothMap::identity(total.chart.clone());
}
