//! Standard cells and chains on the built-in bases.
//!
//! Spherical charts use `(θ, φ)`; `dθ ∧ dφ` is the outward orientation.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use super::{Cell, Chain};
use crate::exterior::Chart;

/// `[θ₀, θ₁] × [φ₀, φ₁]`.
pub fn polar_rectangle(chart: &Arc<Chart>, theta: (f64, f64), phi: (f64, f64)) -> Cell {
    Cell::rectangle(
        format!("rect[{},{}]x[{},{}]", theta.0, theta.1, phi.0, phi.1),
        chart.clone(),
        vec![theta.0, phi.0],
        vec![theta.1, phi.1],
    )
}

/// The circle `θ = θ₀`, traversed with increasing φ; it bounds the cap
/// `θ ≤ θ₀`.
pub fn latitude_circle(chart: &Arc<Chart>, theta0: f64) -> Chain {
    let mut c = Cell::rectangle(format!("latitude({theta0})"), chart.clone(), vec![theta0, 0.0], vec![theta0, 2.0 * PI]);
    c.label = format!("latitude({theta0})");
    Chain::from(c)
}

/// `{θ ≤ θ₀}` with boundary `latitude_circle(θ₀)`.
pub fn north_cap(chart: &Arc<Chart>, theta0: f64) -> Chain {
    Chain::from(polar_rectangle(chart, (0.0, theta0), (0.0, 2.0 * PI)))
}

/// `{θ ≥ θ₀}` with boundary `−latitude_circle(θ₀)`.
pub fn south_cap(chart: &Arc<Chart>, theta0: f64) -> Chain {
    Chain::from(polar_rectangle(chart, (theta0, PI), (0.0, 2.0 * PI)))
}

/// The whole sphere as one polar rectangle (its boundary is empty).
pub fn polar_sphere(chart: &Arc<Chart>) -> Chain {
    north_cap(chart, PI)
}

/// Small circle of angular radius `radius` about the point `(θ_c, φ_c)`,
/// counterclockwise seen from outside.
pub fn small_circle(chart: &Arc<Chart>, center: (f64, f64), radius: f64) -> Chain {
    let (tc, pc) = center;
    let cell = Cell::new(format!("circle({tc},{pc};{radius})"), chart.clone(), 1, move |u| {
        let p = small_circle_point(tc, pc, radius, 1.0, 2.0 * PI * u[0]);
        to_polar_near(&p, pc)
    });
    Chain::from(cell)
}

/// Spherical cap of angular radius `radius` about `(θ_c, φ_c)`, bounded by
/// [`small_circle`].
pub fn small_cap(chart: &Arc<Chart>, center: (f64, f64), radius: f64) -> Chain {
    let (tc, pc) = center;
    let cell = Cell::new(format!("cap({tc},{pc};{radius})"), chart.clone(), 2, move |u| {
        let p = small_circle_point(tc, pc, radius, u[0], 2.0 * PI * u[1]);
        to_polar_near(&p, pc)
    });
    Chain::from(cell)
}

/// Point at geodesic distance `s·radius` from the center in direction `ang`.
fn small_circle_point(tc: f64, pc: f64, radius: f64, s: f64, ang: f64) -> [f64; 3] {
    let (st, ct) = tc.sin_cos();
    let (sp, cp) = pc.sin_cos();
    let c = [st * cp, st * sp, ct];
    // e_θ and e_φ at the center (a right-handed tangent frame with c)
    let et = [ct * cp, ct * sp, -st];
    let ep = [-sp, cp, 0.0];
    let (sr, cr) = (s * radius).sin_cos();
    let (sa, ca) = ang.sin_cos();
    [0, 1, 2].map(|i| cr * c[i] + sr * (ca * et[i] + sa * ep[i]))
}

/// Polar angles with φ unwrapped to within π of `phi_ref`.
fn to_polar_near(p: &[f64; 3], phi_ref: f64) -> Vec<f64> {
    let mut x = to_polar(p);
    let d = x[1] - phi_ref;
    x[1] = phi_ref + d - 2.0 * PI * (d / (2.0 * PI)).round();
    x
}

fn to_polar(p: &[f64; 3]) -> Vec<f64> {
    let rho = p[0].hypot(p[1]);
    vec![rho.atan2(p[2]), p[1].atan2(p[0])]
}

/// `∂(θ, φ)/∂(X, Y, Z)` for a (not necessarily unit) vector, row-major 2×3.
fn polar_jacobian(p: &[f64; 3]) -> [f64; 6] {
    let rho2 = p[0] * p[0] + p[1] * p[1];
    let rho = rho2.sqrt();
    let r2 = rho2 + p[2] * p[2];
    [
        p[0] * p[2] / (rho * r2),
        p[1] * p[2] / (rho * r2),
        -rho / r2,
        -p[1] / rho2,
        p[0] / rho2,
        0.0,
    ]
}

/// The sphere as six equiangular gnomonic cube faces in a `(θ, φ)` chart.
///
/// Each face is analytic on a neighbourhood of its parameter square, so
/// Gauss–Legendre rules converge geometrically; the poles are face centres
/// and never quadrature nodes for even orders.
pub fn cube_sphere(chart: &Arc<Chart>) -> Chain {
    let axes: [([f64; 3], [f64; 3], [f64; 3]); 6] = [
        ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
        ([-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
        ([0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
        ([0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ([0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
    ];
    let mut out = Chain::empty(2);
    for (k, (n, e1, e2)) in axes.into_iter().enumerate() {
        let point = move |u: &[f64]| {
            let (a, b) = (FRAC_PI_4 * (2.0 * u[0] - 1.0), FRAC_PI_4 * (2.0 * u[1] - 1.0));
            let (ta, tb) = (a.tan(), b.tan());
            [0, 1, 2].map(|i| n[i] + ta * e1[i] + tb * e2[i])
        };
        let cell = Cell::new(format!("cube-face-{k}"), chart.clone(), 2, move |u| to_polar(&point(u)))
            .with_jacobian(move |u| {
                let (a, b) = (FRAC_PI_4 * (2.0 * u[0] - 1.0), FRAC_PI_4 * (2.0 * u[1] - 1.0));
                let (sa, sb) = (2.0 * FRAC_PI_4 / a.cos().powi(2), 2.0 * FRAC_PI_4 / b.cos().powi(2));
                let j = polar_jacobian(&point(u));
                let mut out = vec![0.0; 4];
                for r in 0..2 {
                    out[r * 2] = (0..3).map(|i| j[r * 3 + i] * e1[i] * sa).sum();
                    out[r * 2 + 1] = (0..3).map(|i| j[r * 3 + i] * e2[i] * sb).sum();
                }
                out
            });
        // e1 × e2 = ±n decides the orientation
        let cross = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        let sign = if (0..3).map(|i| cross[i] * n[i]).sum::<f64>() > 0.0 { 1 } else { -1 };
        out.push(sign, cell).expect("2-cells");
    }
    out
}

/// The bilinear quadrilateral with corners `p00, p10, p11, p01`.
pub fn quadrilateral(chart: &Arc<Chart>, corners: [[f64; 2]; 4]) -> Cell {
    let [p00, p10, p11, p01] = corners;
    let at = move |u: &[f64]| {
        (0..2)
            .map(|i| {
                (1.0 - u[0]) * (1.0 - u[1]) * p00[i] + u[0] * (1.0 - u[1]) * p10[i] + u[0] * u[1] * p11[i]
                    + (1.0 - u[0]) * u[1] * p01[i]
            })
            .collect::<Vec<f64>>()
    };
    Cell::new("quad", chart.clone(), 2, at).with_jacobian(move |u| {
        let mut j = vec![0.0; 4];
        for i in 0..2 {
            j[i * 2] = (1.0 - u[1]) * (p10[i] - p00[i]) + u[1] * (p11[i] - p01[i]);
            j[i * 2 + 1] = (1.0 - u[0]) * (p01[i] - p00[i]) + u[0] * (p11[i] - p10[i]);
        }
        j
    })
}

/// The loop along coordinate axis `axis` of a torus or circle chart.
pub fn coordinate_loop(chart: &Arc<Chart>, axis: usize, base_point: &[f64]) -> Chain {
    let mut lower = base_point.to_vec();
    let mut upper = base_point.to_vec();
    lower[axis] = 0.0;
    upper[axis] = 2.0 * PI;
    Chain::from(Cell::rectangle(format!("loop{axis}"), chart.clone(), lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::BaseManifold;
    use crate::chains::integrate;
    use crate::exterior::{FormField, GradedElement};

    fn sphere_chart() -> Arc<Chart> {
        BaseManifold::Sphere.charts()[2].clone()
    }

    fn area(chart: &Arc<Chart>) -> FormField {
        FormField::new(chart.clone(), 0, 2, |x| GradedElement::monomial(2, 0, 0b11, 0, x[0].sin()))
    }

    #[test]
    fn cube_sphere_is_a_closed_chain_of_area_4pi() {
        let c = sphere_chart();
        let cs = cube_sphere(&c);
        assert!(cs.boundary().unwrap().is_empty());
        let a = integrate(&area(&c), &cs, 32).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-12, "{a}");
        for (_, cell) in cs.terms() {
            let (ja, jf) = (cell.jacobian(&[0.3, 0.7]), cell.fd_jacobian(&[0.3, 0.7]));
            for (x, y) in ja.iter().zip(&jf) {
                assert!((x - y).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn cube_sphere_converges_geometrically() {
        let c = sphere_chart();
        let cs = cube_sphere(&c);
        let err = |n| (integrate(&area(&c), &cs, n).unwrap() - 4.0 * PI).abs();
        assert!(err(8) > 1e2 * err(16).max(1e-15));
    }

    #[test]
    fn caps_and_latitudes() {
        let c = sphere_chart();
        let b = north_cap(&c, 1.0).boundary().unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.terms()[0].1.matches(&latitude_circle(&c, 1.0).terms()[0].1) == Some(1));
        assert_eq!(b.terms()[0].0, 1);
        assert!(polar_sphere(&c).boundary().unwrap().is_empty());
        let cap = integrate(&area(&c), &north_cap(&c, 1.0), 16).unwrap();
        assert!((cap - 2.0 * PI * (1.0 - 1.0f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn small_caps_have_spherical_area() {
        let c = sphere_chart();
        let cap = small_cap(&c, (1.2, 0.4), 0.3);
        let a = integrate(&area(&c), &cap, 24).unwrap();
        assert!((a - 2.0 * PI * (1.0 - 0.3f64.cos())).abs() < 1e-10, "{a}");
        let b = cap.boundary().unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.terms()[0].1.matches(&small_circle(&c, (1.2, 0.4), 0.3).terms()[0].1), Some(1));
    }
}
