//! Built-in bundle and section fixtures.
//!
//! Rank-2 connections on `S²` are written in complex notation: a frame
//! rotation `g = exp(αJ)`, `J = [[0, 1], [−1, 0]]`, multiplies the complex
//! component `s₁ + i s₂` by `e^{−iα}`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{BaseManifold, BundleWithConnection, LocalConnection, LocalSection, SectionField, Transition};
use crate::error::{GbcError, Result};
use crate::exterior::{identity_matrix, Chart, SmoothMap};

#[derive(Clone, Debug, PartialEq)]
pub struct BuiltinParams {
    pub rank: usize,
    pub base: String,
    pub charge: i32,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            rank: 2,
            base: "s2".into(),
            charge: 1,
        }
    }
}

/// `trivial` (flat, any rank, base `s1`/`s2`/`t2`), `tangent_s2`, `monopole`.
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<BundleWithConnection> {
    match name {
        "trivial" | "flat" => trivial(params),
        "tangent_s2" | "tangent" => tangent_s2(),
        "monopole" => monopole(params.charge),
        other => Err(GbcError::UnknownFixture(other.to_string())),
    }
}

fn rotation(alpha: f64) -> Vec<f64> {
    let (s, c) = alpha.sin_cos();
    vec![c, s, -s, c]
}

fn trivial(params: &BuiltinParams) -> Result<BundleWithConnection> {
    let base = BaseManifold::parse(&params.base)
        .ok_or_else(|| GbcError::InvalidParameter(format!("unknown base `{}`", params.base)))?;
    if params.rank == 0 {
        return Err(GbcError::InvalidParameter("rank must be positive".into()));
    }
    let r = params.rank;
    let charts = base.charts();
    let locals = charts.iter().map(|c| LocalConnection::flat(c.clone(), r)).collect();
    let transitions = sphere_transitions(&base, &charts, |_| move |_: &[f64]| identity_matrix(r));
    BundleWithConnection::new(format!("trivial-r{r}-{}", base.name()), base, r, locals, transitions)
}

/// Transitions among the `S²` charts (`north`, `south`, `sphere`), with
/// frame maps chosen per ordered pair.
fn sphere_transitions<F, G>(base: &BaseManifold, charts: &[Arc<Chart>], frame: F) -> Vec<Transition>
where
    F: Fn((usize, usize)) -> G,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    if *base != BaseManifold::Sphere {
        return Vec::new();
    }
    let eps = 0.05;
    let band = |lo: f64, hi: f64| (vec![lo + eps, 0.0], vec![hi - eps, 2.0 * PI]);
    [(0usize, 1usize, band(0.25 * PI, 0.75 * PI)), (2, 0, band(0.0, 0.75 * PI)), (2, 1, band(0.25 * PI, PI))]
        .into_iter()
        .map(|(from, to, overlap)| Transition {
            from,
            to,
            coord_map: SmoothMap::new(charts[from].clone(), charts[to].clone(), |x| x.to_vec())
                .with_jacobian(|_| identity_matrix(2)),
            frame: Arc::new(frame((from, to))),
            overlap,
        })
        .collect()
}

/// SO(2) connection with `ω₁₂ = (a + b cos θ) dφ` on the `(θ, φ)` chart.
fn polar_so2(chart: Arc<Chart>, a: f64, b: f64) -> LocalConnection {
    LocalConnection::so2(
        chart,
        move |x| vec![0.0, a + b * x[0].cos()],
        Some(Arc::new(move |x: &[f64]| vec![0.0, 0.0, -b * x[0].sin(), 0.0])),
    )
}

fn monopole(m: i32) -> Result<BundleWithConnection> {
    let base = BaseManifold::Sphere;
    let charts = base.charts();
    let h = 0.5 * m as f64;
    // north/sphere: (m/2)(1 − cos θ) dφ, south: −(m/2)(1 + cos θ) dφ
    let locals = vec![
        polar_so2(charts[0].clone(), h, -h),
        polar_so2(charts[1].clone(), -h, -h),
        polar_so2(charts[2].clone(), h, -h),
    ];
    let mf = m as f64;
    let transitions = sphere_transitions(&base, &charts, move |pair| {
        let k = match pair {
            (2, 0) => 0.0,
            _ => mf,
        };
        move |x: &[f64]| rotation(k * x[1])
    });
    BundleWithConnection::new(format!("monopole-{m}"), base, 2, locals, transitions)
}

fn tangent_s2() -> Result<BundleWithConnection> {
    let base = BaseManifold::Sphere;
    let charts = base.charts();
    // north frame is the coordinate frame rotated by −φ, smooth at the north pole;
    // `sphere` uses (e_θ, e_φ) with ω₁₂ = −cos θ dφ
    let locals = vec![
        polar_so2(charts[0].clone(), 1.0, -1.0),
        polar_so2(charts[1].clone(), -1.0, -1.0),
        polar_so2(charts[2].clone(), 0.0, -1.0),
    ];
    let transitions = sphere_transitions(&base, &charts, |pair| {
        let k = match pair {
            (0, 1) => 2.0,
            (2, 0) => -1.0,
            _ => 1.0,
        };
        move |x: &[f64]| rotation(k * x[1])
    });
    BundleWithConnection::new("tangent-s2", base, 2, locals, transitions)
}

/// One term `c · A(θ) e^{ikφ}` of a complex rank-2 section component.
#[derive(Clone)]
struct Term {
    coef: (f64, f64),
    amp: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
    k: f64,
}

fn complex_section(terms: Vec<Term>) -> LocalSection {
    let t2 = terms.clone();
    LocalSection::new(2, 2, move |x| {
        let (mut re, mut im) = (0.0, 0.0);
        for t in &terms {
            let (a, _) = (t.amp)(x[0]);
            let (s, c) = (t.k * x[1]).sin_cos();
            // (cr + i ci)(a)(c + i s)
            re += a * (t.coef.0 * c - t.coef.1 * s);
            im += a * (t.coef.0 * s + t.coef.1 * c);
        }
        vec![re, im]
    })
    .with_jacobian(move |x| {
        let mut j = [0.0; 4];
        for t in &t2 {
            let (a, da) = (t.amp)(x[0]);
            let (s, c) = (t.k * x[1]).sin_cos();
            let re = t.coef.0 * c - t.coef.1 * s;
            let im = t.coef.0 * s + t.coef.1 * c;
            j[0] += da * re;
            j[2] += da * im;
            // ∂φ (c + i s) = k(−s + i c)
            j[1] += a * t.k * (-t.coef.0 * s - t.coef.1 * c);
            j[3] += a * t.k * (t.coef.0 * c - t.coef.1 * s);
        }
        j.to_vec()
    })
}

/// `sinʲ(θ/2) cos^{m−j}(θ/2)` and its θ-derivative.
fn half_angle_amp(j: i32, m: i32) -> Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync> {
    Arc::new(move |th: f64| {
        let (s, c) = (0.5 * th).sin_cos();
        let a = s.powi(j) * c.powi(m - j);
        let mut da = 0.0;
        if j > 0 {
            da += 0.5 * j as f64 * s.powi(j - 1) * c.powi(m - j + 1);
        }
        if m - j > 0 {
            da -= 0.5 * (m - j) as f64 * s.powi(j + 1) * c.powi(m - j - 1);
        }
        (a, da)
    })
}

/// Section of the charge-`m` monopole bundle (`m ≥ 0`) whose north-gauge
/// component is `cos^m(θ/2) P(tan(θ/2) e^{iφ})` with `P(w) = Σ cⱼ wʲ`.
/// Zeros sit at the roots of `P` (and at the south pole if `c_m = 0`).
pub fn monopole_section(bundle: &BundleWithConnection, coeffs: &[f64]) -> Result<SectionField> {
    let m = (coeffs.len() as i32) - 1;
    if bundle.rank() != 2 || bundle.base != BaseManifold::Sphere || m < 0 {
        return Err(GbcError::InvalidParameter("monopole section needs a rank-2 bundle over S²".into()));
    }
    let north: Vec<Term> = coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| Term {
            coef: (c, 0.0),
            amp: half_angle_amp(j as i32, m),
            k: j as f64,
        })
        .collect();
    // south gauge multiplies by e^{−imφ}
    let south: Vec<Term> = north.iter().map(|t| Term { k: t.k - m as f64, ..t.clone() }).collect();
    let locals = bundle
        .locals()
        .iter()
        .map(|l| match l.chart().name.as_str() {
            "south" => Some(complex_section(south.clone())),
            _ => Some(complex_section(north.clone())),
        })
        .collect();
    Ok(SectionField::new(format!("monopole-poly{coeffs:?}"), 2, locals))
}

/// Tangent field `sin θ (a e_θ + b e_φ)` on `S²` (zeros at the poles).
pub fn rotation_section(bundle: &BundleWithConnection, a: f64, b: f64) -> Result<SectionField> {
    if bundle.rank() != 2 || bundle.base != BaseManifold::Sphere {
        return Err(GbcError::InvalidParameter("tangent field needs a rank-2 bundle over S²".into()));
    }
    let amp: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync> = Arc::new(|th: f64| (th.sin(), th.cos()));
    let term = |k: f64| Term { coef: (a, b), amp: amp.clone(), k };
    let locals = bundle
        .locals()
        .iter()
        .map(|l| match l.chart().name.as_str() {
            "north" => Some(complex_section(vec![term(1.0)])),
            "south" => Some(complex_section(vec![term(-1.0)])),
            _ => Some(complex_section(vec![term(0.0)])),
        })
        .collect();
    Ok(SectionField::new(format!("tangent-field({a},{b})"), 2, locals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin("moebius", &BuiltinParams::default()), Err(GbcError::UnknownFixture(_))));
    }

    #[test]
    fn sections_are_compatible_with_transitions() {
        for m in 0..4 {
            let b = builtin("monopole", &BuiltinParams { charge: m, ..Default::default() }).unwrap();
            let mut coeffs = vec![0.0; m as usize + 1];
            coeffs[0] = -1.5;
            coeffs[m as usize] += 1.0;
            let s = monopole_section(&b, &coeffs).unwrap();
            assert!(s.transition_residual(&b, 30, 2) < 1e-10, "m = {m}");
        }
        let t = builtin("tangent_s2", &BuiltinParams::default()).unwrap();
        let v = rotation_section(&t, -1.0, 0.5).unwrap();
        assert!(v.transition_residual(&t, 30, 2) < 1e-10);
    }

    #[test]
    fn section_jacobians_match_differences() {
        let b = builtin("monopole", &BuiltinParams { charge: 2, ..Default::default() }).unwrap();
        let s = monopole_section(&b, &[-3.8, 0.0, 1.0]).unwrap();
        for chart in 0..3 {
            let l = s.local(chart).unwrap();
            for x in [[0.9, 0.3], [1.7, -2.0]] {
                let (a, f) = (l.jacobian(&x), l.fd_jacobian(&x));
                for (p, q) in a.iter().zip(&f) {
                    assert!((p - q).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn monopole_section_zeros() {
        // P(w) = w² − 4: zeros at tan(θ/2) = 2, φ ∈ {0, π}
        let b = builtin("monopole", &BuiltinParams { charge: 2, ..Default::default() }).unwrap();
        let s = monopole_section(&b, &[-4.0, 0.0, 1.0]).unwrap();
        let th = 2.0 * 2f64.atan();
        let l = s.local(2).unwrap();
        assert!(l.norm(&[th, 0.0]) < 1e-12);
        assert!(l.norm(&[th, PI]) < 1e-12);
        assert!(l.norm(&[th, 0.5 * PI]) > 0.1);
    }
}
