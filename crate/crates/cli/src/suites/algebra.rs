//! Algebraic and quadrature cross-checks against independent oracles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use gbc_core::berezin::{pfaffian, AntisymmetricFormMatrix};
use gbc_core::chains::library::quadrilateral;
use gbc_core::chains::witness::random_polynomial_form;
use gbc_core::chains::{integrate, Cell, Chain};
use gbc_core::chern_weil::gaussian_moment;
use gbc_core::{Chart, GradedElement, Result};

use super::oracles::{adaptive_simpson, determinant, simpson_to_infinity};
use crate::config::SuiteConfig;
use crate::report::CaseRecord;

const PFAFFIAN_TOL: f64 = 1e-9;
const MOMENT_TOL: f64 = 1e-10;
const STOKES_TOL: f64 = 1e-8;
const KOSZUL_TOL: f64 = 1e-14;
const CASES: usize = 50;

pub fn run(config: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    Ok(vec![
        pfaffian_squares(config.seed)?,
        moments()?,
        stokes(config.seed, config.quad_order)?,
        koszul(config.seed),
        leibniz(config, config.seed)?,
    ])
}

/// `Pf(A)² = det A` for random antisymmetric `A` of sizes 2, 4, 6, 8.
pub fn pfaffian_squares(seed: u64) -> Result<CaseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..CASES {
        let n = 2 * (i % 4 + 1);
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in r + 1..n {
                let v = rng.gen_range(-2.0..2.0);
                a[r * n + c] = v;
                a[c * n + r] = -v;
            }
        }
        let pf = pfaffian(&AntisymmetricFormMatrix::from_scalars(n, &a)?)?.scalar_part();
        let det = determinant(n, &a);
        worst = worst.max((pf * pf - det).abs() / det.abs().max(f64::MIN_POSITIVE));
    }
    Ok(CaseRecord::below("pfaffian_squared_is_determinant", worst, PFAFFIAN_TOL).with("matrices", CASES))
}

/// Closed-form Gaussian moments against adaptive Simpson quadrature.
pub fn moments() -> Result<CaseRecord> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in 0..7u32 {
        for a in [0.5, 1.0, 2.3] {
            let f = move |t: f64| t.powi(m as i32) * (-0.5 * a * t * t).exp();
            for upper in [0.3, 1.0, 2.5, 6.0, f64::INFINITY] {
                let exact = gaussian_moment(m, a, upper)?;
                let oracle = if upper.is_finite() {
                    adaptive_simpson(&f, 0.0, upper, 1e-14)
                } else {
                    simpson_to_infinity(&f, 0.0, 1e-14)
                };
                worst = worst.max((exact - oracle).abs());
                count += 1;
            }
        }
    }
    Ok(CaseRecord::below("gaussian_moments", worst, MOMENT_TOL).with("moments", count))
}

/// `∫_c dω = ∫_∂c ω` for random polynomial 1-forms on quadrilaterals in ℝ²
/// and 2-forms on affine 3-cells in ℝ³.
pub fn stokes(seed: u64, order: usize) -> Result<CaseRecord> {
    let plane = Arc::new(Chart::euclidean("plane", 2));
    let space = Arc::new(Chart::euclidean("space", 3));
    let residuals: Vec<f64> = (0..CASES)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let (form, cell) = if i % 2 == 0 {
                let mut corner = |x: f64, y: f64| [x + rng.gen_range(-0.3..0.3), y + rng.gen_range(-0.3..0.3)];
                let corners = [corner(0.0, 0.0), corner(1.0, 0.0), corner(1.0, 1.0), corner(0.0, 1.0)];
                (random_polynomial_form(plane.clone(), 1, 3, &mut rng), quadrilateral(&plane, corners))
            } else {
                let origin: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut jac = vec![0.0; 9];
                for (k, v) in jac.iter_mut().enumerate() {
                    *v = if k % 4 == 0 { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4);
                }
                let j = jac.clone();
                let cell = Cell::new("affine", space.clone(), 3, move |u| {
                    (0..3).map(|r| origin[r] + (0..3).map(|c| j[r * 3 + c] * u[c]).sum::<f64>()).collect()
                })
                .with_jacobian(move |_| jac.clone());
                (random_polynomial_form(space.clone(), 2, 3, &mut rng), cell)
            };
            let c = Chain::from(cell);
            let inner = integrate(&form.d(1e-4), &c, order)?;
            let outer = integrate(&form, &c.boundary()?, order)?;
            Ok((inner - outer).abs())
        })
        .collect::<Result<_>>()?;
    let worst = residuals.into_iter().fold(0.0, f64::max);
    Ok(CaseRecord::below("stokes", worst, STOKES_TOL).with("forms", CASES))
}

fn random_homogeneous(p: usize, r: usize, degree: usize, rng: &mut impl Rng) -> GradedElement {
    let mut out = GradedElement::zero(p, r);
    for mask in (0u32..1 << (p + r)).filter(|m| m.count_ones() as usize == degree) {
        if rng.gen_bool(0.6) {
            out.add_term(mask & ((1 << p) - 1), mask >> p, rng.gen_range(-1.0..1.0));
        }
    }
    out
}

/// `a ∧ b = (−1)^{|a||b|} b ∧ a` on random homogeneous elements.
pub fn koszul(seed: u64) -> CaseRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let (da, db) = (rng.gen_range(0..4), rng.gen_range(0..4));
        let a = random_homogeneous(3, 2, da, &mut rng);
        let b = random_homogeneous(3, 2, db, &mut rng);
        let sign = if (da * db) % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max((&a * &b).distance(&((&b * &a) * sign)));
    }
    CaseRecord::below("koszul_sign", worst, KOSZUL_TOL).with("pairs", CASES)
}

/// `d(α ∧ β) = dα ∧ β + (−1)^p α ∧ dβ` with the product differentiated
/// numerically.
pub fn leibniz(config: &SuiteConfig, seed: u64) -> Result<CaseRecord> {
    let space = Arc::new(Chart::euclidean("space", 3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e1b);
    let h = config.fd_step;
    let mut worst = 0.0f64;
    for i in 0..CASES {
        let p = i % 2;
        let alpha = random_polynomial_form(space.clone(), p, 2, &mut rng);
        let beta = random_polynomial_form(space.clone(), 1, 2, &mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = alpha.wedge(&beta)?.d(h).eval(&x)?;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = &alpha.d(h).eval(&x)? * &beta.eval(&x)? + (&alpha.eval(&x)? * &beta.d(h).eval(&x)?) * sign;
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(CaseRecord::below("leibniz", worst, config.tol_form).with("points", CASES))
}
