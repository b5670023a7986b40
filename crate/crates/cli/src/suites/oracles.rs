//! Independent reference computations used by the suites.

use gauss_quad::GaussLegendre;

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 48)
}

/// `∫_a^∞ f` by adaptive Simpson on unit chunks until a chunk contributes
/// less than `tol`.
pub fn simpson_to_infinity(f: &dyn Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    loop {
        let part = adaptive_simpson(f, lo, lo + 1.0, tol * 1e-2);
        total += part;
        lo += 1.0;
        if part.abs() < tol * 1e-3 && lo > a + 4.0 {
            return total;
        }
    }
}

/// Tensor Gauss–Legendre rule on a box.
pub fn integrate_box(lower: &[f64], upper: &[f64], n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let rule = GaussLegendre::new(n).expect("order is at least 2");
    let nodes: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    let d = lower.len();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
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

/// Determinant by LU decomposition.
pub fn determinant(n: usize, row_major: &[f64]) -> f64 {
    nalgebra::DMatrix::from_row_slice(n, n, row_major).determinant()
}
