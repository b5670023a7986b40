use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{GbcError, Result};

/// `∫₀^upper t^m e^{−a t²/2} dt` for `a ≥ 0` and `upper ∈ [0, ∞]`.
///
/// Uses the lower incomplete gamma function,
/// `½ (2/a)^{(m+1)/2} γ((m+1)/2, a·upper²/2)`, and a power series when
/// `a·upper²/2` is small.
pub fn gaussian_moment(m: u32, a: f64, upper: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(GbcError::InvalidParameter(format!("Gaussian width must be finite and ≥ 0, got {a}")));
    }
    if !(upper >= 0.0) {
        return Err(GbcError::InvalidParameter(format!("upper limit must be ≥ 0, got {upper}")));
    }
    let s = 0.5 * (m as f64 + 1.0);
    if upper.is_infinite() {
        if a == 0.0 {
            return Err(GbcError::Divergent(a));
        }
        return Ok(0.5 * (ln_gamma(s) + s * (2.0 / a).ln()).exp());
    }
    let x = 0.5 * a * upper * upper;
    if x < 1.0 {
        // Σ_n (−a/2)ⁿ U^{m+2n+1} / (n! (m+2n+1))
        let mut sum = 0.0;
        let mut power = upper.powi(m as i32 + 1);
        let mut fact = 1.0;
        for n in 0..60 {
            let term = power / (fact * (m as f64 + 2.0 * n as f64 + 1.0));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            power *= -x;
            fact *= n as f64 + 1.0;
        }
        return Ok(sum);
    }
    Ok(0.5 * (ln_gamma(s) + s * (2.0 / a).ln()).exp() * gamma_lr(s, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn infinite_moments() {
        assert!((gaussian_moment(0, 1.0, f64::INFINITY).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-15);
        assert!((gaussian_moment(1, 1.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!((gaussian_moment(3, 1.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-14);
        // I_m = (m − 1)/a · I_{m−2}
        let a = 2.7;
        for m in 2..10 {
            let lhs = gaussian_moment(m, a, f64::INFINITY).unwrap();
            let rhs = (m as f64 - 1.0) / a * gaussian_moment(m - 2, a, f64::INFINITY).unwrap();
            assert!((lhs - rhs).abs() < 1e-13 * rhs);
        }
    }

    #[test]
    fn zero_width_is_polynomial() {
        for m in 0..6 {
            let v = gaussian_moment(m, 0.0, 1.0).unwrap();
            assert!((v - 1.0 / (m as f64 + 1.0)).abs() < 1e-16);
        }
        assert_eq!(gaussian_moment(0, 0.0, f64::INFINITY), Err(GbcError::Divergent(0.0)));
    }

    #[test]
    fn closed_forms_for_low_moments() {
        for &(a, u) in &[(0.3, 1.0), (1.0, 1.0), (1.0, 3.0), (4.0, 2.5), (0.01, 1.0)] {
            let i1 = (1.0 - (-0.5 * a * u * u as f64).exp()) / a;
            assert!((gaussian_moment(1, a, u).unwrap() - i1).abs() < 1e-14);
            let i0 = (PI / (2.0 * a)).sqrt() * statrs::function::erf::erf(u * (a / 2.0).sqrt());
            let g = gaussian_moment(0, a, u).unwrap();
            // statrs erf is good to about 1e-10 absolute
            assert!((g - i0).abs() < 1e-10, "a={a} u={u}: {g} vs {i0}");
        }
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for m in 0..8 {
            let a = 2.0;
            let below = gaussian_moment(m, a, 1.0 - 1e-12).unwrap();
            let above = gaussian_moment(m, a, 1.0 + 1e-12).unwrap();
            assert!((below - above).abs() < 1e-11, "m = {m}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(gaussian_moment(0, -1.0, 1.0).is_err());
        assert!(gaussian_moment(0, 1.0, -1.0).is_err());
    }
}
