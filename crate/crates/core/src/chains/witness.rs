//! Random test forms: polynomial forms with analytic `d`, and batteries of
//! closed forms used to certify cycles and decompositions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{integrate, AtlasForm, Chain};
use crate::bundle::BaseManifold;
use crate::error::Result;
use crate::exterior::{Chart, FormField, GradedElement};

/// A real polynomial in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Poly {
    /// All monomials of total degree ≤ `degree` with coefficients in `[−1, 1]`.
    pub fn random(n: usize, degree: u32, rng: &mut impl Rng) -> Self {
        let mut exps: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..n {
            exps = exps
                .into_iter()
                .flat_map(|e| {
                    let used: u32 = e.iter().sum();
                    (0..=degree - used).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        Self {
            terms: exps.into_iter().map(|e| (e, rng.gen_range(-1.0..1.0))).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, a: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[a] > 0)
                .map(|(e, c)| {
                    let mut e = e.clone();
                    let k = e[a];
                    e[a] -= 1;
                    (e, c * k as f64)
                })
                .collect(),
        }
    }
}

fn subsets(n: usize, q: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == q).collect()
}

/// A random `q`-form with polynomial coefficients on `chart`, carrying its
/// analytic exterior derivative.
pub fn random_polynomial_form(chart: Arc<Chart>, q: usize, poly_degree: u32, rng: &mut impl Rng) -> FormField {
    let n = chart.dim();
    let coeffs: Vec<(u32, Poly)> = subsets(n, q).into_iter().map(|m| (m, Poly::random(n, poly_degree, rng))).collect();
    let partials: Vec<(u32, Vec<Poly>)> =
        coeffs.iter().map(|(m, p)| (*m, (0..n).map(|a| p.partial(a)).collect())).collect();
    FormField::new(chart, 0, q, move |x| {
        let mut out = GradedElement::zero(n, 0);
        for (m, p) in &coeffs {
            out.add_term(*m, 0, p.eval(x));
        }
        out
    })
    .with_derivative(move |x| {
        let mut out = GradedElement::zero(n, 0);
        for (m, ps) in &partials {
            let basis = GradedElement::monomial(n, 0, *m, 0, 1.0);
            for (a, p) in ps.iter().enumerate() {
                let v = p.eval(x);
                if v != 0.0 {
                    out += &(&(GradedElement::dx(n, 0, a) * v) * &basis);
                }
            }
        }
        out
    })
}

/// `count` closed `degree`-forms on every chart of `base`:
/// - degree 0: constants;
/// - degree 1: the harmonic forms plus `d g` for random quadratics `g` in
///   the embedding coordinates;
/// - top degree: `g · vol` for random quadratics `g` (the first is `vol`).
pub fn closed_test_forms(base: &BaseManifold, degree: usize, count: usize, seed: u64) -> Vec<AtlasForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let charts = base.charts();
    let n = base.dim();
    let make = |eval: Arc<dyn Fn(&[f64]) -> GradedElement + Send + Sync>| {
        AtlasForm::new(
            degree,
            charts
                .iter()
                .map(|c| {
                    let e = eval.clone();
                    FormField::new(c.clone(), 0, degree, move |x| e(x))
                })
                .collect(),
        )
    };
    let emb_dim = base.embedding(&vec![0.3; n]).len();
    let mut out = Vec::new();
    if degree > n {
        return out;
    }
    if degree == 0 {
        for i in 0..count {
            let c = if i == 0 { 1.0 } else { rng.gen_range(-2.0..2.0) };
            out.push(make(Arc::new(move |_: &[f64]| GradedElement::scalar(n, 0, c))));
        }
        return out;
    }
    if degree == 1 {
        for h in base.harmonic_one_forms().into_iter().take(count) {
            out.push(make(Arc::new(move |_: &[f64]| GradedElement::one_form(n, 0, &h))));
        }
    }
    let b = base.clone();
    while out.len() < count {
        let g = Poly::random(emb_dim, 2, &mut rng);
        let first = out.is_empty();
        let b = b.clone();
        if degree == n {
            let top = (1u32 << n) - 1;
            out.push(make(Arc::new(move |x: &[f64]| {
                let f = if first { 1.0 } else { g.eval(&b.embedding(x)) };
                GradedElement::monomial(n, 0, top, 0, f * b.volume_density(x))
            })));
        } else if degree == 1 {
            let grads: Vec<Poly> = (0..emb_dim).map(|i| g.partial(i)).collect();
            out.push(make(Arc::new(move |x: &[f64]| {
                let e = b.embedding(x);
                let j = b.embedding_jacobian(x);
                let comps: Vec<f64> =
                    (0..n).map(|a| (0..emb_dim).map(|i| grads[i].eval(&e) * j[i * n + a]).sum()).collect();
                GradedElement::one_form(n, 0, &comps)
            })));
        } else {
            // intermediate degrees do not occur on the built-in bases
            break;
        }
    }
    out
}

/// `count` smooth `degree`-forms, closed or not, on every chart of `base`:
/// the closed battery interleaved with `Σᵢ gᵢ(E) dEᵢ` (degree 1) or `g(E)`
/// (degree 0) for random quadratics in the embedding coordinates `E`.
/// Integrals of these separate chains that differ as currents.
pub fn generic_test_forms(base: &BaseManifold, degree: usize, count: usize, seed: u64) -> Vec<AtlasForm> {
    let n = base.dim();
    if degree == n || degree > 1 {
        return closed_test_forms(base, degree, count, seed);
    }
    let closed = closed_test_forms(base, degree, count.div_ceil(2), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let charts = base.charts();
    let emb_dim = base.embedding(&vec![0.3; n]).len();
    let mut out = Vec::with_capacity(count);
    let mut closed = closed.into_iter();
    while out.len() < count {
        if out.len() % 2 == 0 {
            if let Some(f) = closed.next() {
                out.push(f);
                continue;
            }
        }
        let gs: Vec<Poly> = (0..if degree == 0 { 1 } else { emb_dim }).map(|_| Poly::random(emb_dim, 2, &mut rng)).collect();
        let (b, gs) = (base.clone(), Arc::new(gs));
        out.push(AtlasForm::new(
            degree,
            charts
                .iter()
                .map(|c| {
                    let (b, gs) = (b.clone(), gs.clone());
                    FormField::new(c.clone(), 0, degree, move |x| {
                        let e = b.embedding(x);
                        if degree == 0 {
                            return GradedElement::scalar(n, 0, gs[0].eval(&e));
                        }
                        let j = b.embedding_jacobian(x);
                        let comps: Vec<f64> =
                            (0..n).map(|a| (0..emb_dim).map(|i| gs[i].eval(&e) * j[i * n + a]).sum()).collect();
                        GradedElement::one_form(n, 0, &comps)
                    })
                })
                .collect(),
        ));
    }
    out
}

/// `max |∫_c α|` over a battery of forms.
pub fn witness_residual(forms: &[AtlasForm], c: &Chain, order: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in forms {
        worst = worst.max(integrate(f, c, order)?.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{exterior_derivative, fd_exterior_derivative};

    #[test]
    fn polynomial_derivative_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chart = Arc::new(Chart::euclidean("r3", 3));
        for q in 0..3 {
            let f = random_polynomial_form(chart.clone(), q, 3, &mut rng);
            let x = [0.3, -0.7, 0.2];
            let a = exterior_derivative(&f, &x, 1e-3).unwrap();
            let b = fd_exterior_derivative(&f, &x, 1e-3).unwrap();
            assert!(a.distance(&b) < 1e-9, "q = {q}");
        }
    }

    #[test]
    fn batteries_have_requested_sizes() {
        let s2 = BaseManifold::Sphere;
        assert_eq!(closed_test_forms(&s2, 1, 8, 3).len(), 8);
        assert_eq!(closed_test_forms(&s2, 2, 8, 3).len(), 8);
        assert_eq!(closed_test_forms(&s2, 3, 8, 3).len(), 0);
        let t2 = BaseManifold::Torus;
        assert_eq!(closed_test_forms(&t2, 1, 8, 3).len(), 8);
        assert_eq!(closed_test_forms(&t2, 0, 4, 3).len(), 4);
    }

    #[test]
    fn test_forms_are_closed() {
        let forms = closed_test_forms(&BaseManifold::Sphere, 1, 6, 5);
        for f in &forms {
            let field = &f.fields()[2];
            let d = fd_exterior_derivative(field, &[1.1, 0.4], 1e-4).unwrap();
            assert!(d.max_abs() < 1e-8);
        }
    }
}
