//! `(A, k)`-pairs of forms with singularities and their induced characters.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{sample_box, BaseManifold};
use crate::chains::library::{north_cap, quadrilateral, small_cap, south_cap};
use crate::chains::witness::{generic_test_forms, witness_residual};
use crate::chains::{integrate, mod_distance, mod_reduce, AtlasForm, Chain, FormSource, ModValue};
use crate::error::{GbcError, Result};
use crate::exterior::{exterior_derivative, Chart, FormField, GradedElement};

pub const DEFAULT_CLEARANCE: f64 = 1e-3;
/// Parameter grid used for admissibility: 65 points per axis (pitch 1/64).
pub const ADMISSIBILITY_GRID: usize = 65;

pub type DistanceFn = Arc<dyn Fn(&str, &[f64]) -> f64 + Send + Sync>;

/// A finite polyhedral set, known through its distance function (chart
/// units, given the chart name and coordinates).
#[derive(Clone)]
pub struct SingularSet {
    pub label: String,
    /// `None` for the empty set.
    pub dim: Option<usize>,
    distance: DistanceFn,
}

impl fmt::Debug for SingularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SingularSet({}, dim {:?})", self.label, self.dim)
    }
}

impl SingularSet {
    pub fn empty() -> Self {
        Self {
            label: "∅".into(),
            dim: None,
            distance: Arc::new(|_, _| f64::INFINITY),
        }
    }

    pub fn new(label: impl Into<String>, dim: usize, distance: impl Fn(&str, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            dim: Some(dim),
            distance: Arc::new(distance),
        }
    }

    /// The south pole `θ = π` of a `(θ, φ)` sphere chart.
    pub fn south_pole() -> Self {
        Self::new("south pole", 0, |_, x| PI - x[0])
    }

    pub fn north_pole() -> Self {
        Self::new("north pole", 0, |_, x| x[0])
    }

    /// Finitely many points of one chart (Euclidean distance, periods respected).
    pub fn points(chart: Arc<Chart>, points: Vec<Vec<f64>>) -> Self {
        let name = chart.name.clone();
        Self::new(format!("{} points", points.len()), 0, move |c, x| {
            if c != name {
                return f64::INFINITY;
            }
            points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(x)
                        .zip(&chart.periods)
                        .map(|((a, b), per)| {
                            let d = a - b;
                            let d = per.map_or(d, |t| d - t * (d / t).round());
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.dim.is_none()
    }

    pub fn distance(&self, chart: &str, x: &[f64]) -> f64 {
        (self.distance)(chart, x)
    }

    /// Smallest distance from sampled points of `c` to the set.
    pub fn distance_to_chain(&self, c: &Chain, per_axis: usize) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        c.sample_points(per_axis)
            .iter()
            .map(|(chart, x)| self.distance(&chart.name, x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A pair `(ω, φ)` with `dφ = ω` off `e(φ)` whose periods
/// `∫_c ω − ∫_∂c φ` lie in `A = cℤ`.
#[derive(Clone, Debug)]
pub struct AkPair {
    pub name: String,
    pub k: usize,
    pub modulus: f64,
    pub omega: AtlasForm,
    pub phi: AtlasForm,
    pub e_omega: SingularSet,
    pub e_phi: SingularSet,
    pub clearance: f64,
    /// Dimension of the underlying manifold.
    pub manifold_dim: usize,
}

impl AkPair {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        k: usize,
        modulus: f64,
        manifold_dim: usize,
        omega: AtlasForm,
        phi: AtlasForm,
        e_omega: SingularSet,
        e_phi: SingularSet,
    ) -> Result<Self> {
        mod_reduce(0.0, modulus)?;
        if k == 0 || omega.degree() != k || phi.degree() != k - 1 {
            return Err(GbcError::Dimension(format!(
                "pair of degree {k} with forms of degrees {} and {}",
                omega.degree(),
                phi.degree()
            )));
        }
        let too_big = |s: &SingularSet, bound: isize| s.dim.is_some_and(|d| d as isize > bound);
        let n = manifold_dim as isize;
        if too_big(&e_phi, n - k as isize) || too_big(&e_omega, n - k as isize - 1) {
            return Err(GbcError::InvalidParameter("singular sets exceed their dimension bounds".into()));
        }
        if e_phi.is_empty() && !e_omega.is_empty() {
            return Err(GbcError::InvalidParameter("e(ω) must lie inside e(φ)".into()));
        }
        Ok(Self {
            name: name.into(),
            k,
            modulus,
            omega,
            phi,
            e_omega,
            e_phi,
            clearance: DEFAULT_CLEARANCE,
            manifold_dim,
        })
    }

    pub fn with_clearance(mut self, eps: f64) -> Self {
        self.clearance = eps;
        self
    }

    /// `(c·ω, c·φ)` — with `c` not an integer this breaks integrality.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            name: format!("{}×{factor}", self.name),
            omega: self.omega.map(|f| f.scale(factor)),
            phi: self.phi.map(|f| f.scale(factor)),
            ..self.clone()
        }
    }

    /// `(ω, φ + α)` for a smooth global `α`; again a pair when `dα = 0`.
    pub fn shifted(&self, alpha: &AtlasForm) -> Result<Self> {
        let fields = self
            .phi
            .fields()
            .iter()
            .map(|f| {
                let a = alpha.field_for(&f.chart().name).ok_or_else(|| GbcError::ChartMismatch {
                    expected: f.chart().name.clone(),
                    found: "no matching chart in α".into(),
                })?;
                f.add(a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            phi: AtlasForm::new(self.phi.degree(), fields),
            ..self.clone()
        })
    }

    /// Max `|dφ − ω|` over sampled points at distance ≥ `margin` from `e(φ)`.
    pub fn extension_residual(&self, samples: usize, seed: u64, h: f64, margin: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for phi in self.phi.fields() {
            let chart = phi.chart();
            let omega = self.omega.field_for(&chart.name).ok_or_else(|| GbcError::ChartMismatch {
                expected: chart.name.clone(),
                found: "no ω on this chart".into(),
            })?;
            let lo: Vec<f64> = chart.lower.iter().map(|v| v.max(-6.0) + 4.0 * h).collect();
            let hi: Vec<f64> = chart.upper.iter().map(|v| v.min(6.0) - 4.0 * h).collect();
            for x in sample_box(&lo, &hi, samples, seed) {
                if self.e_phi.distance(&chart.name, &x) < margin {
                    continue;
                }
                let d = exterior_derivative(phi, &x, h)?;
                worst = worst.max(d.distance(&omega.eval(&x)?));
            }
        }
        Ok(worst)
    }

    /// `|c|` clears `e(ω)` and `|∂c|` clears `e(φ)` by more than the clearance.
    pub fn is_admissible(&self, c: &Chain) -> bool {
        if self.e_omega.distance_to_chain(c, ADMISSIBILITY_GRID) <= self.clearance {
            return false;
        }
        match c.boundary() {
            Ok(b) => self.e_phi.distance_to_chain(&b, ADMISSIBILITY_GRID) > self.clearance,
            Err(_) => false,
        }
    }

    /// `R[(ω, φ), c] = ∫_c ω − ∫_∂c φ`.
    pub fn period(&self, c: &Chain, order: usize) -> Result<f64> {
        if !self.is_admissible(c) {
            return Err(GbcError::Inadmissible(format!("chain for pair `{}`", self.name)));
        }
        Ok(integrate(&self.omega, c, order)? - integrate(&self.phi, &c.boundary()?, order)?)
    }

    /// Per-chain integrality residuals (`None` for inadmissible samples).
    pub fn check_pair(&self, samples: &[Chain], order: usize, tol: f64) -> Result<PairReport> {
        let mut residuals = Vec::with_capacity(samples.len());
        for c in samples {
            residuals.push(if self.is_admissible(c) {
                let p = self.period(c, order)?;
                Some(mod_reduce(p, self.modulus)?.norm())
            } else {
                None
            });
        }
        let checked: Vec<f64> = residuals.iter().flatten().copied().collect();
        let warning = checked.is_empty().then(|| "no admissible samples; the check is vacuous".to_string());
        Ok(PairReport {
            pass: checked.iter().all(|r| *r < tol),
            max_residual: checked.iter().copied().fold(0.0, f64::max),
            residuals,
            warning,
        })
    }

    /// `s(φ)(z) = ∫_{c_k} ω + ∫_{z′} φ mod A` for a decomposition
    /// `z = ∂c_k + z′` supplied by the caller.
    pub fn eval_induced_character(&self, c_k: &Chain, z_prime: &Chain, order: usize) -> Result<ModValue> {
        if self.e_phi.distance_to_chain(z_prime, ADMISSIBILITY_GRID) <= self.clearance {
            return Err(GbcError::Inadmissible("z′ meets e(φ)".into()));
        }
        if self.e_omega.distance_to_chain(c_k, ADMISSIBILITY_GRID) <= self.clearance {
            return Err(GbcError::Inadmissible("c_k meets e(ω)".into()));
        }
        mod_reduce(integrate(&self.omega, c_k, order)? + integrate(&self.phi, z_prime, order)?, self.modulus)
    }

    /// Circle distance between the evaluations of two decompositions.
    pub fn lemma1_check(&self, first: (&Chain, &Chain), second: (&Chain, &Chain), order: usize) -> Result<f64> {
        let a = self.eval_induced_character(first.0, first.1, order)?;
        let b = self.eval_induced_character(second.0, second.1, order)?;
        mod_distance(&a, &b)
    }
}

/// Witness residual of `z − ∂c_k − z′` against generic smooth test forms on
/// `base` (closed forms alone cannot tell homologous cycles apart).
pub fn decomposition_residual(
    base: &BaseManifold,
    z: &Chain,
    c_k: &Chain,
    z_prime: &Chain,
    battery: usize,
    order: usize,
) -> Result<f64> {
    let diff = (z - &c_k.boundary()?).plus(&(-z_prime))?;
    let forms = generic_test_forms(base, z.dim(), battery, 7);
    witness_residual(&forms, &diff, order)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub residuals: Vec<Option<f64>>,
    pub max_residual: f64,
    pub pass: bool,
    pub warning: Option<String>,
}

fn on_sphere_charts(degree: usize, eval: impl Fn(&[f64]) -> GradedElement + Send + Sync + 'static) -> AtlasForm {
    let eval = Arc::new(eval);
    AtlasForm::new(
        degree,
        BaseManifold::Sphere
            .charts()
            .into_iter()
            .map(|c| {
                let e = eval.clone();
                FormField::new(c, 0, degree, move |x| e(x))
            })
            .collect(),
    )
}

/// The Dirac monopole pair on `S²`: `ω = m·dA/4π`,
/// `φ = m(1 − cos θ) dφ / 4π`, singular at the south pole.
pub fn dirac_pair(charge: f64, modulus: f64) -> Result<AkPair> {
    let s = charge / (4.0 * PI);
    let omega = on_sphere_charts(2, move |x| GradedElement::monomial(2, 0, 0b11, 0, s * x[0].sin()));
    let phi = on_sphere_charts(1, move |x| GradedElement::one_form(2, 0, &[0.0, s * (1.0 - x[0].cos())]));
    AkPair::new(
        format!("dirac({charge})"),
        2,
        modulus,
        2,
        omega,
        phi,
        SingularSet::empty(),
        SingularSet::south_pole(),
    )
}

/// `(dα, α)` for a smooth 1-form `α` on the sphere charts.
pub fn exact_pair(alpha: AtlasForm, d_alpha: AtlasForm, modulus: f64) -> Result<AkPair> {
    AkPair::new("exact", 2, modulus, 2, d_alpha, alpha, SingularSet::empty(), SingularSet::empty())
}

/// Random 2-chains on the sphere chart that avoid the south pole on their
/// boundaries: bilinear quadrilaterals, polar caps and small caps.
pub fn random_sphere_chains(chart: &Arc<Chart>, count: usize, seed: u64) -> Vec<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| match i % 4 {
            0 | 1 => {
                let mut corner = || [rng.gen_range(0.1..2.9), rng.gen_range(-3.0..3.0)];
                let (a, b, c, d) = (corner(), corner(), corner(), corner());
                Chain::from(quadrilateral(chart, [a, b, c, d]))
            }
            2 => {
                let t = rng.gen_range(0.2..2.9);
                if rng.gen_bool(0.5) {
                    north_cap(chart, t)
                } else {
                    south_cap(chart, t)
                }
            }
            _ => small_cap(chart, (rng.gen_range(0.5..2.4), rng.gen_range(-3.0..3.0)), rng.gen_range(0.05..0.6)),
        })
        .collect()
}
