//! Differential characters as evaluable objects: `i₂`, the Euler character,
//! the pulled-back Thom character and the sphere-bundle identity relating them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{sphere_bundle, BundleWithConnection, SectionField, SphereBundle};
use crate::chains::witness::{generic_test_forms, witness_residual};
use crate::chains::{integrate, mod_distance, mod_reduce, AtlasForm, Cell, Chain, ModValue};
use crate::chern_weil::{euler_form, thom_form_of, transgression_infinite, transgression_unit_interval, MQElementField};
use crate::error::{GbcError, Result};
use crate::exterior::{fd_exterior_derivative, pullback_form};

/// Parameter-grid points per axis used to bound a section away from zero.
const LIFT_GRID: usize = 33;
const MIN_SECTION_NORM: f64 = 1e-6;
const CURVATURE_STEP: f64 = 1e-4;

/// Quadrature and witness settings shared by the evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalSettings {
    pub order: usize,
    /// Size of the random test-form battery.
    pub test_forms: usize,
    pub seed: u64,
    /// Bound on witness integrals for cycles and decompositions.
    pub witness_tol: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            order: 24,
            test_forms: 8,
            seed: 7,
            witness_tol: 1e-5,
        }
    }
}

/// A bundle together with its unit sphere bundle over every base chart.
#[derive(Clone, Debug)]
pub struct SphereAtlas {
    bundle: Arc<BundleWithConnection>,
    spheres: Vec<SphereBundle>,
}

impl SphereAtlas {
    pub fn new(bundle: Arc<BundleWithConnection>) -> Result<Self> {
        let spheres = (0..bundle.locals().len())
            .map(|i| sphere_bundle(bundle.clone(), i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bundle, spheres })
    }

    pub fn bundle(&self) -> &Arc<BundleWithConnection> {
        &self.bundle
    }

    pub fn sphere(&self, chart: usize) -> &SphereBundle {
        &self.spheres[chart]
    }

    pub fn spheres(&self) -> &[SphereBundle] {
        &self.spheres
    }

    /// Base-chart index of a sphere-bundle chart name.
    pub fn sphere_index(&self, se_chart: &str) -> Result<usize> {
        self.spheres
            .iter()
            .position(|s| s.chart.name == se_chart)
            .ok_or_else(|| GbcError::ChartMismatch {
                expected: "a sphere-bundle chart".into(),
                found: se_chart.into(),
            })
    }

    /// `π̃_* y`, cell by cell.
    pub fn project(&self, y: &Chain) -> Result<Chain> {
        let mut out = Chain::empty(y.dim());
        for (k, cell) in y.terms() {
            let se = &self.spheres[self.sphere_index(&cell.chart().name)?];
            out.push(*k, cell.push_forward(&se.projection)?)?;
        }
        Ok(out)
    }

    /// `χ(∇)` on every base chart.
    pub fn euler_form(&self) -> Result<AtlasForm> {
        let fields = (0..self.spheres.len())
            .map(|i| euler_form(&self.bundle, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(AtlasForm::new(self.bundle.rank(), fields))
    }

    /// `Q` on every sphere-bundle chart.
    pub fn q_form(&self) -> Result<AtlasForm> {
        let fields = self.spheres.iter().map(transgression_infinite).collect::<Result<Vec<_>>>()?;
        Ok(AtlasForm::new(self.bundle.rank() - 1, fields))
    }

    /// `∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt` on the base charts where `v` is given.
    pub fn unit_transgression(&self, v: &SectionField) -> Result<AtlasForm> {
        let fields = self
            .given_charts(v)
            .map(|i| transgression_unit_interval(&self.bundle, v, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(AtlasForm::new(self.bundle.rank() - 1, fields))
    }

    /// `Q − π̃* ∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt` on the sphere-bundle charts.
    pub fn thom_transgression(&self, v: &SectionField) -> Result<AtlasForm> {
        let fields = self
            .given_charts(v)
            .map(|i| {
                let se = &self.spheres[i];
                let tv = transgression_unit_interval(&self.bundle, v, i)?;
                transgression_infinite(se)?.sub(&pullback_form(&se.projection, &tv)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtlasForm::new(self.bundle.rank() - 1, fields))
    }

    /// `v*U` on the base charts where `v` is given.
    pub fn pulled_thom_form(&self, v: &SectionField) -> Result<AtlasForm> {
        let fields = self
            .given_charts(v)
            .map(|i| thom_form_of(&MQElementField::for_section(&self.bundle, v, i, 1.0)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(AtlasForm::new(self.bundle.rank(), fields))
    }

    fn given_charts<'a>(&self, v: &'a SectionField) -> impl Iterator<Item = usize> + 'a {
        v.locals().iter().enumerate().filter(|(_, l)| l.is_some()).map(|(i, _)| i)
    }
}

/// `z = π̃_*(y) + ∂w` with `y` a cycle in `SE` and `w` a chain in `X`.
#[derive(Clone, Debug)]
pub struct SphereDecomposition {
    pub z: Chain,
    pub y: Chain,
    pub w: Chain,
}

impl SphereDecomposition {
    pub fn new(z: Chain, y: Chain, w: Chain) -> Result<Self> {
        if y.dim() != z.dim() || w.dim() != z.dim() + 1 {
            return Err(GbcError::Dimension(format!(
                "decomposition of a {}-cycle with y of dim {} and w of dim {}",
                z.dim(),
                y.dim(),
                w.dim()
            )));
        }
        Ok(Self { z, y, w })
    }

    /// `z = ∂w`, `y = 0`.
    pub fn bounding(w: Chain) -> Result<Self> {
        let z = w.boundary()?.simplify();
        let q = w.dim().saturating_sub(1);
        Self::new(if z.is_empty() { Chain::empty(q) } else { z }, Chain::empty(q), w)
    }

    /// `z = π̃_*(y)`, `w = 0`.
    pub fn lifted(z: Chain, y: Chain) -> Result<Self> {
        let q = z.dim();
        Self::new(z, y, Chain::empty(q + 1))
    }

    /// `max |∫_{π̃_*y + ∂w − z} α|` over generic test forms `α`.
    pub fn residual(&self, atlas: &SphereAtlas, settings: &EvalSettings) -> Result<f64> {
        let mut diff = atlas.project(&self.y)?;
        diff = diff.plus(&self.w.boundary()?)?;
        diff = diff.plus(&self.z.scaled(-1))?;
        let diff = diff.simplify();
        if diff.is_empty() {
            return Ok(0.0);
        }
        let forms = generic_test_forms(&atlas.bundle.base, self.z.dim(), settings.test_forms, settings.seed);
        witness_residual(&forms, &diff, settings.order)
    }

    pub fn validate(&self, atlas: &SphereAtlas, settings: &EvalSettings) -> Result<()> {
        let r = self.residual(atlas, settings)?;
        if r > settings.witness_tol {
            return Err(GbcError::InvalidDecomposition(r));
        }
        Ok(())
    }
}

/// A cycle, optionally with a sphere-bundle decomposition.
#[derive(Clone, Copy, Debug)]
pub enum CycleData<'a> {
    Cycle(&'a Chain),
    Decomposed(&'a SphereDecomposition),
}

impl CycleData<'_> {
    pub fn cycle(&self) -> &Chain {
        match self {
            CycleData::Cycle(z) => z,
            CycleData::Decomposed(d) => &d.z,
        }
    }
}

pub type CharacterEvaluator = Arc<dyn Fn(CycleData<'_>) -> Result<ModValue> + Send + Sync>;

/// A homomorphism `Z_{k−1}(X) → ℝ/cℤ` with curvature `ω_f`, given by an
/// evaluator on (possibly decomposed) cycles.
#[derive(Clone)]
pub struct DifferentialCharacter {
    pub name: String,
    degree: usize,
    modulus: f64,
    curvature: AtlasForm,
    evaluator: CharacterEvaluator,
}

impl fmt::Debug for DifferentialCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialCharacter({}, degree {}, mod {})", self.name, self.degree, self.modulus)
    }
}

impl DifferentialCharacter {
    pub fn new(
        name: impl Into<String>,
        degree: usize,
        modulus: f64,
        curvature: AtlasForm,
        evaluator: impl Fn(CycleData<'_>) -> Result<ModValue> + Send + Sync + 'static,
    ) -> Result<Self> {
        mod_reduce(0.0, modulus)?;
        if crate::chains::FormSource::degree(&curvature) != degree {
            return Err(GbcError::Dimension("curvature degree must equal the character degree".into()));
        }
        Ok(Self {
            name: name.into(),
            degree,
            modulus,
            curvature,
            evaluator: Arc::new(evaluator),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// `δ₁(f) = ω_f`.
    pub fn curvature(&self) -> &AtlasForm {
        &self.curvature
    }

    pub fn eval(&self, z: CycleData<'_>) -> Result<ModValue> {
        if z.cycle().dim() + 1 != self.degree {
            return Err(GbcError::Dimension(format!(
                "degree-{} character on a {}-cycle",
                self.degree,
                z.cycle().dim()
            )));
        }
        (self.evaluator)(z)
    }

    /// Circle distance between `f(∂c)` (through `y = 0`, `w = c`) and
    /// `∫_c ω_f mod c`.
    pub fn axiom_residual(&self, c: &Chain, order: usize) -> Result<f64> {
        let dec = SphereDecomposition::bounding(c.clone())?;
        let lhs = self.eval(CycleData::Decomposed(&dec))?;
        let rhs = mod_reduce(integrate(&self.curvature, c, order)?, self.modulus)?;
        mod_distance(&lhs, &rhs)
    }

    /// The periods of `ω_f` over `cycles`, reduced mod `c` (the numeric shadow
    /// of `δ₂(f)` together with integrality of `ω_f`).
    pub fn reduced_periods(&self, cycles: &[Chain], order: usize) -> Result<Vec<ModValue>> {
        cycles
            .iter()
            .map(|z| mod_reduce(integrate(&self.curvature, z, order)?, self.modulus))
            .collect()
    }

    /// `max |dω_f|` over the given chart points.
    pub fn closedness_residual(&self, points: &[(String, Vec<f64>)], h: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (chart, x) in points {
            if let Some(f) = crate::chains::FormSource::field_for(&self.curvature, chart) {
                worst = worst.max(fd_exterior_derivative(f, x, h)?.max_abs());
            }
        }
        Ok(worst)
    }

    /// The character with values and curvature multiplied by `c`, valued in
    /// `ℝ/(c·modulus)ℤ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(GbcError::InvalidParameter(format!("cannot scale a character by {c}")));
        }
        let modulus = (self.modulus * c).abs();
        let inner = self.evaluator.clone();
        Self::new(
            format!("{c}·{}", self.name),
            self.degree,
            modulus,
            self.curvature.map(|f| f.scale(c)),
            move |z| mod_reduce(inner(z)?.value() * c, modulus),
        )
    }
}

/// `i₂(ω)(z) = ∫_z ω mod c`, with curvature `dω`.
pub fn i2(omega: AtlasForm, modulus: f64, order: usize) -> Result<DifferentialCharacter> {
    let degree = crate::chains::FormSource::degree(&omega) + 1;
    let curvature = omega.map(|f| f.d(CURVATURE_STEP));
    let curvature = AtlasForm::new(degree, curvature.fields().to_vec());
    DifferentialCharacter::new("i2", degree, modulus, curvature, move |z| {
        mod_reduce(integrate(&omega, z.cycle(), order)?, modulus)
    })
}

/// `χ̂(z) = ∫_y Q + ∫_w χ(∇) mod 1`.
pub fn euler_character_eval(atlas: &SphereAtlas, dec: &SphereDecomposition, settings: &EvalSettings) -> Result<ModValue> {
    dec.validate(atlas, settings)?;
    let y = integrate(&atlas.q_form()?, &dec.y, settings.order)?;
    let w = integrate(&atlas.euler_form()?, &dec.w, settings.order)?;
    mod_reduce(y + w, 1.0)
}

/// `(v*Û)(z) = ∫_y (Q − π̃* ∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt) + ∫_w v*U mod 1`.
pub fn thom_pullback_character_eval(
    atlas: &SphereAtlas,
    v: &SectionField,
    dec: &SphereDecomposition,
    settings: &EvalSettings,
) -> Result<ModValue> {
    dec.validate(atlas, settings)?;
    let (y, w) = thom_terms(atlas, v, dec, settings)?;
    mod_reduce(y + w, 1.0)
}

/// The `y`- and `w`-integrals of the pulled-back Thom character, unreduced.
pub fn thom_terms(
    atlas: &SphereAtlas,
    v: &SectionField,
    dec: &SphereDecomposition,
    settings: &EvalSettings,
) -> Result<(f64, f64)> {
    let y = integrate(&atlas.thom_transgression(v)?, &dec.y, settings.order)?;
    let w = integrate(&atlas.pulled_thom_form(v)?, &dec.w, settings.order)?;
    Ok((y, w))
}

/// Error unless `∂z` integrates every generic test form to within tolerance.
pub fn check_cycle(atlas: &SphereAtlas, z: &Chain, settings: &EvalSettings) -> Result<()> {
    if z.dim() == 0 {
        return Ok(());
    }
    let b = z.boundary()?.simplify();
    if b.is_empty() {
        return Ok(());
    }
    let forms = generic_test_forms(&atlas.bundle.base, b.dim(), settings.test_forms, settings.seed);
    let r = witness_residual(&forms, &b, settings.order)?;
    if r > settings.witness_tol {
        return Err(GbcError::NotACycle(r));
    }
    Ok(())
}

/// `i₂(∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt)(z)`.
pub fn rhs_eval(atlas: &SphereAtlas, v: &SectionField, z: &Chain, settings: &EvalSettings) -> Result<ModValue> {
    check_cycle(atlas, z, settings)?;
    mod_reduce(integrate(&atlas.unit_transgression(v)?, z, settings.order)?, 1.0)
}

/// The Euler character as a [`DifferentialCharacter`] (decomposed cycles only).
pub fn euler_character(atlas: &SphereAtlas, settings: EvalSettings) -> Result<DifferentialCharacter> {
    let a = atlas.clone();
    DifferentialCharacter::new("euler", atlas.bundle.rank(), 1.0, atlas.euler_form()?, move |z| match z {
        CycleData::Decomposed(d) => euler_character_eval(&a, d, &settings),
        CycleData::Cycle(_) => Err(GbcError::InvalidParameter("the Euler character needs a decomposition".into())),
    })
}

/// `v*Û` as a [`DifferentialCharacter`] (decomposed cycles only).
pub fn thom_pullback_character(
    atlas: &SphereAtlas,
    v: &SectionField,
    settings: EvalSettings,
) -> Result<DifferentialCharacter> {
    let (a, s) = (atlas.clone(), v.clone());
    DifferentialCharacter::new("thom-pullback", atlas.bundle.rank(), 1.0, atlas.pulled_thom_form(v)?, move |z| match z {
        CycleData::Decomposed(d) => thom_pullback_character_eval(&a, &s, d, &settings),
        CycleData::Cycle(_) => Err(GbcError::InvalidParameter("the Thom character needs a decomposition".into())),
    })
}

/// The cycle `z` lifted into `SE` by `s/‖s‖`; `π̃_*` of the result is `z`
/// cell by cell.
pub fn lift_by_section(atlas: &SphereAtlas, z: &Chain, s: &SectionField) -> Result<Chain> {
    let bundle = atlas.bundle();
    let mut out = Chain::empty(z.dim());
    for (k, cell) in z.terms() {
        let idx = bundle.chart_index(&cell.chart().name)?;
        let local = s.local(idx)?.clone();
        let min_norm = cell
            .sample_grid(LIFT_GRID)
            .iter()
            .map(|x| local.norm(x))
            .fold(f64::INFINITY, f64::min);
        if !(min_norm > MIN_SECTION_NORM) {
            return Err(GbcError::VanishingSection(min_norm));
        }
        let se = atlas.sphere(idx).clone();
        let (n, r, q) = (bundle.base_dim(), bundle.rank(), cell.dim());
        let (c1, c2, l1, l2, se1) = (cell.clone(), cell.clone(), local.clone(), local, se.clone());
        let lifted = Cell::new(format!("lift({})", cell.label), se.chart.clone(), q, move |u| {
            let x = c1.apply(u);
            se1.point_over(&x, &l1.components(&x))
        })
        .with_jacobian(move |u| {
            let x = c2.apply(u);
            let jz = c2.jacobian(u);
            let ja = se.angle_jacobian(&l2.components(&x));
            let js = l2.jacobian(&x);
            let rows = n + r - 1;
            let mut out = vec![0.0; rows * q];
            out[..n * q].copy_from_slice(&jz[..n * q]);
            for row in 0..r - 1 {
                for col in 0..q {
                    let mut acc = 0.0;
                    for i in 0..r {
                        for a in 0..n {
                            acc += ja[row * r + i] * js[i * n + a] * jz[a * q + col];
                        }
                    }
                    out[(n + row) * q + col] = acc;
                }
            }
            out
        });
        out.push(*k, lifted)?;
    }
    Ok(out)
}

/// Winding of the fiber vector of a lifted rank-2 1-chain, counted in the
/// frame orientation `e₁ → e₂` by unwrapping the fiber angle along each cell.
pub fn lift_winding(y: &Chain, samples: usize) -> Result<f64> {
    if y.dim() != 1 {
        return Err(GbcError::Dimension("winding needs a 1-chain".into()));
    }
    let mut total = 0.0;
    for (k, cell) in y.terms() {
        let psi_axis = cell.chart().dim() - 1;
        let pts = cell.sample_grid(samples.max(2));
        let mut turn = 0.0;
        for pair in pts.windows(2) {
            let d = pair[1][psi_axis] - pair[0][psi_axis];
            turn += d - 2.0 * PI * (d / (2.0 * PI)).round();
        }
        // the fiber angle runs clockwise in the frame
        total -= *k as f64 * turn / (2.0 * PI);
    }
    Ok(total)
}

/// One case of the sphere-bundle identity.
#[derive(Clone, Debug)]
pub struct GbcCase {
    pub id: String,
    pub decomposition: SphereDecomposition,
}

/// `χ̂(z) − (v*Û)(z)` against `i₂(∫₀¹ …)(z)` for one cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GbcCaseReport {
    pub bundle: String,
    pub section: String,
    pub cycle_id: String,
    pub lhs1: f64,
    pub lhs2: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GbcReport {
    pub cases: Vec<GbcCaseReport>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Evaluates both sides of `χ̂ − v*Û = i₂(∫₀¹ a(k) T(v ∧ e^{−Ω_{t,v}}) dt)` on
/// every case, in parallel.
pub fn verify_gbc_identity(
    atlas: &SphereAtlas,
    v: &SectionField,
    cases: &[GbcCase],
    settings: &EvalSettings,
    tolerance: f64,
) -> Result<GbcReport> {
    let cases = cases
        .par_iter()
        .map(|case| {
            let dec = &case.decomposition;
            let lhs1 = euler_character_eval(atlas, dec, settings)?;
            let lhs2 = thom_pullback_character_eval(atlas, v, dec, settings)?;
            let rhs = rhs_eval(atlas, v, &dec.z, settings)?;
            let residual = mod_distance(&(lhs1 - lhs2), &rhs)?;
            Ok(GbcCaseReport {
                bundle: atlas.bundle.name.clone(),
                section: v.name.clone(),
                cycle_id: case.id.clone(),
                lhs1: lhs1.value(),
                lhs2: lhs2.value(),
                rhs: rhs.value(),
                residual,
                tolerance,
                pass: residual < tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    let pass = cases.iter().all(|c| c.pass);
    Ok(GbcReport { cases, max_residual, pass })
}
