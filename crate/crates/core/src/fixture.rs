//! TOML fixtures: bundles, sections, chains, decomposition cases and
//! (A,k)-pairs, with coefficients given as expression strings over chart
//! coordinates.
//!
//! ```toml
//! [bundle]
//! builtin = "monopole"
//! charge = 2
//!
//! [section]
//! builtin = "monopole"
//! coeffs = [-1.5, 0.0, 1.0]
//!
//! [[chains]]
//! id = "cap"
//! kind = "north_cap"
//! chart = "north"
//! theta = 1.0
//!
//! [[cases]]
//! id = "cap"
//! kind = "bounding"
//! w = "cap"
//! ```
//!
//! Expressions may use the chart coordinates (`theta`, `phi` on `S²`; `x`,
//! `y` on `T²`; `t` on `S¹`; always also `x0, x1, …`), the functions `sin`,
//! `cos`, `exp`, `sqrt` and the constant `pi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use meval::{ContextProvider, Expr, FuncEvalError};
use serde::Deserialize;

use crate::ak_pairs::{dirac_pair, exact_pair, AkPair};
use crate::bundle::{
    builtin, monopole_section, rotation_section, BaseManifold, BuiltinParams, BundleWithConnection, LocalConnection,
    LocalSection, SectionField,
};
use crate::chains::library::{
    coordinate_loop, cube_sphere, latitude_circle, north_cap, polar_rectangle, small_cap, small_circle, south_cap,
};
use crate::chains::{AtlasForm, Cell, Chain};
use crate::diff_char::{lift_by_section, GbcCase, SphereAtlas, SphereDecomposition};
use crate::error::{GbcError, Result};
use crate::exterior::{Chart, FormField, GradedElement};

/// A parsed expression in named variables.
#[derive(Clone, Debug)]
pub struct Expression {
    source: String,
    expr: Expr,
    vars: Arc<Vec<String>>,
}

struct Scope<'a> {
    names: &'a [String],
    values: &'a [f64],
}

impl ContextProvider for Scope<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        if name == "pi" {
            return Some(PI);
        }
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return self.values.get(i).copied();
        }
        name.strip_prefix('x').and_then(|i| i.parse::<usize>().ok()).and_then(|i| self.values.get(i).copied())
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> std::result::Result<f64, FuncEvalError> {
        let f: fn(f64) -> f64 = match name {
            "sin" => f64::sin,
            "cos" => f64::cos,
            "exp" => f64::exp,
            "sqrt" => f64::sqrt,
            _ => return Err(FuncEvalError::UnknownFunction),
        };
        match args {
            [x] => Ok(f(*x)),
            _ => Err(FuncEvalError::NumberArgs(1)),
        }
    }
}

impl Expression {
    /// Parses `source` and checks it evaluates at a generic point.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self> {
        let expr: Expr = source.parse().map_err(|e| GbcError::Parse(format!("`{source}`: {e}")))?;
        let out = Self {
            source: source.to_string(),
            expr,
            vars: Arc::new(vars.iter().map(|v| v.to_string()).collect()),
        };
        let probe: Vec<f64> = (0..vars.len()).map(|i| 0.37 + 0.21 * i as f64).collect();
        out.try_eval(&probe).map_err(|e| GbcError::Parse(format!("`{source}`: {e}")))?;
        Ok(out)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn try_eval(&self, x: &[f64]) -> std::result::Result<f64, meval::Error> {
        self.expr.eval_with_context(Scope { names: &self.vars, values: x })
    }

    /// Value at `x` (NaN if evaluation fails, which parsing rules out).
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }
}

/// Coordinate names of a base manifold's charts.
pub fn coordinate_names(base: &BaseManifold) -> Vec<&'static str> {
    match base {
        BaseManifold::Circle => vec!["t"],
        BaseManifold::Sphere => vec!["theta", "phi"],
        BaseManifold::Torus => vec!["x", "y"],
        BaseManifold::Patch(n) => (0..*n).map(|_| "").collect(),
    }
}

fn parse_all(sources: &[String], vars: &[&str]) -> Result<Vec<Expression>> {
    sources.iter().map(|s| Expression::parse(s, vars)).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub bundle: BundleSpec,
    pub section: Option<SectionSpec>,
    #[serde(default)]
    pub chains: Vec<ChainSpec>,
    #[serde(default)]
    pub cases: Vec<CaseSpec>,
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
}

/// A built-in bundle (`builtin = "monopole" | "tangent_s2" | "trivial"`) or a
/// custom connection on a single chart of `base`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub builtin: Option<String>,
    pub name: Option<String>,
    pub base: Option<String>,
    pub rank: Option<usize>,
    pub charge: Option<i32>,
    #[serde(default)]
    pub charts: Vec<ConnectionSpec>,
}

/// `omega."i,j"` lists the `duᵃ` components of `ω_ij` (1-based, `i < j`).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    pub chart: String,
    #[serde(default)]
    pub omega: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    /// `zero`, `constant`, `monopole` or `tangent`.
    pub builtin: Option<String>,
    pub value: Option<Vec<f64>>,
    pub coeffs: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Restricts a `constant` section to one chart.
    pub chart: Option<String>,
    #[serde(default)]
    pub charts: Vec<LocalSectionSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSectionSpec {
    pub chart: String,
    pub components: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ChainSpec {
    pub id: String,
    pub chart: Option<String>,
    #[serde(flatten)]
    pub kind: ChainKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainKind {
    Latitude { theta: f64 },
    NorthCap { theta: f64 },
    SouthCap { theta: f64 },
    PolarRectangle { theta: [f64; 2], phi: [f64; 2] },
    SmallCircle { center: [f64; 2], radius: f64 },
    SmallCap { center: [f64; 2], radius: f64 },
    CubeSphere,
    CoordinateLoop { axis: usize, point: Vec<f64> },
    Rectangle { lower: Vec<f64>, upper: Vec<f64> },
    Boundary { of: String },
}

#[derive(Clone, Debug, Deserialize)]
pub struct CaseSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: CaseKind,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseKind {
    /// `z = ∂w`, `y = 0`.
    Bounding { w: String },
    /// `z` lifted by `lift` (default: the fixture section), `w = 0`.
    Lifted { z: String, lift: Option<SectionSpec> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairSpec {
    Dirac {
        charge: f64,
        #[serde(default = "unit")]
        modulus: f64,
    },
    /// `(dα, α)` for a 1-form `α` given on the `S²` charts by its `(dθ, dφ)`
    /// components.
    Exact {
        alpha: [String; 2],
        #[serde(default = "unit")]
        modulus: f64,
    },
}

fn unit() -> f64 {
    1.0
}

/// A loaded fixture.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub bundle: Arc<BundleWithConnection>,
    pub section: Option<SectionField>,
    pub chains: Vec<(String, Chain)>,
    pub cases: Vec<GbcCase>,
    pub pairs: Vec<AkPair>,
}

impl Fixture {
    pub fn chain(&self, id: &str) -> Result<&Chain> {
        self.chains
            .iter()
            .find(|(i, _)| i == id)
            .map(|(_, c)| c)
            .ok_or_else(|| GbcError::UnknownFixture(format!("chain `{id}`")))
    }
}

pub fn load_fixture(path: impl AsRef<Path>) -> Result<Fixture> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GbcError::Parse(format!("{}: {e}", path.display())))?;
    parse_fixture(&text)
}

pub fn parse_fixture(text: &str) -> Result<Fixture> {
    let spec: FixtureSpec = toml::from_str(text).map_err(|e| GbcError::Parse(e.to_string()))?;
    build_fixture(&spec)
}

pub fn build_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let bundle = Arc::new(build_bundle(&spec.bundle)?);
    let section = spec.section.as_ref().map(|s| build_section(&bundle, s)).transpose()?;
    let mut chains: Vec<(String, Chain)> = Vec::new();
    for c in &spec.chains {
        if chains.iter().any(|(id, _)| *id == c.id) {
            return Err(GbcError::Parse(format!("duplicate chain id `{}`", c.id)));
        }
        let chain = build_chain(&bundle, c, &chains)?;
        chains.push((c.id.clone(), chain));
    }
    let lookup = |id: &str| {
        chains
            .iter()
            .find(|(i, _)| i == id)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| GbcError::Parse(format!("unknown chain `{id}`")))
    };
    let mut cases = Vec::new();
    if !spec.cases.is_empty() {
        let atlas = SphereAtlas::new(bundle.clone())?;
        for case in &spec.cases {
            let decomposition = match &case.kind {
                CaseKind::Bounding { w } => SphereDecomposition::bounding(lookup(w)?)?,
                CaseKind::Lifted { z, lift } => {
                    let s = match lift {
                        Some(l) => build_section(&bundle, l)?,
                        None => section
                            .clone()
                            .ok_or_else(|| GbcError::Parse(format!("case `{}` lifts by a missing section", case.id)))?,
                    };
                    let z = lookup(z)?;
                    let y = lift_by_section(&atlas, &z, &s)?;
                    SphereDecomposition::lifted(z, y)?
                }
            };
            cases.push(GbcCase {
                id: case.id.clone(),
                decomposition,
            });
        }
    }
    let pairs = spec.pairs.iter().map(build_pair).collect::<Result<Vec<_>>>()?;
    Ok(Fixture {
        bundle,
        section,
        chains,
        cases,
        pairs,
    })
}

fn base_of(spec: &BundleSpec) -> Result<BaseManifold> {
    let name = spec.base.as_deref().unwrap_or("s2");
    BaseManifold::parse(name).ok_or_else(|| GbcError::Parse(format!("unknown base `{name}`")))
}

pub fn build_bundle(spec: &BundleSpec) -> Result<BundleWithConnection> {
    if let Some(name) = &spec.builtin {
        if !spec.charts.is_empty() {
            return Err(GbcError::Parse("a built-in bundle takes no connection charts".into()));
        }
        let defaults = BuiltinParams::default();
        let params = BuiltinParams {
            rank: spec.rank.unwrap_or(defaults.rank),
            base: spec.base.clone().unwrap_or(defaults.base),
            charge: spec.charge.unwrap_or(defaults.charge),
        };
        return builtin(name, &params);
    }
    let base = base_of(spec)?;
    let rank = spec.rank.ok_or_else(|| GbcError::Parse("custom bundle needs `rank`".into()))?;
    let [conn] = spec.charts.as_slice() else {
        return Err(GbcError::Parse("custom bundle needs exactly one connection chart".into()));
    };
    let chart = find_chart(&base, &conn.chart)?;
    let vars = coordinate_names(&base);
    let n = base.dim();
    let mut entries: Vec<(usize, usize, Vec<Expression>)> = Vec::new();
    for (key, comps) in &conn.omega {
        let (i, j) = parse_index_pair(key, rank)?;
        if comps.len() != n {
            return Err(GbcError::Parse(format!("ω_{key} needs {n} components, got {}", comps.len())));
        }
        entries.push((i, j, parse_all(comps, &vars)?));
    }
    let local = LocalConnection::new(chart, rank, move |x| {
        let mut c = vec![0.0; rank * rank * n];
        for (i, j, exprs) in &entries {
            for (a, e) in exprs.iter().enumerate() {
                let v = e.eval(x);
                c[(i * rank + j) * n + a] = v;
                c[(j * rank + i) * n + a] = -v;
            }
        }
        c
    });
    let name = spec.name.clone().unwrap_or_else(|| "custom".into());
    BundleWithConnection::new(name, base, rank, vec![local], Vec::new())
}

fn parse_index_pair(key: &str, rank: usize) -> Result<(usize, usize)> {
    let bad = || GbcError::Parse(format!("connection key `{key}` must be \"i,j\" with 1 ≤ i < j ≤ {rank}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == 0 || i >= j || j > rank {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn find_chart(base: &BaseManifold, name: &str) -> Result<Arc<Chart>> {
    base.charts()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| GbcError::Parse(format!("base `{}` has no chart `{name}`", base.name())))
}

/// The `[section]` table of a TOML file, built over `bundle`. Other tables
/// in the file are ignored.
pub fn load_section(bundle: &BundleWithConnection, path: impl AsRef<Path>) -> Result<SectionField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GbcError::Parse(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| GbcError::Parse(e.to_string()))?;
    let section = table
        .get("section")
        .cloned()
        .ok_or_else(|| GbcError::Parse(format!("{} has no [section] table", path.display())))?;
    let spec: SectionSpec = section.try_into().map_err(|e: toml::de::Error| GbcError::Parse(e.to_string()))?;
    build_section(bundle, &spec)
}

pub fn build_section(bundle: &BundleWithConnection, spec: &SectionSpec) -> Result<SectionField> {
    let (r, n) = (bundle.rank(), bundle.base_dim());
    match spec.builtin.as_deref() {
        Some("zero") => Ok(SectionField::zero(bundle)),
        Some("constant") => {
            let value = spec.value.clone().ok_or_else(|| GbcError::Parse("constant section needs `value`".into()))?;
            if value.len() != r {
                return Err(GbcError::Parse(format!("section value needs {r} components")));
            }
            match &spec.chart {
                None => Ok(SectionField::constant(bundle, value)),
                Some(chart) => {
                    let idx = bundle.chart_index(chart)?;
                    let mut locals = vec![None; bundle.locals().len()];
                    locals[idx] = Some(LocalSection::constant(r, n, value));
                    Ok(SectionField::new(format!("constant@{chart}"), r, locals))
                }
            }
        }
        Some("monopole") => {
            let coeffs = spec.coeffs.clone().ok_or_else(|| GbcError::Parse("monopole section needs `coeffs`".into()))?;
            monopole_section(bundle, &coeffs)
        }
        Some("tangent") => rotation_section(bundle, spec.a.unwrap_or(1.0), spec.b.unwrap_or(0.0)),
        Some(other) => Err(GbcError::UnknownFixture(format!("section `{other}`"))),
        None => {
            if spec.charts.is_empty() {
                return Err(GbcError::Parse("section needs `builtin` or `charts`".into()));
            }
            let vars = coordinate_names(&bundle.base);
            let mut locals: Vec<Option<LocalSection>> = vec![None; bundle.locals().len()];
            for c in &spec.charts {
                if c.components.len() != r {
                    return Err(GbcError::Parse(format!("section on `{}` needs {r} components", c.chart)));
                }
                let exprs = parse_all(&c.components, &vars)?;
                let idx = bundle.chart_index(&c.chart)?;
                locals[idx] = Some(LocalSection::new(r, n, move |x| exprs.iter().map(|e| e.eval(x)).collect()));
            }
            Ok(SectionField::new("custom", r, locals))
        }
    }
}

fn build_chain(bundle: &BundleWithConnection, spec: &ChainSpec, earlier: &[(String, Chain)]) -> Result<Chain> {
    let chart = || -> Result<Arc<Chart>> {
        match &spec.chart {
            Some(name) => Ok(bundle.local(bundle.chart_index(name)?).chart().clone()),
            None => Ok(bundle.locals().last().expect("bundles have charts").chart().clone()),
        }
    };
    let sphere_only = || {
        if bundle.base != BaseManifold::Sphere {
            return Err(GbcError::Parse(format!("chain `{}` needs an S² base", spec.id)));
        }
        Ok(())
    };
    Ok(match &spec.kind {
        ChainKind::Latitude { theta } => {
            sphere_only()?;
            latitude_circle(&chart()?, *theta)
        }
        ChainKind::NorthCap { theta } => {
            sphere_only()?;
            north_cap(&chart()?, *theta)
        }
        ChainKind::SouthCap { theta } => {
            sphere_only()?;
            south_cap(&chart()?, *theta)
        }
        ChainKind::PolarRectangle { theta, phi } => {
            sphere_only()?;
            Chain::from(polar_rectangle(&chart()?, (theta[0], theta[1]), (phi[0], phi[1])))
        }
        ChainKind::SmallCircle { center, radius } => {
            sphere_only()?;
            small_circle(&chart()?, (center[0], center[1]), *radius)
        }
        ChainKind::SmallCap { center, radius } => {
            sphere_only()?;
            small_cap(&chart()?, (center[0], center[1]), *radius)
        }
        ChainKind::CubeSphere => {
            sphere_only()?;
            cube_sphere(&chart()?)
        }
        ChainKind::CoordinateLoop { axis, point } => {
            let c = chart()?;
            if *axis >= c.dim() || point.len() != c.dim() {
                return Err(GbcError::Parse(format!("coordinate loop `{}` does not fit chart `{}`", spec.id, c.name)));
            }
            coordinate_loop(&c, *axis, point)
        }
        ChainKind::Rectangle { lower, upper } => {
            let c = chart()?;
            if lower.len() != c.dim() || upper.len() != c.dim() {
                return Err(GbcError::Parse(format!("rectangle `{}` does not fit chart `{}`", spec.id, c.name)));
            }
            Chain::from(Cell::rectangle(spec.id.clone(), c, lower.clone(), upper.clone()))
        }
        ChainKind::Boundary { of } => {
            let c = earlier
                .iter()
                .find(|(i, _)| i == of)
                .ok_or_else(|| GbcError::Parse(format!("unknown chain `{of}`")))?;
            c.1.boundary()?.simplify()
        }
    })
}

fn build_pair(spec: &PairSpec) -> Result<AkPair> {
    match spec {
        PairSpec::Dirac { charge, modulus } => dirac_pair(*charge, *modulus),
        PairSpec::Exact { alpha, modulus } => {
            let exprs = Arc::new(parse_all(alpha, &coordinate_names(&BaseManifold::Sphere))?);
            let charts = BaseManifold::Sphere.charts();
            let one_forms: Vec<FormField> = charts
                .iter()
                .map(|c| {
                    let e = exprs.clone();
                    FormField::new(c.clone(), 0, 1, move |x| GradedElement::one_form(2, 0, &[e[0].eval(x), e[1].eval(x)]))
                })
                .collect();
            let d = one_forms.iter().map(|f| f.d(1e-4)).collect();
            exact_pair(AtlasForm::new(1, one_forms), AtlasForm::new(2, d), *modulus)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        let e = Expression::parse("sin(theta)^2 + cos(phi) * sqrt(4) - exp(0) + pi", &["theta", "phi"]).unwrap();
        let v = e.eval(&[0.3, 1.1]);
        assert!((v - (0.3f64.sin().powi(2) + 2.0 * 1.1f64.cos() - 1.0 + PI)).abs() < 1e-14);
        assert_eq!(Expression::parse("x0 * x1", &["theta", "phi"]).unwrap().eval(&[2.0, 3.0]), 6.0);
        assert!(matches!(Expression::parse("tan(theta)", &["theta"]), Err(GbcError::Parse(_))));
        assert!(matches!(Expression::parse("rho + 1", &["theta"]), Err(GbcError::Parse(_))));
        assert!(matches!(Expression::parse("1 +", &["theta"]), Err(GbcError::Parse(_))));
    }

    #[test]
    fn builtin_fixture() {
        let f = parse_fixture(
            r#"
            [bundle]
            builtin = "monopole"
            charge = 2

            [section]
            builtin = "monopole"
            coeffs = [-1.5, 0.0, 1.0]

            [[chains]]
            id = "cap"
            kind = "north_cap"
            chart = "north"
            theta = 1.0

            [[chains]]
            id = "z"
            kind = "boundary"
            of = "cap"

            [[cases]]
            id = "filled"
            kind = "bounding"
            w = "cap"

            [[cases]]
            id = "lifted"
            kind = "lifted"
            z = "z"

            [[pairs]]
            kind = "dirac"
            charge = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(f.bundle.rank(), 2);
        assert_eq!(f.chains.len(), 2);
        assert_eq!(f.chain("z").unwrap().dim(), 1);
        assert_eq!(f.cases.len(), 2);
        assert_eq!(f.pairs.len(), 1);
    }

    #[test]
    fn custom_bundle_matches_builtin() {
        let f = parse_fixture(
            r#"
            [bundle]
            name = "custom-monopole"
            base = "s2"
            rank = 2
            [[bundle.charts]]
            chart = "north"
            omega = { "1,2" = ["0", "0.5 * (1 - cos(theta))"] }

            [section]
            charts = [{ chart = "north", components = ["cos(phi) * sin(theta)", "sin(phi) * sin(theta)"] }]
            "#,
        )
        .unwrap();
        let b = builtin("monopole", &BuiltinParams::default()).unwrap();
        let x = [0.8, 0.4];
        let a = f.bundle.curvature(0, &x).unwrap();
        let c = b.curvature(0, &x).unwrap();
        assert!(a.distance(&c) < 1e-8);
        let s = f.section.unwrap();
        assert!((s.local(0).unwrap().components(&x)[1] - 0.4f64.sin() * 0.8f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        let bad = [
            "[bundle]\nbuiltin = \"moebius\"",
            "[bundle]\nrank = 2",
            "[bundle]\nbuiltin = \"monopole\"\n[[chains]]\nid = \"a\"\nkind = \"spiral\"",
            "[bundle]\nbuiltin = \"monopole\"\n[[cases]]\nid = \"a\"\nkind = \"bounding\"\nw = \"missing\"",
            "[bundle]\nrank = 2\n[[bundle.charts]]\nchart = \"north\"\nomega = { \"2,1\" = [\"0\", \"1\"] }",
            "[bundle]\nbuiltin = \"monopole\"\nunexpected = 1",
        ];
        for text in bad {
            assert!(parse_fixture(text).is_err(), "{text}");
        }
        assert!(matches!(parse_fixture("[bundle]\nbuiltin = \"moebius\""), Err(GbcError::UnknownFixture(_))));
    }
}
