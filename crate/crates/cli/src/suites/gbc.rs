//! The Gauss–Bonnet–Chern identity as forms and as differential characters.

use std::f64::consts::PI;

use rayon::prelude::*;

use gbc_core::bundle::{BaseManifold, BundleWithConnection, LocalSection, SectionField, TotalSpace};
use gbc_core::chains::library::{coordinate_loop, latitude_circle, north_cap};
use gbc_core::chains::{Cell, Chain};
use gbc_core::chern_weil::{euler_form, thom_form, transgression_unit_interval};
use gbc_core::diff_char::{lift_by_section, verify_gbc_identity, EvalSettings, GbcCase, SphereAtlas, SphereDecomposition};
use gbc_core::exterior::pullback_form;
use gbc_core::{GbcError, Result};

use super::{chart_points, share, Setup};
use crate::config::SuiteConfig;
use crate::report::CaseRecord;

/// Latitude of the standard cycles on `S²`.
pub const LATITUDE: f64 = PI / 3.0;

/// `max |χ(∇) − v*U − d T_v|` at random base points of every chart where the
/// section is given.
pub fn run_form(config: &SuiteConfig, setup: &Setup) -> Result<Vec<CaseRecord>> {
    let bundle = &setup.bundle;
    let v = &setup.section;
    let charts: Vec<usize> = (0..bundle.locals().len()).filter(|&c| v.locals()[c].is_some()).collect();
    if charts.is_empty() {
        return Err(GbcError::InvalidParameter(format!("section `{}` is not given on any chart", v.name)));
    }
    let per_chart = share(config.samples, charts.len());
    let mut cases = Vec::new();
    for chart in charts {
        let total = TotalSpace::new(bundle.clone(), chart);
        let vu = pullback_form(&total.section_map(v)?, &thom_form(&total, 1.0)?)?;
        let lhs = euler_form(bundle, chart)?.sub(&vu)?;
        let rhs = transgression_unit_interval(bundle, v, chart)?.d(config.fd_step);
        let pts = chart_points(bundle.local(chart).chart(), per_chart, config.seed + chart as u64);
        let worst = pts
            .par_iter()
            .map(|x| lhs.eval_unchecked(x).distance(&rhs.eval_unchecked(x)))
            .reduce(|| 0.0, f64::max);
        let name = &bundle.local(chart).chart().name;
        cases.push(
            CaseRecord::below(format!("gbc_form_{name}"), worst, config.tol_form)
                .with("bundle", &bundle.name)
                .with("section", &v.name)
                .with("points", pts.len()),
        );
    }
    Ok(cases)
}

/// A section given on one chart by a constant frame vector.
fn chart_constant(bundle: &BundleWithConnection, chart: usize, value: Vec<f64>) -> SectionField {
    let mut locals = vec![None; bundle.locals().len()];
    locals[chart] = Some(LocalSection::constant(bundle.rank(), bundle.base_dim(), value));
    SectionField::new("frame", bundle.rank(), locals)
}

fn lifted(atlas: &SphereAtlas, id: &str, z: &Chain, s: &SectionField) -> Result<Option<GbcCase>> {
    match lift_by_section(atlas, z, s) {
        Ok(y) => Ok(Some(GbcCase {
            id: id.into(),
            decomposition: SphereDecomposition::lifted(z.clone(), y)?,
        })),
        Err(GbcError::VanishingSection(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Standard decompositions: on `S²` the latitude `θ = π/3` as the boundary of
/// its cap, lifted by `v` and lifted by a frame vector; on `T²` a bounding box
/// and a coordinate loop lifted by `v` and by a frame vector.
pub fn standard_cases(atlas: &SphereAtlas, v: &SectionField) -> Result<Vec<GbcCase>> {
    let bundle = atlas.bundle();
    let frame = chart_constant(bundle, 0, (0..bundle.rank()).map(|i| if i == 1 { 1.0 } else { 0.0 }).collect());
    let chart = bundle.local(0).chart().clone();
    let (bounding, z) = match bundle.base {
        BaseManifold::Sphere => (north_cap(&chart, LATITUDE), latitude_circle(&chart, LATITUDE)),
        BaseManifold::Torus => (
            Chain::from(Cell::rectangle("box", chart.clone(), vec![0.3, 0.3], vec![1.9, 2.5])),
            coordinate_loop(&chart, 0, &[0.0, 2.0]),
        ),
        ref other => {
            return Err(GbcError::InvalidParameter(format!(
                "no standard cycles on {}; supply cases in a fixture",
                other.name()
            )))
        }
    };
    let mut cases = vec![GbcCase {
        id: "bounding".into(),
        decomposition: SphereDecomposition::bounding(bounding)?,
    }];
    cases.extend(lifted(atlas, "lift_section", &z, v)?);
    cases.extend(lifted(atlas, "lift_frame", &z, &frame)?);
    Ok(cases)
}

fn same_cycle(a: &Chain, b: &Chain) -> bool {
    a.plus(&b.scaled(-1)).map(|d| d.simplify().is_empty()).unwrap_or(false)
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `χ̂(z) − (v*Û)(z) = i₂(T_v)(z) mod ℤ` on every case, plus the spread of each
/// side across decompositions of the same cycle.
pub fn run_character(config: &SuiteConfig, setup: &Setup) -> Result<Vec<CaseRecord>> {
    let atlas = SphereAtlas::new(setup.bundle.clone())?;
    let v = &setup.section;
    let cases = match &setup.fixture {
        Some(f) if !f.cases.is_empty() => f.cases.clone(),
        _ => standard_cases(&atlas, v)?,
    };
    let settings = EvalSettings {
        order: config.quad_order,
        seed: config.seed,
        ..EvalSettings::default()
    };
    let report = verify_gbc_identity(&atlas, v, &cases, &settings, config.tol_mod)?;
    let mut records: Vec<CaseRecord> = report
        .cases
        .iter()
        .map(|c| {
            CaseRecord {
                id: c.cycle_id.clone(),
                residual: c.residual,
                tolerance: c.tolerance,
                pass: c.pass,
                values: Default::default(),
            }
            .with("bundle", &c.bundle)
            .with("section", &c.section)
            .with("lhs1", c.lhs1)
            .with("lhs2", c.lhs2)
            .with("rhs", c.rhs)
        })
        .collect();
    for (i, a) in cases.iter().enumerate() {
        for (j, b) in cases.iter().enumerate().skip(i + 1) {
            if !same_cycle(&a.decomposition.z, &b.decomposition.z) {
                continue;
            }
            let (ra, rb) = (&report.cases[i], &report.cases[j]);
            let spread = circle_distance(ra.lhs1, rb.lhs1).max(circle_distance(ra.lhs2, rb.lhs2));
            records.push(
                CaseRecord::below(format!("well_defined_{}_{}", a.id, b.id), spread, config.tol_mod)
                    .with("lhs1_spread", circle_distance(ra.lhs1, rb.lhs1))
                    .with("lhs2_spread", circle_distance(ra.lhs2, rb.lhs2)),
            );
        }
    }
    Ok(records)
}
