//! The suites run by the harness. Each returns one [`CaseRecord`] per check.

pub mod algebra;
pub mod convergence;
pub mod forms;
pub mod gbc;
pub mod oracles;
pub mod pairs;

use std::path::Path;
use std::sync::Arc;

use gbc_core::bundle::{
    builtin, monopole_section, rotation_section, sample_box, shrunken_box, BaseManifold, BuiltinParams,
    BundleWithConnection, SectionField,
};
use gbc_core::exterior::Chart;
use gbc_core::fixture::{load_fixture, load_section, Fixture};
use gbc_core::{GbcError, Result};

use crate::config::{Suite, SuiteConfig};
use crate::report::CaseRecord;

/// The bundle, section and optional fixture a run works on.
#[derive(Clone, Debug)]
pub struct Setup {
    pub bundle: Arc<BundleWithConnection>,
    pub section: SectionField,
    pub fixture: Option<Fixture>,
}

fn is_fixture_path(s: &str) -> bool {
    s.ends_with(".toml") || Path::new(s).is_file()
}

impl Setup {
    pub fn from_config(config: &SuiteConfig) -> Result<Self> {
        let (bundle, fixture) = if is_fixture_path(&config.bundle) {
            let f = load_fixture(&config.bundle)?;
            (f.bundle.clone(), Some(f))
        } else {
            let params = BuiltinParams {
                rank: config.rank,
                base: config.base.clone(),
                charge: config.charge,
            };
            (Arc::new(builtin(&config.bundle, &params)?), None)
        };
        let section = match config.section.as_str() {
            "zero" => SectionField::zero(&bundle),
            "default" => match fixture.as_ref().and_then(|f| f.section.clone()) {
                Some(s) => s,
                None => default_section(&bundle)?,
            },
            path if is_fixture_path(path) => load_section(&bundle, path)?,
            other => return Err(GbcError::UnknownFixture(format!("section `{other}`"))),
        };
        Ok(Self { bundle, section, fixture })
    }

    /// Expected Euler number of the built-in bundles (`None` for custom ones).
    pub fn euler_number(&self) -> Option<f64> {
        let name = &self.bundle.name;
        if let Some(m) = name.strip_prefix("monopole-") {
            return m.parse().ok();
        }
        if name.starts_with("tangent") {
            return Some(2.0);
        }
        if name.starts_with("trivial") {
            return Some(0.0);
        }
        None
    }
}

/// A generic section for each built-in bundle: the monopole section with `m`
/// zeros `P(w) = w^m + 0.4 w − 1.5`, a rotation field on `TS²`, a constant on
/// trivial bundles.
pub fn default_section(bundle: &BundleWithConnection) -> Result<SectionField> {
    let name = &bundle.name;
    if let Some(m) = name.strip_prefix("monopole-").and_then(|m| m.parse::<i32>().ok()) {
        if m < 0 {
            return Err(GbcError::InvalidParameter(
                "no default section for negative charge; use --section zero or a fixture".into(),
            ));
        }
        let m = m as usize;
        let mut coeffs = vec![0.0; m + 1];
        coeffs[0] = -1.5;
        if m >= 2 {
            coeffs[1] = 0.4;
        }
        coeffs[m] += 1.0;
        return monopole_section(bundle, &coeffs);
    }
    if bundle.rank() == 2 && bundle.base == BaseManifold::Sphere && name.starts_with("tangent") {
        return rotation_section(bundle, -1.0, 0.5);
    }
    let value: Vec<f64> = (0..bundle.rank()).map(|i| 0.4 - 1.3 * i as f64).collect();
    Ok(SectionField::constant(bundle, value))
}

/// Deterministic random points inside a chart, away from its boundary.
pub fn chart_points(chart: &Chart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let (lo, hi) = shrunken_box(chart, 0.02);
    sample_box(&lo, &hi, count, seed)
}

/// Splits `total` samples over `parts` groups.
pub fn share(total: usize, parts: usize) -> usize {
    total.div_ceil(parts.max(1))
}

pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    match config.suite {
        Suite::Algebra => algebra::run(config),
        Suite::ChernWeilForms => forms::run(config, &Setup::from_config(config)?),
        Suite::GbcForm => gbc::run_form(config, &Setup::from_config(config)?),
        Suite::GbcCharacter => gbc::run_character(config, &Setup::from_config(config)?),
        Suite::AkPairs => pairs::run(config, &Setup::from_config(config)?),
        Suite::Convergence => convergence::run(config, &Setup::from_config(config)?),
    }
}
