//! Integrality, extension and decomposition-independence checks of (A, k)-pairs.

use std::sync::Arc;

use gbc_core::ak_pairs::{decomposition_residual, dirac_pair, random_sphere_chains, AkPair};
use gbc_core::bundle::BaseManifold;
use gbc_core::chains::library::{latitude_circle, north_cap, polar_rectangle, south_cap};
use gbc_core::chains::Chain;
use gbc_core::{Chart, Result};

use super::Setup;
use crate::config::SuiteConfig;
use crate::report::CaseRecord;

/// Number of admissible chains sampled for the integrality check.
pub const SAMPLE_CHAINS: usize = 20;
/// Factor of the negative control.
pub const BROKEN_SCALE: f64 = 1.7;
/// Residual the negative control must exceed.
pub const BROKEN_THRESHOLD: f64 = 0.1;
const EXTENSION_MARGIN: f64 = 0.05;
const LEMMA_LATITUDES: (f64, f64) = (1.9, 0.8);
const BATTERY: usize = 8;
const WITNESS_TOL: f64 = 1e-8;

fn sphere_chart() -> Arc<Chart> {
    BaseManifold::Sphere
        .charts()
        .into_iter()
        .find(|c| c.name == "sphere")
        .expect("the sphere atlas has a global polar chart")
}

/// The first `count` admissible chains of the random battery.
pub fn admissible_chains(pair: &AkPair, count: usize, seed: u64) -> Vec<Chain> {
    let chart = sphere_chart();
    let mut out = Vec::with_capacity(count);
    let mut batch = 0;
    while out.len() < count && batch < 50 {
        for c in random_sphere_chains(&chart, 4 * count, seed.wrapping_add(batch)) {
            if out.len() < count && pair.is_admissible(&c) {
                out.push(c);
            }
        }
        batch += 1;
    }
    out
}

/// Decompositions `z = ∂c + z′` of a latitude circle: through its north cap,
/// with `c = 0`, through an annulus and an inner latitude, and through the
/// reversed south cap.
pub fn latitude_decompositions(theta: f64, inner: f64) -> Vec<(&'static str, Chain, Chain)> {
    let chart = sphere_chart();
    let z = latitude_circle(&chart, theta);
    let none = Chain::empty(2);
    let annulus = Chain::from(polar_rectangle(&chart, (inner, theta), (0.0, 2.0 * std::f64::consts::PI)));
    vec![
        ("cap", north_cap(&chart, theta), Chain::empty(1)),
        ("cycle", none, z),
        ("annulus", annulus, latitude_circle(&chart, inner)),
        ("south_cap", south_cap(&chart, theta).scaled(-1), Chain::empty(1)),
    ]
}

fn pairs(config: &SuiteConfig, setup: &Setup) -> Result<Vec<AkPair>> {
    let from_fixture = setup.fixture.as_ref().map(|f| f.pairs.clone()).unwrap_or_default();
    let pairs = if from_fixture.is_empty() {
        vec![dirac_pair(config.charge as f64, 1.0)?]
    } else {
        from_fixture
    };
    Ok(pairs.into_iter().map(|p| p.with_clearance(config.clearance)).collect())
}

pub fn run(config: &SuiteConfig, setup: &Setup) -> Result<Vec<CaseRecord>> {
    let mut records = Vec::new();
    for pair in pairs(config, setup)? {
        let name = pair.name.clone();
        let ext = pair.extension_residual(config.samples, config.seed, config.fd_step, EXTENSION_MARGIN)?;
        records.push(CaseRecord::below(format!("{name}/extension"), ext, config.tol_form));

        let chains = admissible_chains(&pair, SAMPLE_CHAINS, config.seed);
        let report = pair.check_pair(&chains, config.quad_order, config.tol_int)?;
        let mut rec = CaseRecord::below(format!("{name}/integrality"), report.max_residual, config.tol_int)
            .with("chains", chains.len());
        rec.pass &= chains.len() == SAMPLE_CHAINS;
        if let Some(w) = &report.warning {
            rec = rec.with("warning", w);
        }
        records.push(rec);

        let (theta, inner) = LEMMA_LATITUDES;
        let decs = latitude_decompositions(theta, inner);
        let z = latitude_circle(&sphere_chart(), theta);
        let mut spread = 0.0f64;
        let mut witness = 0.0f64;
        let (_, c0, z0) = &decs[0];
        for (_, c, zp) in &decs[1..] {
            spread = spread.max(pair.lemma1_check((c0, z0), (c, zp), config.quad_order)?);
        }
        for (_, c, zp) in &decs {
            witness = witness.max(decomposition_residual(&BaseManifold::Sphere, &z, c, zp, BATTERY, config.quad_order)?);
        }
        let value = pair.eval_induced_character(c0, z0, config.quad_order)?;
        let mut rec = CaseRecord::below(format!("{name}/decomposition_independence"), spread, config.tol_mod)
            .with("decompositions", decs.iter().map(|d| d.0).collect::<Vec<_>>())
            .with("value", value.value())
            .with("witness_residual", witness);
        // every decomposition must actually bound the same cycle
        rec.pass &= witness < WITNESS_TOL;
        records.push(rec);

        // scaling cannot break integrality when every sampled period is zero
        let mut largest = 0.0f64;
        for c in &chains {
            largest = largest.max(pair.period(c, config.quad_order)?.abs());
        }
        if largest > 0.5 * pair.modulus {
            let broken = pair.scaled(BROKEN_SCALE);
            let report = broken.check_pair(&chains, config.quad_order, config.tol_int)?;
            records.push(
                CaseRecord::above(format!("{name}/scaled_control"), report.max_residual, BROKEN_THRESHOLD)
                    .with("scale", BROKEN_SCALE),
            );
        }
    }
    Ok(records)
}
