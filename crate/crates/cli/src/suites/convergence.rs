//! Quadrature convergence of the Euler-number integral.

use gbc_core::{GbcError, Result};

use super::forms::euler_integral;
use super::Setup;
use crate::config::SuiteConfig;
use crate::report::CaseRecord;

/// Required error reduction between consecutive orders.
pub const REDUCTION: f64 = 100.0;

/// `|∫_X χ(∇) − e(E)|` at each order. The first order is held to `tol-form`;
/// every later one must cut the previous error by [`REDUCTION`].
pub fn run(config: &SuiteConfig, setup: &Setup) -> Result<Vec<CaseRecord>> {
    let expected = setup
        .euler_number()
        .ok_or_else(|| GbcError::InvalidParameter(format!("no known Euler number for `{}`", setup.bundle.name)))?;
    let mut records: Vec<CaseRecord> = Vec::new();
    let mut previous: Option<f64> = None;
    for &order in &config.orders {
        let value = euler_integral(&setup.bundle, order)?
            .ok_or_else(|| GbcError::InvalidParameter(format!("no closed chain over {}", setup.bundle.base.name())))?;
        let err = (value - expected).abs();
        let record = match previous {
            None => CaseRecord::below(format!("order_{order}"), err, config.tol_form),
            Some(prev) => {
                let mut r = CaseRecord::below(format!("order_{order}"), err, prev / REDUCTION);
                r.pass = prev >= REDUCTION * err;
                r.with("ratio", if err > 0.0 { prev / err } else { f64::INFINITY })
            }
        };
        records.push(record.with("order", order).with("value", value).with("expected", expected));
        previous = Some(err);
    }
    Ok(records)
}
