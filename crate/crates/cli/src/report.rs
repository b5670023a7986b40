use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::SuiteConfig;

pub const SCHEMA: &str = "gbc-report/1";
const SIGNIFICANT_DIGITS: usize = 12;

/// One checked case: a residual against a tolerance plus named values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRecord {
    pub id: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(flatten)]
    pub values: Map<String, Value>,
}

impl CaseRecord {
    /// Passes when `residual < tolerance`.
    pub fn below(id: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            residual,
            tolerance,
            pass: residual < tolerance,
            values: Map::new(),
        }
    }

    /// Passes when `residual > tolerance` (negative controls).
    pub fn above(id: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            pass: residual > tolerance,
            ..Self::below(id, residual, tolerance)
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.values.insert(key.to_string(), serde_json::to_value(value).expect("serializable value"));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub suite: &'static str,
    pub config: SuiteConfig,
    pub cases: Vec<CaseRecord>,
    pub max_residual: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl Report {
    pub fn new(config: &SuiteConfig, cases: Vec<CaseRecord>, seconds: f64) -> Self {
        let max_residual = cases.iter().map(|c| c.residual).filter(|r| r.is_finite()).fold(0.0, f64::max);
        Self {
            schema: SCHEMA,
            suite: config.suite.name(),
            config: config.clone(),
            pass: cases.iter().all(|c| c.pass),
            cases,
            max_residual,
            seconds,
        }
    }

    /// The report as JSON with every number rounded to 12 significant digits.
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        round_numbers(&mut v);
        v
    }

    pub fn write_json(&self, out: Option<&Path>) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("reports serialize");
        write_text(out, &text)
    }

    /// `order,residual` rows (convergence studies).
    pub fn write_csv(&self, out: Option<&Path>) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["order", "residual"])?;
        for c in &self.cases {
            if let Some(order) = c.values.get("order") {
                w.write_record([order.to_string(), format!("{:e}", round_significant(c.residual))])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        write_text(out, &String::from_utf8(bytes).expect("CSV is UTF-8"))
    }
}

fn write_text(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

/// `x` rounded to 12 significant decimal digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted floats parse")
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(round_significant(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
