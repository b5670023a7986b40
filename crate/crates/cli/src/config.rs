use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use gbc_core::{GbcError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Algebra,
    ChernWeilForms,
    GbcForm,
    GbcCharacter,
    AkPairs,
    Convergence,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::ChernWeilForms => "chern_weil_forms",
            Suite::GbcForm => "gbc_form",
            Suite::GbcCharacter => "gbc_character",
            Suite::AkPairs => "ak_pairs",
            Suite::Convergence => "convergence",
        }
    }
}

/// Command-line flags; each falls back to a `GBC_*` environment variable and
/// then to its default.
#[derive(Clone, Debug, Parser)]
#[command(name = "gbc", version, about = "Chern–Weil, Mathai–Quillen and differential-character checks")]
pub struct Cli {
    #[arg(long, env = "GBC_SUITE", value_enum)]
    pub suite: Suite,
    /// Built-in bundle (monopole, tangent_s2, trivial) or a TOML fixture path.
    #[arg(long, env = "GBC_BUNDLE", default_value = "monopole")]
    pub bundle: String,
    /// `default`, `zero`, or a TOML fixture whose `[section]` is used.
    #[arg(long, env = "GBC_SECTION", default_value = "default")]
    pub section: String,
    #[arg(long, env = "GBC_CHARGE", default_value_t = 2, allow_negative_numbers = true)]
    pub charge: i32,
    /// Base of the trivial bundle (s1, s2, t2).
    #[arg(long, env = "GBC_BASE", default_value = "t2")]
    pub base: String,
    #[arg(long, env = "GBC_RANK", default_value_t = 2)]
    pub rank: usize,
    #[arg(long = "quad-order", env = "GBC_QUAD_ORDER", default_value_t = 32)]
    pub quad_order: usize,
    #[arg(long = "fd-step", env = "GBC_FD_STEP", default_value_t = 1e-4)]
    pub fd_step: f64,
    #[arg(long = "tol-form", env = "GBC_TOL_FORM", default_value_t = 1e-5)]
    pub tol_form: f64,
    #[arg(long = "tol-mod", env = "GBC_TOL_MOD", default_value_t = 1e-5)]
    pub tol_mod: f64,
    #[arg(long = "tol-int", env = "GBC_TOL_INT", default_value_t = 1e-5)]
    pub tol_int: f64,
    #[arg(long, env = "GBC_CLEARANCE", default_value_t = 1e-3)]
    pub clearance: f64,
    /// Worker threads (0: one per core).
    #[arg(long, env = "GBC_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Report path (JSON; CSV for the convergence suite). Standard output if absent.
    #[arg(long, env = "GBC_OUT")]
    pub out: Option<PathBuf>,
    /// Quadrature orders for the convergence suite.
    #[arg(long, env = "GBC_ORDERS", value_delimiter = ',', default_value = "8,16,32")]
    pub orders: Vec<usize>,
    #[arg(long, env = "GBC_SAMPLES", default_value_t = 100)]
    pub samples: usize,
    #[arg(long, env = "GBC_SEED", default_value_t = 7)]
    pub seed: u64,
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub bundle: String,
    pub section: String,
    pub charge: i32,
    pub base: String,
    pub rank: usize,
    pub quad_order: usize,
    pub fd_step: f64,
    pub tol_form: f64,
    pub tol_mod: f64,
    pub tol_int: f64,
    pub clearance: f64,
    pub jobs: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub orders: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl SuiteConfig {
    /// Defaults for `suite` (the same values as the command-line defaults).
    pub fn new(suite: Suite) -> Self {
        Cli::parse_from(["gbc", "--suite", suite.name()]).try_into().expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [
            ("tol-form", self.tol_form),
            ("tol-mod", self.tol_mod),
            ("tol-int", self.tol_int),
            ("fd-step", self.fd_step),
            ("clearance", self.clearance),
        ] {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(GbcError::InvalidParameter(format!("{name} must be positive, got {tol}")));
            }
        }
        if self.quad_order < 4 {
            return Err(GbcError::InvalidParameter(format!("quad-order must be at least 4, got {}", self.quad_order)));
        }
        if self.suite == Suite::Convergence {
            if self.orders.len() < 2 {
                return Err(GbcError::InvalidParameter("a convergence study needs at least two orders".into()));
            }
            if self.orders.iter().any(|&o| o == 0) {
                return Err(GbcError::InvalidParameter("quadrature orders must be positive".into()));
            }
        }
        if self.samples == 0 {
            return Err(GbcError::InvalidParameter("samples must be positive".into()));
        }
        Ok(())
    }
}

impl TryFrom<Cli> for SuiteConfig {
    type Error = GbcError;

    fn try_from(c: Cli) -> Result<Self> {
        let config = Self {
            suite: c.suite,
            bundle: c.bundle,
            section: c.section,
            charge: c.charge,
            base: c.base,
            rank: c.rank,
            quad_order: c.quad_order,
            fd_step: c.fd_step,
            tol_form: c.tol_form,
            tol_mod: c.tol_mod,
            tol_int: c.tol_int,
            clearance: c.clearance,
            jobs: c.jobs,
            out: c.out,
            orders: c.orders,
            samples: c.samples,
            seed: c.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
