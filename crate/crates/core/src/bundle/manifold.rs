use std::f64::consts::PI;
use std::sync::Arc;

use crate::exterior::Chart;

/// Base manifolds of the built-in fixtures.
///
/// Every chart of a given base uses the same coordinates: `(θ, φ)`
/// spherical angles for `S²` (φ unwrapped, period 2π), angles for `S¹` and
/// `T²`. `Patch(n)` is an arbitrary coordinate patch of ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseManifold {
    Circle,
    Sphere,
    Torus,
    Patch(usize),
}

impl BaseManifold {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "s1" | "circle" => Some(Self::Circle),
            "s2" | "sphere" => Some(Self::Sphere),
            "t2" | "torus" => Some(Self::Torus),
            _ => name.strip_prefix("patch").and_then(|n| n.parse().ok()).map(Self::Patch),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Circle => "s1".into(),
            Self::Sphere => "s2".into(),
            Self::Torus => "t2".into(),
            Self::Patch(n) => format!("patch{n}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Circle => 1,
            Self::Sphere | Self::Torus => 2,
            Self::Patch(n) => *n,
        }
    }

    /// Standard charts: `S²` has `north` (θ < 3π/4), `south` (θ > π/4)
    /// and the full spherical patch `sphere`.
    pub fn charts(&self) -> Vec<Arc<Chart>> {
        let unwrap = 4.0 * PI;
        match self {
            Self::Circle => vec![Arc::new(
                Chart::new("circle", vec![-unwrap], vec![unwrap]).unwrap().with_period(0, 2.0 * PI),
            )],
            Self::Sphere => [("north", 0.0, 0.75 * PI), ("south", 0.25 * PI, PI), ("sphere", 0.0, PI)]
                .into_iter()
                .map(|(name, lo, hi)| {
                    let mut chart = Chart::new(name, vec![lo, -unwrap], vec![hi, unwrap]).unwrap().with_period(1, 2.0 * PI);
                    // the poles
                    for pole in [0.0, PI] {
                        if pole >= lo && pole <= hi {
                            chart = chart.with_collapsed(0, pole, vec![1]);
                        }
                    }
                    Arc::new(chart)
                })
                .collect(),
            Self::Torus => vec![Arc::new(
                Chart::new("torus", vec![-unwrap, -unwrap], vec![unwrap, unwrap])
                    .unwrap()
                    .with_period(0, 2.0 * PI)
                    .with_period(1, 2.0 * PI),
            )],
            Self::Patch(n) => vec![Arc::new(Chart::euclidean("patch", *n))],
        }
    }

    /// Smooth embedding coordinates used to build global test functions.
    pub fn embedding(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Circle => vec![x[0].cos(), x[0].sin()],
            Self::Sphere => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                vec![st * cp, st * sp, ct]
            }
            Self::Torus => vec![x[0].cos(), x[0].sin(), x[1].cos(), x[1].sin()],
            Self::Patch(_) => x.to_vec(),
        }
    }

    /// Jacobian of [`Self::embedding`], row-major.
    pub fn embedding_jacobian(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Circle => vec![-x[0].sin(), x[0].cos()],
            Self::Sphere => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                vec![ct * cp, -st * sp, ct * sp, st * cp, -st, 0.0]
            }
            Self::Torus => vec![
                -x[0].sin(),
                0.0,
                x[0].cos(),
                0.0,
                0.0,
                -x[1].sin(),
                0.0,
                x[1].cos(),
            ],
            Self::Patch(n) => crate::exterior::identity_matrix(*n),
        }
    }

    /// Closed 1-forms that are not exact, as constant coefficient vectors.
    pub fn harmonic_one_forms(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Circle => vec![vec![1.0]],
            Self::Torus => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            _ => Vec::new(),
        }
    }

    /// Coefficient of the Riemannian volume form in chart coordinates.
    pub fn volume_density(&self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => x[0].sin(),
            _ => 1.0,
        }
    }
}
