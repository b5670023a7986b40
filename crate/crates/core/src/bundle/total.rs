//! Total space `E`, the tautological section, and the sphere bundle `SE`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{BaseManifold, BundleWithConnection, LocalConnection, LocalSection, SectionField};
use crate::error::{GbcError, Result};
use crate::exterior::{Chart, SmoothMap};

/// Fiber radius cap for truncated fiber integrals (`e^{−ρ²/2} < 2·10⁻⁸` beyond).
pub const RHO_MAX: f64 = 6.0;

/// One base chart times the fiber `ℝʳ`, coordinates `(u, x)`.
#[derive(Clone, Debug)]
pub struct TotalSpace {
    pub bundle: Arc<BundleWithConnection>,
    pub base_chart: usize,
    pub chart: Arc<Chart>,
    /// `(u, x) ↦ u`.
    pub projection: SmoothMap,
    /// `π*∇^E` on the total-space chart.
    pub connection: LocalConnection,
}

impl TotalSpace {
    pub fn new(bundle: Arc<BundleWithConnection>, base_chart: usize) -> Self {
        let local = bundle.local(base_chart).clone();
        let base = local.chart().clone();
        let (n, r) = (base.dim(), bundle.rank());
        let fiber_box = RHO_MAX + 1.0;
        let mut lower = base.lower.clone();
        let mut upper = base.upper.clone();
        lower.extend(std::iter::repeat(-fiber_box).take(r));
        upper.extend(std::iter::repeat(fiber_box).take(r));
        let mut chart = Chart::new(format!("{}/E", base.name), lower, upper).unwrap();
        for (a, p) in base.periods.iter().enumerate() {
            if let Some(p) = p {
                chart = chart.with_period(a, *p);
            }
        }
        chart = chart.with_orientation(base.orientation);
        let chart = Arc::new(chart);
        let p = n + r;
        let projection = SmoothMap::new(chart.clone(), base.clone(), move |x| x[..n].to_vec()).with_jacobian(move |_| {
            let mut j = vec![0.0; n * p];
            for a in 0..n {
                j[a * p + a] = 1.0;
            }
            j
        });
        // pad ω and ∂ω with zero fiber-coordinate components
        let (l1, l2) = (local.clone(), local.clone());
        let mut connection = LocalConnection::new(chart.clone(), r, move |x| {
            let c = l1.coefficients(&x[..n]);
            let mut out = vec![0.0; r * r * p];
            for ij in 0..r * r {
                out[ij * p..ij * p + n].copy_from_slice(&c[ij * n..(ij + 1) * n]);
            }
            out
        });
        if local.has_analytic_derivative() {
            connection = connection.with_derivative(move |x| {
                let d = l2.derivative_coefficients(&x[..n]);
                let mut out = vec![0.0; r * r * p * p];
                for ij in 0..r * r {
                    for a in 0..n {
                        for b in 0..n {
                            out[(ij * p + a) * p + b] = d[(ij * n + a) * n + b];
                        }
                    }
                }
                out
            });
        }
        Self {
            bundle,
            base_chart,
            chart,
            projection,
            connection,
        }
    }

    pub fn base_dim(&self) -> usize {
        self.bundle.base_dim()
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn base_chart(&self) -> &Arc<Chart> {
        self.projection.target()
    }

    /// `π*E → E` as a bundle over the total-space chart.
    pub fn pullback_bundle(&self) -> BundleWithConnection {
        BundleWithConnection::new(
            format!("π*{}", self.bundle.name),
            BaseManifold::Patch(self.dim()),
            self.rank(),
            vec![self.connection.clone()],
            Vec::new(),
        )
        .expect("single local connection")
    }

    /// `u ↦ (u, s(u))` for a section on the same base chart.
    pub fn section_map(&self, s: &SectionField) -> Result<SmoothMap> {
        let local = s.local(self.base_chart)?.clone();
        let local2 = local.clone();
        let (n, r) = (self.base_dim(), self.rank());
        let p = n + r;
        Ok(SmoothMap::new(self.base_chart().clone(), self.chart.clone(), move |u| {
            let mut x = u.to_vec();
            x.extend(local.components(u));
            x
        })
        .with_jacobian(move |u| {
            let js = local2.jacobian(u);
            let mut j = vec![0.0; p * n];
            for a in 0..n {
                j[a * n + a] = 1.0;
            }
            for i in 0..r {
                j[(n + i) * n..(n + i + 1) * n].copy_from_slice(&js[i * n..(i + 1) * n]);
            }
            j
        }))
    }
}

/// The tautological section `x(e) = e` of `π*E → E`.
pub fn tautological_section(total: &TotalSpace) -> SectionField {
    let (n, r) = (total.base_dim(), total.rank());
    let p = n + r;
    let local = LocalSection::new(r, p, move |x| x[n..].to_vec()).with_jacobian(move |_| {
        let mut j = vec![0.0; r * p];
        for i in 0..r {
            j[i * p + n + i] = 1.0;
        }
        j
    });
    SectionField::new("tautological", r, vec![Some(local)])
}

/// Unit sphere bundle over one base chart with angle coordinates on the fiber.
///
/// Rank 2 uses one angle ψ (unwrapped, period 2π) with inclusion
/// `ψ ↦ (cos ψ, −sin ψ)`. Higher ranks use hyperspherical angles with the
/// same orientation rule: `det[x, ∂x/∂angles] < 0`.
#[derive(Clone, Debug)]
pub struct SphereBundle {
    pub total: TotalSpace,
    pub chart: Arc<Chart>,
    /// `SE → E`.
    pub inclusion: SmoothMap,
    /// `SE → X`.
    pub projection: SmoothMap,
    flip: bool,
}

impl SphereBundle {
    pub fn rank(&self) -> usize {
        self.total.rank()
    }

    pub fn base_dim(&self) -> usize {
        self.total.base_dim()
    }

    /// Unit vector for fiber angles.
    pub fn unit_vector(&self, angles: &[f64]) -> Vec<f64> {
        unit_vector(angles, self.flip)
    }

    /// Fiber angles of a nonzero vector (the last angle in (−π, π]).
    pub fn angles_of(&self, x: &[f64]) -> Vec<f64> {
        let r = x.len();
        let mut v = x.to_vec();
        if self.flip {
            v[r - 1] = -v[r - 1];
        }
        let mut angles = Vec::with_capacity(r - 1);
        for i in 0..r - 2 {
            let tail: f64 = v[i..].iter().map(|c| c * c).sum::<f64>().sqrt();
            angles.push(if tail == 0.0 { 0.0 } else { (v[i] / tail).clamp(-1.0, 1.0).acos() });
        }
        angles.push(v[r - 1].atan2(v[r - 2]));
        angles
    }

    /// `∂(angles)/∂x` (row-major `(r−1) × r`) at a nonzero vector, using
    /// orthogonality of the angle coordinate directions.
    pub fn angle_jacobian(&self, x: &[f64]) -> Vec<f64> {
        let r = x.len();
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let angles = self.angles_of(x);
        let jac = unit_jacobian(&angles, self.flip);
        let mut out = vec![0.0; (r - 1) * r];
        for k in 0..r - 1 {
            let col: Vec<f64> = (0..r).map(|i| jac[i * (r - 1) + k]).collect();
            let n2: f64 = col.iter().map(|c| c * c).sum();
            for i in 0..r {
                out[k * r + i] = col[i] / (n2 * norm);
            }
        }
        out
    }

    /// `(u, angles) ↦ (u, angles')` for base coordinates `u` and fiber vector `v`.
    pub fn point_over(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut q = u.to_vec();
        q.extend(self.angles_of(v));
        q
    }
}

fn unit_vector(angles: &[f64], flip: bool) -> Vec<f64> {
    let r = angles.len() + 1;
    let mut x = vec![0.0; r];
    let mut prod = 1.0;
    for i in 0..r - 1 {
        x[i] = prod * angles[i].cos();
        prod *= angles[i].sin();
    }
    x[r - 1] = prod;
    if flip {
        x[r - 1] = -x[r - 1];
    }
    x
}

/// `∂x/∂angles`, row-major `r × (r−1)`.
fn unit_jacobian(angles: &[f64], flip: bool) -> Vec<f64> {
    let m = angles.len();
    let r = m + 1;
    let mut j = vec![0.0; r * m];
    for i in 0..r {
        // xᵢ = Π_{l<i} sin a_l · (cos aᵢ if i < m else 1)
        for k in 0..m {
            let mut v = 1.0;
            for (l, &a) in angles.iter().enumerate().take(i.min(m)) {
                v *= if l == k { a.cos() } else { a.sin() };
            }
            if i < m {
                v *= if k == i { -angles[i].sin() } else { angles[i].cos() };
            }
            if k > i {
                v = 0.0;
            }
            j[i * m + k] = v;
        }
    }
    if flip {
        for k in 0..m {
            j[(r - 1) * m + k] = -j[(r - 1) * m + k];
        }
    }
    j
}

fn orientation_det(angles: &[f64], flip: bool) -> f64 {
    let r = angles.len() + 1;
    let x = unit_vector(angles, flip);
    let j = unit_jacobian(angles, flip);
    let mut m = vec![0.0; r * r];
    for i in 0..r {
        m[i * r] = x[i];
        for k in 0..r - 1 {
            m[i * r + k + 1] = j[i * (r - 1) + k];
        }
    }
    super::determinant(&m, r)
}

/// The sphere bundle over base chart `base_chart`.
pub fn sphere_bundle(bundle: Arc<BundleWithConnection>, base_chart: usize) -> Result<SphereBundle> {
    let r = bundle.rank();
    if r < 2 {
        return Err(GbcError::InvalidParameter(format!("sphere bundle needs rank ≥ 2, got {r}")));
    }
    let total = TotalSpace::new(bundle, base_chart);
    let base = total.base_chart().clone();
    let n = base.dim();
    let generic: Vec<f64> = (0..r - 1).map(|i| 0.7 + 0.3 * i as f64).collect();
    let flip = orientation_det(&generic, false) > 0.0;

    let mut lower = base.lower.clone();
    let mut upper = base.upper.clone();
    for _ in 0..r - 2 {
        lower.push(0.0);
        upper.push(PI);
    }
    lower.push(-4.0 * PI);
    upper.push(4.0 * PI);
    let mut chart = Chart::new(format!("{}/SE", base.name), lower, upper)?.with_period(n + r - 2, 2.0 * PI);
    for (a, p) in base.periods.iter().enumerate() {
        if let Some(p) = p {
            chart = chart.with_period(a, *p);
        }
    }
    let chart = Arc::new(chart);
    let q = n + r - 1;
    let p = n + r;
    let inclusion = SmoothMap::new(chart.clone(), total.chart.clone(), move |s| {
        let mut x = s[..n].to_vec();
        x.extend(unit_vector(&s[n..], flip));
        x
    })
    .with_jacobian(move |s| {
        let uj = unit_jacobian(&s[n..], flip);
        let mut j = vec![0.0; p * q];
        for a in 0..n {
            j[a * q + a] = 1.0;
        }
        for i in 0..r {
            for k in 0..r - 1 {
                j[(n + i) * q + n + k] = uj[i * (r - 1) + k];
            }
        }
        j
    });
    let projection = SmoothMap::new(chart.clone(), base, move |s| s[..n].to_vec()).with_jacobian(move |_| {
        let mut j = vec![0.0; n * q];
        for a in 0..n {
            j[a * q + a] = 1.0;
        }
        j
    });
    Ok(SphereBundle {
        total,
        chart,
        inclusion,
        projection,
        flip,
    })
}
