use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

type ValueFn = dyn Fn(&[C64]) -> f64 + Send + Sync;
type HessFn = dyn Fn(&[C64]) -> DMatrix<C64> + Send + Sync;

/// User-supplied potential with an analytic mixed Hessian.
#[derive(Clone)]
pub struct CustomPotential {
    pub name: String,
    value: Arc<ValueFn>,
    mixed_hessian: Arc<HessFn>,
}

impl CustomPotential {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[C64]) -> f64 + Send + Sync + 'static,
        mixed_hessian: impl Fn(&[C64]) -> DMatrix<C64> + Send + Sync + 'static,
    ) -> Self {
        CustomPotential { name: name.into(), value: Arc::new(value), mixed_hessian: Arc::new(mixed_hessian) }
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("name", &self.name).finish()
    }
}

/// Kähler potential `F(z, z̄)` on a coordinate domain.
///
/// Conventions: `H_{jk̄} = ∂²F/∂z_j∂z̄_k`, real metric `2 Re(H dz⊗dz̄)`,
/// volume density `ρ = 2ⁿ det H` against Lebesgue measure on `ℝ²ⁿ`, and
/// positive Laplacian `Δ_g = −2 tr(H⁻¹ ∂∂̄)`. With `F = |z|²/2` these are
/// the Euclidean metric, Lebesgue measure and `−Σ(∂²_x + ∂²_y)`.
#[derive(Clone, Debug)]
pub enum Potential {
    /// `F = c |z|² / 2`.
    Euclidean { scale: f64 },
    /// `F = c log(1 + |z|²)`, the Fubini–Study potential in an affine chart.
    FubiniStudy { scale: f64 },
    Custom(CustomPotential),
}

impl Potential {
    pub fn euclidean() -> Self {
        Potential::Euclidean { scale: 1.0 }
    }

    pub fn fubini_study(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Potential::FubiniStudy { scale })
    }

    /// Config keys: `potential = "euclidean" | "fubini-study"`, `scale`.
    pub fn from_config(kind: &str, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        match kind {
            "euclidean" => Ok(Potential::Euclidean { scale }),
            "fubini-study" => Ok(Potential::FubiniStudy { scale }),
            other => Err(Error::Config(format!(
                "unknown potential {other:?} (expected \"euclidean\" or \"fubini-study\")"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Potential::Euclidean { .. } => "euclidean",
            Potential::FubiniStudy { .. } => "fubini-study",
            Potential::Custom(c) => &c.name,
        }
    }

    /// `t·F`.
    pub fn scaled(&self, t: f64) -> Potential {
        match self {
            Potential::Euclidean { scale } => Potential::Euclidean { scale: scale * t },
            Potential::FubiniStudy { scale } => Potential::FubiniStudy { scale: scale * t },
            Potential::Custom(c) => {
                let (v, h) = (c.value.clone(), c.mixed_hessian.clone());
                Potential::Custom(CustomPotential::new(
                    format!("{}*{t}", c.name),
                    move |z| t * v(z),
                    move |z| h(z) * C64::new(t, 0.0),
                ))
            }
        }
    }

    pub fn value(&self, z: &[C64]) -> f64 {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        match self {
            Potential::Euclidean { scale } => 0.5 * scale * r2,
            Potential::FubiniStudy { scale } => scale * r2.ln_1p(),
            Potential::Custom(c) => (c.value)(z),
        }
    }

    /// `∂²F/∂z_j∂z̄_k` without positivity checks.
    pub fn raw_mixed_hessian(&self, z: &[C64]) -> DMatrix<C64> {
        let n = z.len();
        match self {
            Potential::Euclidean { scale } => DMatrix::from_diagonal_element(n, n, C64::new(0.5 * scale, 0.0)),
            Potential::FubiniStudy { scale } => {
                // c [(1+|z|²) δ_{jk} − z̄_j z_k] / (1+|z|²)²
                let s = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
                DMatrix::from_fn(n, n, |j, k| {
                    let delta = if j == k { s } else { 0.0 };
                    (C64::new(delta, 0.0) - z[j].conj() * z[k]) * (scale / (s * s))
                })
            }
            Potential::Custom(c) => (c.mixed_hessian)(z),
        }
    }

    /// `ρ = 2ⁿ det H`, closed form for the built-in potentials.
    pub(crate) fn density_unchecked(&self, z: &[C64]) -> f64 {
        let n = z.len() as i32;
        match self {
            Potential::Euclidean { scale } => scale.powi(n),
            Potential::FubiniStudy { scale } => {
                // det of the Fubini–Study matrix is cⁿ (1+|z|²)^{-(n+1)}.
                let s = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
                (2.0 * scale).powi(n) * s.powi(-(n + 1))
            }
            Potential::Custom(_) => 2f64.powi(n) * self.raw_mixed_hessian(z).determinant().re,
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Potential(format!("scale must be positive and finite, got {scale}")));
    }
    Ok(())
}
