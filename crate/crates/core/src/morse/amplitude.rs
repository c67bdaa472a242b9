use serde::Serialize;

use crate::error::{Error, Result};
use crate::holo::{CPoint, HoloPoly};
use crate::C64;

const SEPARATION_TOL: f64 = 1e-12;

/// Holomorphic amplitude with `a(p) = 1` and `a(q) = 0` at every other
/// critical point `q`.
///
/// `centered` holds the coefficients in `w = z − p`. Its constant term is a
/// product of exact ones, and every other monomial vanishes exactly at
/// `w = 0`, so [`eval`](Self::eval) returns exactly `1` at `p` whatever the
/// rounding elsewhere. `poly` is the same function expanded in `z`, kept for
/// reports.
#[derive(Clone, Debug, Serialize)]
pub struct Amplitude {
    pub poly: HoloPoly,
    pub centered: HoloPoly,
    pub point: CPoint,
    pub zeros: Vec<CPoint>,
}

impl Amplitude {
    pub fn eval(&self, z: &[C64]) -> C64 {
        let w: Vec<C64> = z.iter().zip(self.point.iter()).map(|(a, b)| a - b).collect();
        self.centered.eval_slice(&w)
    }
}

/// Product of affine factors `ℓ_q(z) = ⟨z − q, p − q⟩ / |p − q|²`, each
/// vanishing at `q` and equal to one at `p`.
pub fn build_amplitude(p: &CPoint, others: &[CPoint]) -> Result<Amplitude> {
    let n = p.dim();
    let origin = CPoint::origin(n);
    let mut poly = HoloPoly::one(n);
    let mut centered = HoloPoly::one(n);
    for q in others {
        q.check_dim(n)?;
        let d2: f64 = p.distance(q).powi(2);
        if p.distance(q) <= SEPARATION_TOL {
            return Err(Error::Separation(format!("critical point {q} coincides with {p}")));
        }
        let dir: Vec<C64> = p.iter().zip(q.iter()).map(|(a, b)| (a - b).conj() / d2).collect();
        poly = &poly * &HoloPoly::affine_chart(q, &dir)?;
        // ℓ_q(p + w) = 1 + ⟨w, p − q⟩ / |p − q|².
        centered = &centered * &(&HoloPoly::one(n) + &HoloPoly::affine_chart(&origin, &dir)?);
    }
    Ok(Amplitude { poly, centered, point: p.clone(), zeros: others.to_vec() })
}
