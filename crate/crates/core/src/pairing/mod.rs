//! CGO pairs `u₁ = e^{Φ/h} a`, `u₂ = conj(e^{−Φ/h} a)`, the oscillatory
//! pairing `∫ f u₁ u₂ dV_g`, its stationary-phase limit, and pointwise
//! recovery of `f` by fitting in `h`.

mod gauss;
mod integral;
mod recovery;

pub use gauss::{composite, gauss_legendre};
pub use integral::{pairing_integral, write_pairing_csv, PairingResult, QuadratureSpec};
pub use recovery::{
    fit_pairing_samples, recover_point_value, stationary_phase_constant, stationary_phase_predict, Recovery,
};

use crate::error::{Error, Result};
use crate::holo::{CPoint, HoloPoly};
use crate::morse::{Amplitude, Phase};
use crate::C64;

/// Complex geometrical optics pair at semiclassical parameter `h`.
#[derive(Clone, Debug)]
pub struct CGOPair {
    pub phi: HoloPoly,
    pub amplitude: Amplitude,
    pub anchor: CPoint,
    pub h: f64,
    grad: Vec<HoloPoly>,
}

impl CGOPair {
    pub fn new(phase: &Phase, amplitude: &Amplitude, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        let n = phase.poly.dim();
        if amplitude.poly.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: amplitude.poly.dim() });
        }
        Ok(CGOPair {
            phi: phase.poly.clone(),
            amplitude: amplitude.clone(),
            anchor: phase.anchor.clone(),
            h,
            grad: phase.poly.wirtinger_grad(),
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// Holomorphic factor `e^{Φ/h} a`.
    pub fn u1(&self, z: &[C64]) -> C64 {
        (self.phi.eval_slice(z) / self.h).exp() * self.amplitude.eval(z)
    }

    /// Antiholomorphic factor `conj(e^{−Φ/h} a)`.
    pub fn u2(&self, z: &[C64]) -> C64 {
        ((-self.phi.eval_slice(z) / self.h).exp() * self.amplitude.eval(z)).conj()
    }

    /// `u₁u₂ = e^{2i Im Φ/h} |a|²`, evaluated without the large exponentials.
    pub fn product(&self, z: &[C64]) -> C64 {
        C64::from_polar(self.amplitude.eval(z).norm_sqr(), 2.0 * self.phi.eval_slice(z).im / self.h)
    }
}
