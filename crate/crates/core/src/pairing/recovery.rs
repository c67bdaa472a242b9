use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{pairing_integral, CGOPair, PairingResult, QuadratureSpec};
use crate::error::{Error, Result};
use crate::holo::{CPoint, Part};
use crate::kahler::{volume_density, DomainBox, Potential, SmoothField};
use crate::morse::{Amplitude, DetTolerance, Phase};
use crate::C64;

const MAX_CONDITION: f64 = 1e8;

/// `C(p) = πⁿ |det Q(p)|⁻¹ |a(p)|² ρ(p)`, the leading stationary-phase
/// coefficient of `I(h) e^{−2i Im Φ(p)/h} / hⁿ`.
///
/// Fails unless `p` is a nondegenerate critical point at which `Im Φ` has
/// signature `(n, n)`.
pub fn stationary_phase_constant(phase: &Phase, a: &Amplitude, potential: &Potential, p: &CPoint) -> Result<f64> {
    let n = p.dim();
    let q = phase.poly.hol_hessian(p)?;
    let det = q.abs_det();
    let tol = match DetTolerance::default() {
        DetTolerance::Relative(f) => f * q.max_abs_entry().powi(n as i32),
        DetTolerance::Absolute(t) => t,
    };
    if !(det > 0.0 && det >= tol) {
        return Err(Error::Degenerate(format!("|det Q({p})| = {det:.3e}")));
    }
    let sig = q.real_hessian(Part::Im).signature(1e-10);
    if sig != (n, n) {
        return Err(Error::Degenerate(format!("Im Φ has signature {sig:?} at {p}, expected ({n}, {n})")));
    }
    let ap = a.eval(p).norm_sqr();
    let rho = volume_density(potential, p)?;
    Ok(PI.powi(n as i32) / det * ap * rho)
}

/// `C(p) f_p hⁿ e^{2i Im Φ(p)/h}`.
pub fn stationary_phase_predict(
    f_p: C64,
    phase: &Phase,
    a: &Amplitude,
    potential: &Potential,
    p: &CPoint,
    h: f64,
) -> Result<C64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let c = stationary_phase_constant(phase, a, potential, p)?;
    let im_phi = phase.poly.eval(p)?.im;
    Ok(f_p * C64::from_polar(c * h.powi(p.dim() as i32), 2.0 * im_phi / h))
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    /// Point the value is attributed to (the phase's certified anchor).
    pub point: CPoint,
    pub f_hat: C64,
    /// Fitted `(c₁, c₂)` of `c₁hⁿ + c₂hⁿ⁺¹`.
    pub coefficients: [C64; 2],
    pub constant: f64,
    /// Relative ℓ² misfit of the two-term model.
    pub fit_residual: f64,
    /// Least-squares slope of `log |I(h)|` against `log h` (≈ n).
    pub order_estimate: Option<f64>,
    pub condition: f64,
    pub samples: Vec<PairingResult>,
}

/// Integrate at every `h` of a decreasing schedule, demodulate by
/// `e^{−2i Im Φ(p)/h}`, fit `c₁hⁿ + c₂hⁿ⁺¹` and return `f̂ = c₁ / C(p)`.
pub fn recover_point_value<F: SmoothField + ?Sized>(
    f: &F,
    phase: &Phase,
    a: &Amplitude,
    potential: &Potential,
    dom: &DomainBox,
    h_schedule: &[f64],
    q: &QuadratureSpec,
) -> Result<Recovery> {
    if h_schedule.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 values of h, got {}", h_schedule.len())));
    }
    if !h_schedule.iter().all(|h| *h > 0.0 && h.is_finite()) || !h_schedule.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("h schedule must be positive and strictly decreasing".into()));
    }
    stationary_phase_constant(phase, a, potential, &phase.anchor)?;
    let mut samples = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let pair = CGOPair::new(phase, a, h)?;
        samples.push(pairing_integral(f, &pair, potential, dom, q)?);
    }
    fit_pairing_samples(phase, a, potential, samples)
}

/// The fitting half of [`recover_point_value`] on precomputed integrals.
pub fn fit_pairing_samples(
    phase: &Phase,
    a: &Amplitude,
    potential: &Potential,
    samples: Vec<PairingResult>,
) -> Result<Recovery> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 values of h, got {}", samples.len())));
    }
    let h_schedule: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let p = &phase.anchor;
    let n = p.dim() as i32;
    let constant = stationary_phase_constant(phase, a, potential, p)?;
    let im_phi = phase.poly.eval(p)?.im;
    let y: Vec<C64> = samples.iter().map(|s| s.value * C64::from_polar(1.0, -2.0 * im_phi / s.h)).collect();

    let m = h_schedule.len();
    let design = DMatrix::from_fn(m, 2, |i, j| h_schedule[i].powi(n + j as i32));
    let sv = design.clone().singular_values();
    let condition = sv[0].max(sv[1]) / sv[0].min(sv[1]);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Fit {
            condition,
            detail: format!("design hⁿ, hⁿ⁺¹ over {h_schedule:?}"),
        });
    }
    let rhs = DMatrix::from_fn(m, 2, |i, j| if j == 0 { y[i].re } else { y[i].im });
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Fit { condition, detail: e.to_string() })?;
    let c1 = C64::new(coef[(0, 0)], coef[(0, 1)]);
    let c2 = C64::new(coef[(1, 0)], coef[(1, 1)]);

    let ynorm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let misfit = (0..m)
        .map(|i| (y[i] - c1 * design[(i, 0)] - c2 * design[(i, 1)]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let fit_residual = if ynorm > 0.0 { misfit / ynorm } else { 0.0 };

    let order_estimate = if y.iter().all(|v| v.norm() > 0.0) {
        let xs: Vec<f64> = h_schedule.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = y.iter().map(|v| v.norm().ln()).collect();
        Some(slope(&xs, &ys))
    } else {
        None
    };

    Ok(Recovery {
        point: p.clone(),
        f_hat: c1 / constant,
        coefficients: [c1, c2],
        constant,
        fit_residual,
        order_estimate,
        condition,
        samples,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
