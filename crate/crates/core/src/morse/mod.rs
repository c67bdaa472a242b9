//! Holomorphic phases with a prescribed nondegenerate critical point,
//! Morse certification of `Im Φ`, and amplitudes separating the critical
//! points.

mod amplitude;
mod critical;
mod newton;

pub use amplitude::{build_amplitude, Amplitude};
pub use critical::{certify_morse, find_critical_points, CriticalPoint, CriticalSet, DetTolerance, MorseCertificate, SearchOptions};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::holo::{CPoint, HoloPoly};
use crate::kahler::DomainBox;
use crate::C64;
use newton::GradientSystem;

/// Holomorphic phase `Φ` together with its (certified) anchor.
#[derive(Clone, Debug, Serialize)]
pub struct Phase {
    pub poly: HoloPoly,
    /// Requested critical point `p`.
    pub requested: CPoint,
    /// Critical point actually carried by `poly`; equals `requested` before
    /// perturbation.
    pub anchor: CPoint,
    pub seed: Option<u64>,
    pub epsilon: f64,
}

/// Output of [`perturb_to_morse`].
#[derive(Clone, Debug, Serialize)]
pub struct CertifiedPhase {
    pub phase: Phase,
    pub critical_set: CriticalSet,
    pub certificate: MorseCertificate,
    pub attempts: usize,
}

impl CertifiedPhase {
    /// Critical points other than the anchor, boundary-flagged ones included.
    pub fn other_critical_points(&self) -> Vec<CPoint> {
        self.critical_set
            .points
            .iter()
            .filter(|c| c.location != self.phase.anchor)
            .map(|c| c.location.clone())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct MorseOptions {
    /// Fresh seeds tried before giving up.
    pub retries: usize,
    pub search: SearchOptions,
    pub det_tol: DetTolerance,
}

impl Default for MorseOptions {
    fn default() -> Self {
        MorseOptions { retries: 16, search: SearchOptions::default(), det_tol: DetTolerance::default() }
    }
}

impl MorseOptions {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.search.execution = execution;
        self
    }
}

/// `Φ = Σ_l f_l²` with the charts shifted so that `f_l(p) = 0`.
///
/// The chart differentials at `p` must be linearly independent; then
/// `dΦ(p) = 0` and `D²_hol Φ(p) = 2 JᵀJ` with `J` the chart Jacobian.
pub fn build_phase(p: &CPoint, charts: &[HoloPoly]) -> Result<Phase> {
    let n = p.dim();
    if charts.len() != n {
        return Err(Error::Chart(format!("need {n} charts, got {}", charts.len())));
    }
    let mut shifted = Vec::with_capacity(n);
    for chart in charts {
        if chart.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: chart.dim() });
        }
        let value = chart.eval(p)?;
        shifted.push(chart - &HoloPoly::constant(n, value));
    }

    let jac = chart_jacobian(&shifted, p);
    let row_norms: f64 = jac.row_iter().map(|r| r.norm()).product();
    let det = jac.determinant().norm();
    if row_norms == 0.0 || det <= 1e-10 * row_norms {
        return Err(Error::Chart(format!(
            "chart differentials are linearly dependent at {p} (|det J| = {det:.3e})"
        )));
    }

    let phi = shifted.iter().fold(HoloPoly::zero(n), |acc, f| &acc + &f.square());
    let phi = snap_critical(phi, p);
    Ok(Phase { poly: phi, requested: p.clone(), anchor: p.clone(), seed: None, epsilon: 0.0 })
}

/// `J_{lj} = ∂f_l/∂z_j(p)`.
pub fn chart_jacobian(charts: &[HoloPoly], p: &CPoint) -> DMatrix<C64> {
    let n = p.dim();
    DMatrix::from_fn(charts.len(), n, |l, j| charts[l].derivative(j).eval_slice(p))
}

/// Global coordinates recentred at `p`: `f_l = z_l − p_l`.
pub fn recentered_charts(p: &CPoint) -> Vec<HoloPoly> {
    let n = p.dim();
    (0..n)
        .map(|l| {
            let mut dir = vec![C64::new(0.0, 0.0); n];
            dir[l] = C64::new(1.0, 0.0);
            HoloPoly::affine_chart(p, &dir).expect("unit direction")
        })
        .collect()
}

/// Cancel the rounding residue of `dΦ(p)` through the linear coefficients
/// so that `p` is an exact floating-point critical point.
///
/// Evaluation adds the constant term last, so setting the constant of
/// `∂_jΦ` to minus the sum of its other terms makes `∂_jΦ(p)` exactly zero.
fn snap_critical(mut phi: HoloPoly, p: &CPoint) -> HoloPoly {
    let n = phi.dim();
    for j in 0..n {
        let mut rest = phi.derivative(j);
        rest.set_constant(C64::new(0.0, 0.0));
        let mut e = vec![0; n];
        e[j] = 1;
        phi.set_coeff(&e, -rest.eval_slice(p));
    }
    phi
}

/// Random affine holomorphic polynomial with unit coefficient norm.
fn random_affine(dim: usize, rng: &mut ChaCha8Rng) -> HoloPoly {
    let mut coeffs: Vec<C64> = (0..=dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut coeffs {
        *c /= norm;
    }
    HoloPoly::from_terms(
        dim,
        coeffs.into_iter().enumerate().map(|(i, c)| {
            let mut e = vec![0; dim];
            if i > 0 {
                e[i - 1] = 1;
            }
            (e, c)
        }),
    )
    .expect("dimension matches")
}

/// Largest admissible perturbation: keeps the re-anchored critical point
/// within `margin / 2` of the requested one (`‖Δp‖ ≲ ε ‖Q⁻¹‖`).
pub fn epsilon_max(phase: &Phase, domain: &DomainBox) -> Result<f64> {
    let q = phase.poly.hol_hessian(&phase.anchor)?;
    let sv = q.matrix().clone().singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) {
        return Err(Error::Degenerate(format!("anchor {} has a singular Hessian", phase.anchor)));
    }
    Ok(0.5 * domain.margin() * smin)
}

/// Perturb `Φ₀ ↦ Φ₀ + εℓ` with a seeded random affine `ℓ`, re-locate the
/// anchor by Newton, and certify `Im Φ` Morse on the domain; retry with a
/// fresh stream up to `opts.retries` times.
pub fn perturb_to_morse(
    base: &Phase,
    domain: &DomainBox,
    epsilon: f64,
    seed: u64,
    opts: &MorseOptions,
) -> Result<CertifiedPhase> {
    let n = base.poly.dim();
    base.anchor.check_dim(domain.dim())?;
    if !domain.is_interior(&base.anchor) {
        return Err(Error::InvalidParameter(format!(
            "anchor {} is not at least {} inside the domain",
            base.anchor,
            domain.margin()
        )));
    }
    let eps_max = epsilon_max(base, domain)?;
    if !(epsilon >= 0.0 && epsilon <= eps_max) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} outside [0, {eps_max:.3e}]"
        )));
    }

    let attempts = if epsilon == 0.0 { 1 } else { opts.retries.max(1) };
    let mut last_reason = String::new();
    for attempt in 0..attempts {
        let poly = if epsilon == 0.0 {
            base.poly.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt as u64);
            &base.poly + &random_affine(n, &mut rng).scale(C64::new(epsilon, 0.0))
        };
        match certify_candidate(&poly, base, domain, opts) {
            Ok((anchor, critical_set, certificate)) => {
                return Ok(CertifiedPhase {
                    phase: Phase {
                        poly,
                        requested: base.requested.clone(),
                        anchor,
                        seed: (epsilon > 0.0).then_some(seed),
                        epsilon,
                    },
                    critical_set,
                    certificate,
                    attempts: attempt + 1,
                });
            }
            Err(reason) => {
                log::debug!("morse attempt {attempt} rejected: {reason}");
                last_reason = reason;
            }
        }
    }
    Err(Error::MorseSearch { attempts, reason: last_reason })
}

fn certify_candidate(
    poly: &HoloPoly,
    base: &Phase,
    domain: &DomainBox,
    opts: &MorseOptions,
) -> std::result::Result<(CPoint, CriticalSet, MorseCertificate), String> {
    let system = GradientSystem::new(poly);
    let drift_bound = 0.5 * domain.margin();
    let (z, residual) = system
        .newton(base.anchor.coords(), base.anchor.coords(), 4.0 * drift_bound.max(1.0))
        .ok_or("Newton re-anchoring did not converge")?;
    let anchor = CPoint::new(z).map_err(|e| e.to_string())?;
    if residual > critical::RESIDUAL_TOL {
        return Err(format!("anchor residual {residual:.3e}"));
    }
    let drift = anchor.distance(&base.anchor);
    if drift > drift_bound {
        return Err(format!("anchor drifted {drift:.3e} > {drift_bound:.3e}"));
    }
    if !domain.is_interior(&anchor) {
        return Err("anchor left the interior".into());
    }

    let mut cs = find_critical_points(poly, domain, &opts.search).map_err(|e| e.to_string())?;
    cs.adopt_anchor(&system, &anchor, domain);
    let cert = cs.certify(opts.det_tol);
    if !cert.certified {
        return Err(format!("min |det Q| = {:.3e} below {:.3e}", cert.min_det, cert.tolerance));
    }
    Ok((anchor, cs, cert))
}
