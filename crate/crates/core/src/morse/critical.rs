use std::f64::consts::PI;

use serde::Serialize;

use super::newton::GradientSystem;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::holo::{CPoint, HolHessian, HoloPoly};
use crate::kahler::DomainBox;
use crate::C64;

/// Every accepted critical point satisfies `‖dΦ‖ ≤ RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Multistart nodes per unit length along each real axis; at least 4.
    pub grid_density: f64,
    /// Roots closer than this are merged (first found wins).
    pub r_min: f64,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { grid_density: 4.0, r_min: 1e-6, execution: Execution::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    pub location: CPoint,
    pub hessian: HolHessian,
    pub abs_det: f64,
    /// Within the domain's margin of the boundary.
    pub on_boundary: bool,
    pub residual: f64,
}

/// All critical points of `Φ` (equivalently of `Im Φ`) found in a domain.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
    pub r_min: f64,
    pub starts: usize,
    pub nonconverged_starts: usize,
    /// Largest `|Q_{jk}|` over the multistart lattice.
    pub hessian_scale: f64,
    dim: usize,
    /// Cells where the argument principle sees more roots than were found.
    pub coverage_warnings: Vec<String>,
}

/// Threshold on `|det Q|` for Morse certification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetTolerance {
    Absolute(f64),
    /// `factor · scaleⁿ`, `scale` the largest `|Q_{jk}|` seen on the search
    /// lattice.
    Relative(f64),
}

impl Default for DetTolerance {
    fn default() -> Self {
        DetTolerance::Relative(1e-8)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MorseCertificate {
    pub certified: bool,
    /// Minimum `|det Q|` over interior critical points (`+∞` if none).
    pub min_det: f64,
    pub tolerance: f64,
}

fn make_point(system: &GradientSystem, z: Vec<C64>, domain: &DomainBox) -> CriticalPoint {
    let residual = system.residual(&z).norm();
    let hessian = HolHessian::new(system.jacobian(&z));
    let abs_det = hessian.abs_det();
    let on_boundary = !domain.is_interior(&z);
    CriticalPoint { location: CPoint::new(z).expect("finite root"), hessian, abs_det, on_boundary, residual }
}

/// Multistart Newton on `dΦ = 0` from every node of a lattice covering the
/// domain, deduplicated at `r_min` and classified interior/boundary.
pub fn find_critical_points(phi: &HoloPoly, domain: &DomainBox, opts: &SearchOptions) -> Result<CriticalSet> {
    let n = domain.dim();
    if phi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.dim() });
    }
    if !(opts.grid_density >= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "grid density must be at least 4 per unit length, got {}",
            opts.grid_density
        )));
    }
    let system = GradientSystem::new(phi);
    let grids = domain.plane_grids(opts.grid_density);
    let total: usize = grids.iter().map(Vec::len).product();

    let (lo, hi) = domain.bounding_box();
    let center: Vec<C64> = (0..n).map(|j| C64::new(0.5 * (lo[j] + hi[j]), 0.5 * (lo[n + j] + hi[n + j]))).collect();
    let half_diag = lo.iter().zip(&hi).map(|(a, b)| (0.5 * (b - a)).powi(2)).sum::<f64>().sqrt();
    let bound = 2.0 * half_diag + 1.0;

    let results = opts.execution.map_indexed(total, |mut idx| {
        let start: Vec<C64> = grids
            .iter()
            .map(|g| {
                let z = g[idx % g.len()];
                idx /= g.len();
                z
            })
            .collect();
        let scale = system.jacobian(&start).iter().map(|v| v.norm()).fold(0.0, f64::max);
        (system.newton(&start, &center, bound), scale)
    });
    let hessian_scale = results.iter().map(|r| r.1).fold(0.0, f64::max);

    let mut nonconverged = 0;
    let mut roots: Vec<Vec<C64>> = Vec::new();
    for (r, _) in results {
        match r {
            Some((z, res)) if res <= RESIDUAL_TOL => {
                let dup = roots.iter().any(|k| {
                    k.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() < opts.r_min
                });
                if !dup {
                    roots.push(z);
                }
            }
            _ => nonconverged += 1,
        }
    }

    let coverage_warnings = if n == 1 { winding_coverage(&system, domain, opts.grid_density, &roots) } else { Vec::new() };
    for w in &coverage_warnings {
        log::warn!("critical point coverage: {w}");
    }

    let points = roots
        .into_iter()
        .filter(|z| domain.contains(z))
        .map(|z| make_point(&system, z, domain))
        .collect();
    Ok(CriticalSet {
        points,
        r_min: opts.r_min,
        starts: total,
        nonconverged_starts: nonconverged,
        hessian_scale,
        dim: n,
        coverage_warnings,
    })
}

/// Argument-principle check on each lattice cell of a 1-D domain: the
/// winding number of `Φ'` around the cell counts its roots.
fn winding_coverage(system: &GradientSystem, domain: &DomainBox, density: f64, roots: &[Vec<C64>]) -> Vec<String> {
    const PER_EDGE: usize = 16;
    let s = 1.0 / density;
    let (lo, hi) = domain.bounding_box();
    let (nx, ny) = (((hi[0] - lo[0]) / s).ceil() as usize, ((hi[1] - lo[1]) / s).ceil() as usize);
    let mut warnings = Vec::new();
    for a in 0..nx {
        for b in 0..ny {
            let z0 = C64::new(lo[0] + a as f64 * s, lo[1] + b as f64 * s);
            if !domain.contains(&[z0 + C64::new(0.5 * s, 0.5 * s)]) {
                continue;
            }
            let corners = [z0, z0 + C64::new(s, 0.0), z0 + C64::new(s, s), z0 + C64::new(0.0, s)];
            let mut total = 0.0;
            let mut prev = system.residual(&[corners[0]])[0];
            let mut degenerate = prev == C64::new(0.0, 0.0);
            for e in 0..4 {
                let (p, q) = (corners[e], corners[(e + 1) % 4]);
                for k in 1..=PER_EDGE {
                    let z = p + (q - p) * (k as f64 / PER_EDGE as f64);
                    let g = system.residual(&[z])[0];
                    if g == C64::new(0.0, 0.0) {
                        degenerate = true;
                    }
                    total += (g / prev).arg();
                    prev = g;
                }
            }
            if degenerate {
                continue;
            }
            let winding = (total / (2.0 * PI)).round() as i64;
            let found = roots
                .iter()
                .filter(|r| {
                    let d = r[0] - z0;
                    (-1e-9..=s + 1e-9).contains(&d.re) && (-1e-9..=s + 1e-9).contains(&d.im)
                })
                .count() as i64;
            if winding > found {
                warnings.push(format!("cell at {z0} winds {winding} times but holds {found} located roots"));
            }
        }
    }
    warnings
}

impl CriticalSet {
    pub fn interior(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|c| !c.on_boundary)
    }

    pub fn certify(&self, tol: DetTolerance) -> MorseCertificate {
        let min_det = self.interior().map(|c| c.abs_det).fold(f64::INFINITY, f64::min);
        let tolerance = match tol {
            DetTolerance::Absolute(t) => t,
            DetTolerance::Relative(f) => f * self.hessian_scale.powi(self.dim as i32),
        };
        MorseCertificate { certified: min_det >= tolerance && min_det > 0.0, min_det, tolerance }
    }

    /// Make the Newton-relocated anchor the canonical entry for its root.
    pub(crate) fn adopt_anchor(&mut self, system: &GradientSystem, anchor: &CPoint, domain: &DomainBox) {
        let nearest = self
            .points
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.location.distance(anchor)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let entry = make_point(system, anchor.coords().to_vec(), domain);
        match nearest {
            Some((i, d)) if d < self.r_min => self.points[i] = entry,
            _ => {
                self.coverage_warnings.push(format!("anchor {anchor} missed by multistart search"));
                self.points.push(entry);
            }
        }
    }
}

/// Recompute each Hessian from `phi` and certify on `|det Q| ≥ tol`.
pub fn certify_morse(phi: &HoloPoly, cs: &CriticalSet, tol: DetTolerance) -> Result<MorseCertificate> {
    let mut refreshed = cs.clone();
    for c in &mut refreshed.points {
        c.hessian = phi.hol_hessian(&c.location)?;
        c.abs_det = c.hessian.abs_det();
    }
    Ok(refreshed.certify(tol))
}
