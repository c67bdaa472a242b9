use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gauss::composite;
use super::CGOPair;
use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, CompensatedSum, Execution};
use crate::kahler::{DomainBox, Potential, SmoothField};
use crate::C64;

/// Nodes summed sequentially (compensated) before the pairwise tree.
const CHUNK: usize = 4096;
/// Collar values above this fraction of `max |f|` invalidate the run.
const COLLAR_TOL: f64 = 1e-14;

/// Tensor composite Gauss–Legendre rule per real axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub panels: usize,
    pub order: usize,
    /// Nodes per oscillation period demanded along each axis (at least 6).
    pub guard: f64,
    /// Raise `panels` to meet the guard instead of failing.
    pub auto_panels: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { panels: 8, order: 8, guard: 6.0, auto_panels: true, execution: Execution::default() }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.order == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one panel and one node".into()));
        }
        if !(self.guard >= 6.0) {
            return Err(Error::InvalidParameter(format!("oscillation guard {} is below 6", self.guard)));
        }
        Ok(())
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.panels * self.order
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingResult {
    pub h: f64,
    pub value: C64,
    /// Tensor nodes of the fine rule.
    pub nodes: usize,
    /// `|I_P − I_{⌈P/2⌉}|`.
    pub err_est: f64,
    pub panels: usize,
}

/// Integration box and the guard requirement for one run.
struct Layout {
    lo: Vec<f64>,
    hi: Vec<f64>,
    required: f64,
}

fn layout<F: SmoothField + ?Sized>(f: &F, pair: &CGOPair, dom: &DomainBox, guard: f64) -> Layout {
    let n = dom.dim();
    let (mut lo, mut hi) = dom.bounding_box();
    let support = f.support();
    if let Some(ball) = &support {
        for j in 0..n {
            let c = ball.center[j];
            lo[j] = lo[j].max(c.re - ball.radius);
            hi[j] = hi[j].min(c.re + ball.radius);
            lo[n + j] = lo[n + j].max(c.im - ball.radius);
            hi[n + j] = hi[n + j].min(c.im + ball.radius);
        }
    }
    for a in 0..2 * n {
        if hi[a] < lo[a] {
            hi[a] = lo[a];
        }
    }
    let diam = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);

    // max |∇ Im Φ| = max ‖dΦ‖, sampled on a lattice over the box (kept to
    // the support ball grown by half a cell).
    let samples: usize = match n {
        1 => 65,
        2 => 17,
        _ => 7,
    };
    let total = samples.pow(2 * n as u32);
    let cell: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / (samples - 1) as f64).collect();
    let half_diag = 0.5 * cell.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut slope = 0.0f64;
    for mut k in 0..total {
        let mut z = vec![C64::new(0.0, 0.0); n];
        for a in 0..2 * n {
            let t = lo[a] + (k % samples) as f64 * cell[a];
            k /= samples;
            if a < n {
                z[a].re = t;
            } else {
                z[a - n].im = t;
            }
        }
        if let Some(ball) = &support {
            let d = z.iter().zip(ball.center.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if d > ball.radius + half_diag {
                continue;
            }
        }
        let g = pair.grad.iter().map(|p| p.eval_slice(&z).norm_sqr()).sum::<f64>().sqrt();
        slope = slope.max(g);
    }
    let required = guard * slope * diam / (PI * pair.h);
    Layout { lo, hi, required }
}

/// `I(h) = ∫ f e^{2i Im Φ/h} |a|² dV_g` by tensor Gauss–Legendre over the
/// part of the domain's bounding box that meets the support of `f`.
pub fn pairing_integral<F: SmoothField + ?Sized>(
    f: &F,
    pair: &CGOPair,
    potential: &Potential,
    dom: &DomainBox,
    q: &QuadratureSpec,
) -> Result<PairingResult> {
    q.validate()?;
    let n = dom.dim();
    for d in [f.dim(), pair.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    if let Some(ball) = f.support() {
        if dom.boundary_distance(&ball.center) - ball.radius < dom.margin() {
            return Err(Error::InvalidParameter(format!(
                "support of radius {} around {} reaches the boundary collar",
                ball.radius, ball.center
            )));
        }
    }

    if f.is_identically_zero() {
        return Ok(PairingResult { h: pair.h, value: C64::new(0.0, 0.0), nodes: 0, err_est: 0.0, panels: 0 });
    }

    let lay = layout(f, pair, dom, q.guard);
    let mut panels = q.panels;
    if (q.nodes_per_axis() as f64) < lay.required {
        if !q.auto_panels {
            return Err(Error::Oscillation { required: lay.required, available: q.nodes_per_axis() });
        }
        panels = (lay.required / q.order as f64).ceil() as usize;
    }

    let (fine, collar_ratio) = integrate(f, pair, potential, dom, &lay, panels, q.order, q.execution);
    if collar_ratio > COLLAR_TOL {
        return Err(Error::InvalidParameter(format!(
            "density is not negligible near the boundary (ratio {collar_ratio:.3e})"
        )));
    }
    let coarse = if panels > 1 {
        integrate(f, pair, potential, dom, &lay, panels.div_ceil(2), q.order, q.execution).0
    } else {
        integrate(f, pair, potential, dom, &lay, 1, (q.order / 2).max(1), q.execution).0
    };
    Ok(PairingResult {
        h: pair.h,
        value: fine,
        nodes: (panels * q.order).pow(2 * n as u32),
        err_est: (fine - coarse).norm(),
        panels,
    })
}

/// Returns the integral and `max_collar |f| / max |f|`.
#[allow(clippy::too_many_arguments)]
fn integrate<F: SmoothField + ?Sized>(
    f: &F,
    pair: &CGOPair,
    potential: &Potential,
    dom: &DomainBox,
    lay: &Layout,
    panels: usize,
    order: usize,
    exec: Execution,
) -> (C64, f64) {
    let n = dom.dim();
    let axes: Vec<(Vec<f64>, Vec<f64>)> =
        (0..2 * n).map(|a| composite(lay.lo[a], lay.hi[a], panels, order)).collect();
    let m = panels * order;
    let total = m.pow(2 * n as u32);
    let chunks = total.div_ceil(CHUNK);
    let two_over_h = 2.0 / pair.h;

    let partial = exec.map_indexed(chunks, |c| {
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        let (mut fmax, mut collar_max) = (0.0f64, 0.0f64);
        let mut z = vec![C64::new(0.0, 0.0); n];
        for k in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let mut idx = k;
            let mut w = 1.0;
            for (a, (x, wx)) in axes.iter().enumerate() {
                let i = idx % m;
                idx /= m;
                w *= wx[i];
                if a < n {
                    z[a].re = x[i];
                } else {
                    z[a - n].im = x[i];
                }
            }
            let fv = f.value(&z);
            if fv == C64::new(0.0, 0.0) {
                continue;
            }
            let fa = fv.norm();
            fmax = fmax.max(fa);
            if !dom.is_interior(&z) {
                collar_max = collar_max.max(fa);
            }
            let phi = pair.phi.eval_slice(&z);
            let amp = pair.amplitude.eval(&z).norm_sqr();
            let rho = potential.density_unchecked(&z);
            let t = fv * C64::from_polar(w * amp * rho, two_over_h * phi.im);
            re.add(t.re);
            im.add(t.im);
        }
        (re.value(), im.value(), fmax, collar_max)
    });
    let re: Vec<f64> = partial.iter().map(|p| p.0).collect();
    let im: Vec<f64> = partial.iter().map(|p| p.1).collect();
    let fmax = partial.iter().map(|p| p.2).fold(0.0, f64::max);
    let collar = partial.iter().map(|p| p.3).fold(0.0, f64::max);
    let ratio = if fmax > 0.0 { collar / fmax } else { 0.0 };
    (C64::new(pairwise_sum(&re), pairwise_sum(&im)), ratio)
}

/// Rows `h, Re I, Im I, nodes, err_est`.
pub fn write_pairing_csv<W: Write>(out: W, rows: &[PairingResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "Re I", "Im I", "nodes", "err_est"])?;
    for r in rows {
        w.write_record([
            r.h.to_string(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            r.nodes.to_string(),
            r.err_est.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
