use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::density::{make_test_density, DensitySpec};
use super::sweep::{write_atomic, REPORT_SCHEMA};
use crate::error::{Error, Result};
use crate::holo::CPoint;
use crate::kahler::{DomainBox, Potential, SmoothField};
use crate::morse::{build_amplitude, build_phase, perturb_to_morse, recentered_charts, MorseOptions};
use crate::pairing::{fit_pairing_samples, pairing_integral, write_pairing_csv, CGOPair, PairingResult, QuadratureSpec};
use crate::C64;

/// Single-target h-refinement study.
#[derive(Clone, Debug)]
pub struct ConvergenceOptions {
    pub target: CPoint,
    pub potential: Potential,
    pub domain: DomainBox,
    pub density: DensitySpec,
    pub h_schedule: Vec<f64>,
    pub quadrature: QuadratureSpec,
    pub morse: MorseOptions,
    pub epsilon: f64,
    pub seed: u64,
}

impl ConvergenceOptions {
    /// Radial bump centred at the origin, phase `Σ (z_l − p_l)²` left
    /// unperturbed. Widths are chosen so that the two-term fit is in its
    /// asymptotic range over the default schedules.
    pub fn canonical(dim: usize, target: CPoint, potential: Potential) -> Result<Self> {
        let (width, h_schedule) = match dim {
            1 => (1.2, vec![0.2, 0.14, 0.1, 0.07, 0.05]),
            2 => (2.0, vec![0.35, 0.25, 0.18]),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "canonical convergence study is available for dim 1 and 2, not {dim}"
                )))
            }
        };
        target.check_dim(dim)?;
        let domain = DomainBox::polydisk(&CPoint::origin(dim), width + 0.2, 0.1)?;
        Ok(ConvergenceOptions {
            target,
            potential,
            domain,
            density: DensitySpec::Bump { center: vec![[0.0, 0.0]; dim], width, amplitude: 1.0 },
            h_schedule,
            quadrature: QuadratureSpec::default(),
            morse: MorseOptions::default(),
            epsilon: 0.0,
            seed: 0,
        })
    }

    /// Everything but the target from a sweep config.
    pub fn from_config(cfg: &ExperimentConfig, target: Option<CPoint>) -> Result<Self> {
        let target = match target {
            Some(t) => t,
            None => cfg.target_points()?.into_iter().next().ok_or_else(|| Error::Config("no targets".into()))?,
        };
        Ok(ConvergenceOptions {
            target,
            potential: cfg.potential()?,
            domain: cfg.domain()?,
            density: cfg.density.clone(),
            h_schedule: cfg.h_schedule.clone(),
            quadrature: cfg.quadrature.clone(),
            morse: cfg.morse_options(),
            epsilon: cfg.morse.epsilon,
            seed: cfg.morse.seed,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub value: C64,
    pub nodes: usize,
    pub err_est: f64,
    /// Fit over the schedule up to and including this `h` (needs 3 values).
    pub f_hat: Option<C64>,
    pub error: Option<f64>,
    pub fit_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub target: CPoint,
    pub anchor: CPoint,
    pub f_true: C64,
    pub rows: Vec<ConvergenceRow>,
    #[serde(skip)]
    pub samples: Vec<PairingResult>,
}

pub fn run_convergence(opts: &ConvergenceOptions) -> Result<ConvergenceReport> {
    if opts.h_schedule.len() < 3 || !opts.h_schedule.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("h schedule needs ≥ 3 strictly decreasing values".into()));
    }
    if !opts.domain.is_interior(&opts.target) {
        return Err(Error::InvalidParameter(format!("target {} is not interior", opts.target)));
    }
    let density = make_test_density(&opts.density, &opts.domain)?;
    let base = build_phase(&opts.target, &recentered_charts(&opts.target))?;
    let certified = perturb_to_morse(&base, &opts.domain, opts.epsilon, opts.seed, &opts.morse)?;
    let phase = certified.phase.clone();
    let amp = build_amplitude(&phase.anchor, &certified.other_critical_points())?;
    let f_true = density.value(&phase.anchor);

    let mut samples = Vec::with_capacity(opts.h_schedule.len());
    let mut rows = Vec::with_capacity(opts.h_schedule.len());
    for &h in &opts.h_schedule {
        let pair = CGOPair::new(&phase, &amp, h)?;
        let r = pairing_integral(&density, &pair, &opts.potential, &opts.domain, &opts.quadrature)?;
        samples.push(r.clone());
        let fit = if samples.len() >= 3 {
            Some(fit_pairing_samples(&phase, &amp, &opts.potential, samples.clone())?)
        } else {
            None
        };
        rows.push(ConvergenceRow {
            h,
            value: r.value,
            nodes: r.nodes,
            err_est: r.err_est,
            f_hat: fit.as_ref().map(|f| f.f_hat),
            error: fit.as_ref().map(|f| (f.f_hat - f_true).norm()),
            fit_residual: fit.as_ref().map(|f| f.fit_residual),
        });
    }
    Ok(ConvergenceReport { target: opts.target.clone(), anchor: phase.anchor, f_true, rows, samples })
}

/// `pairing.csv` (`h, Re I, Im I, nodes, err_est`) and `converge.json`.
pub fn write_convergence(report: &ConvergenceReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let mut csv_bytes = Vec::new();
    write_pairing_csv(&mut csv_bytes, &report.samples)?;
    let mut json_bytes = serde_json::to_vec_pretty(&json!({
        "schema": REPORT_SCHEMA,
        "target": report.target,
        "anchor": report.anchor,
        "f_true": report.f_true,
        "rows": report.rows,
    }))?;
    json_bytes.push(b'\n');
    let csv_path = dir.join("pairing.csv");
    let json_path = dir.join("converge.json");
    write_atomic(&csv_path, &csv_bytes)?;
    write_atomic(&json_path, &json_bytes)?;
    Ok((csv_path, json_path))
}
