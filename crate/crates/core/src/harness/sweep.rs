use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::density::{make_test_density, TestDensity};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::holo::{CPoint, HoloPoly};
use crate::kahler::{DomainBox, Potential, SmoothField};
use crate::morse::{
    build_amplitude, build_phase, perturb_to_morse, recentered_charts, Amplitude, CriticalSet, MorseCertificate,
    MorseOptions,
};
use crate::pairing::{recover_point_value, PairingResult, QuadratureSpec};
use crate::C64;

/// Version of the `report.csv` / `summary.json` layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Largest `|a(q)|` tolerated at the other critical points.
pub const AMPLITUDE_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, Serialize)]
pub struct RecoveryRow {
    pub index: usize,
    pub requested: Option<CPoint>,
    /// Certified anchor `p′` the value is attributed to.
    pub anchor: Option<CPoint>,
    pub f_true: Option<C64>,
    pub f_hat: Option<C64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub fit_residual: Option<f64>,
    pub order_estimate: Option<f64>,
    pub critical_points: Option<usize>,
    pub attempts: Option<usize>,
    pub amplitude_at_anchor: Option<C64>,
    pub amplitude_max_other: Option<f64>,
    pub flags: Vec<String>,
}

impl RecoveryRow {
    pub fn failed(&self) -> bool {
        self.f_hat.is_none()
    }
}

/// Per-target artefacts kept for the JSON summary.
#[derive(Clone, Debug, Serialize)]
pub struct TargetDetail {
    pub index: usize,
    pub phase: HoloPoly,
    pub amplitude: Amplitude,
    pub critical_set: CriticalSet,
    pub certificate: MorseCertificate,
    pub coefficients: [C64; 2],
    pub constant: f64,
    pub samples: Vec<PairingResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub rows: Vec<RecoveryRow>,
    pub details: Vec<Option<TargetDetail>>,
    /// `sqrt(mean |f̂ − f|²)` over successful rows.
    pub rms_error: f64,
    /// `‖f̂ − f‖₂ / ‖f‖₂` over successful rows; `None` when `f` vanishes there.
    pub rms_relative: Option<f64>,
    pub failures: usize,
    /// Wall time; deliberately not part of the persisted outputs.
    #[serde(skip)]
    pub runtime: Duration,
}

/// Everything a single target needs besides its index.
pub struct Pipeline<'a> {
    pub density: &'a (dyn SmoothField + 'a),
    pub potential: &'a Potential,
    pub domain: &'a DomainBox,
    pub h_schedule: &'a [f64],
    pub quadrature: QuadratureSpec,
    pub morse: MorseOptions,
    pub epsilon: f64,
}

impl Pipeline<'_> {
    /// Phase, perturbation, critical points, amplitude, recovery. Errors
    /// become flags on the returned row.
    pub fn run(&self, index: usize, p: &CPoint, seed: u64) -> (RecoveryRow, Option<TargetDetail>) {
        let mut row = RecoveryRow { index, requested: Some(p.clone()), ..RecoveryRow::default() };
        match self.try_run(&mut row, p, seed) {
            Ok(detail) => (row, Some(detail)),
            Err(e) => {
                row.flags.push(e.to_string());
                (row, None)
            }
        }
    }

    fn try_run(&self, row: &mut RecoveryRow, p: &CPoint, seed: u64) -> Result<TargetDetail> {
        let base = build_phase(p, &recentered_charts(p))?;
        let certified = perturb_to_morse(&base, self.domain, self.epsilon, seed, &self.morse)?;
        let anchor = certified.phase.anchor.clone();
        row.anchor = Some(anchor.clone());
        row.attempts = Some(certified.attempts);
        row.critical_points = Some(certified.critical_set.points.len());
        if certified.critical_set.points.iter().any(|c| c.on_boundary) {
            row.flags.push("boundary critical point".into());
        }

        let others = certified.other_critical_points();
        let amp = build_amplitude(&anchor, &others)?;
        let at_anchor = amp.eval(&anchor);
        let max_other = others.iter().map(|q| amp.eval(q).norm()).fold(0.0, f64::max);
        row.amplitude_at_anchor = Some(at_anchor);
        row.amplitude_max_other = Some(max_other);
        if at_anchor != C64::new(1.0, 0.0) || max_other > AMPLITUDE_ZERO_TOL {
            return Err(Error::Separation(format!(
                "amplitude invariant violated: a(p′) = {at_anchor}, max |a(q)| = {max_other:.3e}"
            )));
        }

        let truth = self.density.value(&anchor);
        row.f_true = Some(truth);
        let rec = recover_point_value(
            self.density,
            &certified.phase,
            &amp,
            self.potential,
            self.domain,
            self.h_schedule,
            &self.quadrature,
        )?;
        let abs = (rec.f_hat - truth).norm();
        row.f_hat = Some(rec.f_hat);
        row.abs_err = Some(abs);
        row.rel_err = (truth.norm() > 0.0).then(|| abs / truth.norm());
        row.fit_residual = Some(rec.fit_residual);
        row.order_estimate = rec.order_estimate;
        Ok(TargetDetail {
            index: row.index,
            phase: certified.phase.poly,
            amplitude: amp,
            critical_set: certified.critical_set,
            certificate: certified.certificate,
            coefficients: rec.coefficients,
            constant: rec.constant,
            samples: rec.samples,
        })
    }
}

/// Seed used for target `index`.
pub fn target_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

pub fn run_recovery_sweep(cfg: &ExperimentConfig) -> Result<RecoveryReport> {
    run_recovery_sweep_with(cfg, Execution::default())
}

/// Targets run through `exec`; each target's pipeline runs sequentially
/// unless there is only one target.
pub fn run_recovery_sweep_with(cfg: &ExperimentConfig, exec: Execution) -> Result<RecoveryReport> {
    let start = Instant::now();
    cfg.validate()?;
    let domain = cfg.domain()?;
    let potential = cfg.potential()?;
    let density: TestDensity = make_test_density(&cfg.density, &domain)?;
    let targets = cfg.target_points()?;

    let inner = if targets.len() > 1 { Execution::Sequential } else { exec };
    let pipeline = Pipeline {
        density: &density,
        potential: &potential,
        domain: &domain,
        h_schedule: &cfg.h_schedule,
        quadrature: cfg.quadrature.clone().with_execution(inner),
        morse: cfg.morse_options().with_execution(inner),
        epsilon: cfg.morse.epsilon,
    };
    let outcomes = exec.map_indexed(targets.len(), |i| pipeline.run(i, &targets[i], target_seed(cfg.morse.seed, i)));
    let (rows, details): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let mut report = summarize(rows, details);
    report.runtime = start.elapsed();
    Ok(report)
}

pub fn summarize(rows: Vec<RecoveryRow>, details: Vec<Option<TargetDetail>>) -> RecoveryReport {
    let ok: Vec<&RecoveryRow> = rows.iter().filter(|r| !r.failed()).collect();
    let err2: f64 = ok.iter().map(|r| r.abs_err.unwrap_or(0.0).powi(2)).sum();
    let truth2: f64 = ok.iter().map(|r| r.f_true.map_or(0.0, |f| f.norm_sqr())).sum();
    let rms_error = if ok.is_empty() { 0.0 } else { (err2 / ok.len() as f64).sqrt() };
    let rms_relative = (truth2 > 0.0).then(|| (err2 / truth2).sqrt());
    let failures = rows.len() - ok.len();
    RecoveryReport { rows, details, rms_error, rms_relative, failures, runtime: Duration::ZERO }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-target rows as CSV.
pub fn write_rows_csv<W: Write>(out: W, rows: &[RecoveryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "index",
        "requested",
        "anchor",
        "f_re",
        "f_im",
        "f_hat_re",
        "f_hat_im",
        "abs_err",
        "rel_err",
        "fit_residual",
        "order_estimate",
        "critical_points",
        "attempts",
        "flags",
    ])?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            opt(r.requested.as_ref()),
            opt(r.anchor.as_ref()),
            opt(r.f_true.map(|f| f.re)),
            opt(r.f_true.map(|f| f.im)),
            opt(r.f_hat.map(|f| f.re)),
            opt(r.f_hat.map(|f| f.im)),
            opt(r.abs_err),
            opt(r.rel_err),
            opt(r.fit_residual),
            opt(r.order_estimate),
            opt(r.critical_points),
            opt(r.attempts),
            r.flags.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `report.csv` and `summary.json` in `dir`; returns their paths.
pub fn write_report(report: &RecoveryReport, cfg: &ExperimentConfig, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let mut csv_bytes = Vec::new();
    write_rows_csv(&mut csv_bytes, &report.rows)?;
    let summary = json!({
        "schema": REPORT_SCHEMA,
        "dim": cfg.dim,
        "potential": cfg.potential,
        "scale": cfg.scale,
        "density": cfg.density,
        "h_schedule": cfg.h_schedule,
        "seed": cfg.morse.seed,
        "epsilon": cfg.morse.epsilon,
        "quadrature": cfg.quadrature,
        "targets": report.rows.len(),
        "failures": report.failures,
        "rms_error": report.rms_error,
        "rms_relative": report.rms_relative,
        "rows_file": "report.csv",
        "rows": report.rows,
        "details": report.details,
    });
    let mut json_bytes = serde_json::to_vec_pretty(&summary)?;
    json_bytes.push(b'\n');
    let csv_path = dir.join("report.csv");
    let json_path = dir.join("summary.json");
    write_atomic(&csv_path, &csv_bytes)?;
    write_atomic(&json_path, &json_bytes)?;
    Ok((csv_path, json_path))
}
