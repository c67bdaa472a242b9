//! Synthetic densities, experiment configuration, recovery sweeps,
//! convergence tables, the invariant suite and report writers.

mod config;
mod converge;
mod density;
mod sweep;
mod verify;

pub use config::{DomainConfig, ExperimentConfig, GridSpec, MorseConfig, OutputConfig, TargetsConfig};
pub use converge::{run_convergence, write_convergence, ConvergenceOptions, ConvergenceReport, ConvergenceRow};
pub use density::{bump_profile, make_test_density, DensitySpec, FactorTerm, TestDensity};
pub use sweep::{
    run_recovery_sweep, run_recovery_sweep_with, summarize, target_seed, write_atomic, write_report, write_rows_csv,
    Pipeline, RecoveryReport, RecoveryRow, TargetDetail, AMPLITUDE_ZERO_TOL, REPORT_SCHEMA,
};
pub use verify::{
    det_relation_checks, harmonicity_check, hessian_lemma_check, laplacian_control_check, run_verification,
    stationary_phase_check, Check, VerifyReport,
};
