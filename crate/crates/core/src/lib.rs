//! Complex geometrical optics on Kähler coordinate domains.
//!
//! The crate builds holomorphic phases with a prescribed nondegenerate
//! critical point, perturbs them until the imaginary part is Morse,
//! constructs amplitudes that separate the critical points, and recovers a
//! compactly supported density pointwise from the oscillatory pairing
//! `∫ f e^{2i Im Φ/h} |a|² dV_g` by extrapolating `h → 0`.
//!
//! Module map:
//!
//! * [`holo`]: sparse holomorphic polynomials, Wirtinger calculus, Hessians.
//! * [`kahler`]: potentials, metric, volume density, Laplace–Beltrami.
//! * [`morse`]: phase construction, critical point search, certification,
//!   separating amplitudes.
//! * [`pairing`]: CGO pairs, tensor Gauss–Legendre pairing integrals,
//!   stationary phase prediction and point recovery.
//! * [`harness`]: test densities, experiment configuration, sweeps, reports.

pub mod error;
pub mod exec;
pub mod harness;
pub mod holo;
pub mod kahler;
pub mod morse;
pub mod pairing;

pub use error::{Error, Result};
pub use exec::Execution;
pub use holo::{CPoint, HolHessian, HoloPoly, MultiIndex, Part, RealHessian};
pub use kahler::{DomainBox, MixedPoly, Potential, SmoothField};
pub use morse::{Amplitude, CertifiedPhase, CriticalSet, Phase};
pub use pairing::{CGOPair, PairingResult, QuadratureSpec};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
