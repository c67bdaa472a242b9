//! Holomorphic polynomials on `Cⁿ` and their Wirtinger calculus.
//!
//! Real coordinates are always ordered `(x₁, …, xₙ, y₁, …, yₙ)` with
//! `z_j = x_j + i y_j`.

mod hessian;
mod point;
mod poly;

pub use hessian::{HolHessian, Part, RealHessian};
pub use point::CPoint;
pub use poly::{HoloPoly, MultiIndex};

use crate::C64;

/// `z^k` by repeated multiplication; exact on Gaussian integers.
#[inline]
pub(crate) fn cpow(z: C64, k: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..k {
        acc *= z;
    }
    acc
}
