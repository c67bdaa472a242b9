use nalgebra::{DMatrix, DVector};

use crate::holo::HoloPoly;
use crate::C64;

const MAX_ITER: usize = 200;

/// The holomorphic system `dΦ(z) = 0` with its Jacobian `D²_hol Φ`.
pub(crate) struct GradientSystem {
    grad: Vec<HoloPoly>,
    hess: Vec<Vec<HoloPoly>>,
}

impl GradientSystem {
    pub fn new(phi: &HoloPoly) -> Self {
        GradientSystem { grad: phi.wirtinger_grad(), hess: phi.hessian_polys() }
    }

    pub fn residual(&self, z: &[C64]) -> DVector<C64> {
        DVector::from_iterator(self.grad.len(), self.grad.iter().map(|g| g.eval_slice(z)))
    }

    pub fn jacobian(&self, z: &[C64]) -> DMatrix<C64> {
        let n = self.grad.len();
        DMatrix::from_fn(n, n, |j, k| self.hess[j][k].eval_slice(z))
    }

    /// Undamped Newton from `start`. Returns the final iterate and its
    /// residual norm, or `None` if the iteration leaves the ball of radius
    /// `bound` around `center` or hits a singular Jacobian before reaching
    /// an exact zero.
    pub fn newton(&self, start: &[C64], center: &[C64], bound: f64) -> Option<(Vec<C64>, f64)> {
        let mut z = DVector::from_column_slice(start);
        for _ in 0..MAX_ITER {
            let r = self.residual(z.as_slice());
            if r.iter().all(|v| *v == C64::new(0.0, 0.0)) {
                break;
            }
            let step = match self.jacobian(z.as_slice()).lu().solve(&r) {
                Some(s) if s.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => s,
                _ => break,
            };
            z -= &step;
            let dist: f64 = z.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if !(dist <= bound) {
                return None;
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let res = self.residual(z.as_slice()).norm();
        Some((z.as_slice().to_vec(), res))
    }
}
