use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::C64;

/// Which real part of a holomorphic function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Holomorphic Hessian `Q_{jk} = ∂²f/∂z_j∂z_k` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct HolHessian(DMatrix<C64>);

impl HolHessian {
    pub fn new(q: DMatrix<C64>) -> Self {
        assert!(q.is_square(), "holomorphic Hessian must be square");
        HolHessian(q)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn det(&self) -> C64 {
        self.0.clone().determinant()
    }

    pub fn abs_det(&self) -> f64 {
        self.det().norm()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Q(e^{iθ}Φ) = e^{iθ} Q(Φ)`.
    pub fn rotated(&self, theta: f64) -> HolHessian {
        HolHessian(self.0.map(|c| c * C64::from_polar(1.0, theta)))
    }

    /// `Σ Q_{jk} a^j c^k`.
    pub fn bilinear(&self, a: &[C64], c: &[C64]) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += self.0[(j, k)] * a[j] * c[k];
            }
        }
        acc
    }

    /// Real `2n × 2n` Hessian of `Re f` or `Im f` in `(x, y)` ordering.
    ///
    /// With `D²u = ½(Q dz⊗dz + conj)` and `D²v = (1/2i)(Q dz⊗dz − conj)`,
    /// evaluating on `∂_{x_j}` (where `dz_j = 1`) and `∂_{y_j}` (where
    /// `dz_j = i`) gives `D²u(e_a, e_b) = Re(w_aᵀ Q w_b)` and
    /// `D²v(e_a, e_b) = Im(w_aᵀ Q w_b)`.
    pub fn real_hessian(&self, part: Part) -> RealHessian {
        let n = self.dim();
        let weight = |a: usize| if a < n { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        let m = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
            let v = self.0[(a % n, b % n)] * weight(a) * weight(b);
            match part {
                Part::Re => v.re,
                Part::Im => v.im,
            }
        });
        RealHessian(m)
    }
}

impl Serialize for HolHessian {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|j| (0..self.dim()).map(|k| [self.0[(j, k)].re, self.0[(j, k)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Real symmetric Hessian in `(x₁..xₙ, y₁..yₙ)` ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct RealHessian(DMatrix<f64>);

impl RealHessian {
    pub fn new(m: DMatrix<f64>) -> Self {
        RealHessian(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.clone().determinant()
    }

    pub fn scaled(&self, s: f64) -> RealHessian {
        RealHessian(&self.0 * s)
    }

    /// Counts of (positive, negative) eigenvalues; eigenvalues below
    /// `tol · max|λ|` in magnitude count as zero and are omitted.
    pub fn signature(&self, tol: f64) -> (usize, usize) {
        let eig = self.0.clone().symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = tol * scale;
        let pos = eig.eigenvalues.iter().filter(|&&v| v > cut).count();
        let neg = eig.eigenvalues.iter().filter(|&&v| v < -cut).count();
        (pos, neg)
    }
}
