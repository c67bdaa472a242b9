use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::holo::{cpow, CPoint, HoloPoly, MultiIndex};
use crate::C64;

/// Ball `‖z − center‖ ≤ radius` outside of which a field vanishes identically.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportBall {
    pub center: CPoint,
    pub radius: f64,
}

/// A smooth complex-valued function of `(z, z̄)` on a coordinate domain.
pub trait SmoothField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[C64]) -> C64;

    /// Analytic mixed Wirtinger Hessian `∂²u/∂z_j∂z̄_k`, if available.
    fn mixed_hessian(&self, _z: &[C64]) -> Option<DMatrix<C64>> {
        None
    }

    /// A ball containing the support, if the field is compactly supported.
    fn support(&self) -> Option<SupportBall> {
        None
    }

    /// `true` only when the field is known to vanish everywhere.
    fn is_identically_zero(&self) -> bool {
        false
    }
}

impl<T: SmoothField + ?Sized> SmoothField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, z: &[C64]) -> C64 {
        (**self).value(z)
    }
    fn mixed_hessian(&self, z: &[C64]) -> Option<DMatrix<C64>> {
        (**self).mixed_hessian(z)
    }
    fn support(&self) -> Option<SupportBall> {
        (**self).support()
    }
    fn is_identically_zero(&self) -> bool {
        (**self).is_identically_zero()
    }
}

/// Mixed Wirtinger Hessian by centered differences of the real Hessian:
/// `∂_j∂_k̄ u = ¼(u_{x_j x_k} + u_{y_j y_k} + i(u_{x_j y_k} − u_{y_j x_k}))`.
pub fn fd_mixed_hessian<F: SmoothField + ?Sized>(u: &F, z: &[C64], step: f64) -> DMatrix<C64> {
    let n = z.len();
    let x0: Vec<f64> = z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect();
    let eval = |x: &[f64]| {
        let pt: Vec<C64> = (0..n).map(|j| C64::new(x[j], x[n + j])).collect();
        u.value(&pt)
    };
    let d2 = |a: usize, b: usize| {
        let shifted = |da: f64, db: f64| {
            let mut x = x0.clone();
            x[a] += da;
            x[b] += db;
            eval(&x)
        };
        (shifted(step, step) - shifted(step, -step) - shifted(-step, step) + shifted(-step, -step))
            / (4.0 * step * step)
    };
    DMatrix::from_fn(n, n, |j, k| {
        let xx = d2(j, k);
        let yy = d2(n + j, n + k);
        let xy = d2(j, n + k);
        let yx = d2(n + j, k);
        (xx + yy + C64::new(0.0, 1.0) * (xy - yx)) * 0.25
    })
}

/// Polynomial in `z` and `z̄`: `Σ c_{αβ} z^α z̄^β`.
///
/// Covers real and imaginary parts of holomorphic polynomials, real
/// coordinate polynomials and `|z|²`, with exact Wirtinger derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedPoly {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

impl MixedPoly {
    pub fn zero(dim: usize) -> Self {
        MixedPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        let mut p = Self::zero(dim);
        p.accumulate(MultiIndex::zero(dim), MultiIndex::zero(dim), c);
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<u32>, C64)>,
    {
        let mut p = Self::zero(dim);
        for (a, b, c) in terms {
            assert!(a.len() == dim && b.len() == dim, "multi-index length must equal dim");
            p.accumulate(MultiIndex::new(a), MultiIndex::new(b), c);
        }
        p
    }

    fn accumulate(&mut self, a: MultiIndex, b: MultiIndex, c: C64) {
        let zero = C64::new(0.0, 0.0);
        let slot = self.terms.entry((a, b)).or_insert(zero);
        *slot += c;
        self.terms.retain(|_, v| *v != zero);
    }

    /// `p(z)` viewed as a function of `(z, z̄)`.
    pub fn holomorphic(p: &HoloPoly) -> Self {
        let mut out = Self::zero(p.dim());
        for (a, c) in p.terms() {
            out.accumulate(a.clone(), MultiIndex::zero(p.dim()), *c);
        }
        out
    }

    /// `conj(p(z)) = Σ c̄_α z̄^α`.
    pub fn antiholomorphic(p: &HoloPoly) -> Self {
        let mut out = Self::zero(p.dim());
        for (a, c) in p.terms() {
            out.accumulate(MultiIndex::zero(p.dim()), a.clone(), c.conj());
        }
        out
    }

    pub fn real_part_of(p: &HoloPoly) -> Self {
        (&Self::holomorphic(p) + &Self::antiholomorphic(p)).scale(C64::new(0.5, 0.0))
    }

    pub fn imag_part_of(p: &HoloPoly) -> Self {
        (&Self::holomorphic(p) - &Self::antiholomorphic(p)).scale(C64::new(0.0, -0.5))
    }

    /// `x_j = (z_j + z̄_j)/2`.
    pub fn x(dim: usize, j: usize) -> Self {
        let e = MultiIndex::unit(dim, j);
        let o = MultiIndex::zero(dim);
        let mut p = Self::zero(dim);
        p.accumulate(e.clone(), o.clone(), C64::new(0.5, 0.0));
        p.accumulate(o, e, C64::new(0.5, 0.0));
        p
    }

    /// `y_j = (z_j − z̄_j)/(2i)`.
    pub fn y(dim: usize, j: usize) -> Self {
        let e = MultiIndex::unit(dim, j);
        let o = MultiIndex::zero(dim);
        let mut p = Self::zero(dim);
        p.accumulate(e.clone(), o.clone(), C64::new(0.0, -0.5));
        p.accumulate(o, e, C64::new(0.0, 0.5));
        p
    }

    /// `|z_j|² = z_j z̄_j`.
    pub fn abs_sq(dim: usize, j: usize) -> Self {
        let e = MultiIndex::unit(dim, j);
        let mut p = Self::zero(dim);
        p.accumulate(e.clone(), e, C64::new(1.0, 0.0));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), v) in &self.terms {
            out.accumulate(a.clone(), b.clone(), v * c);
        }
        out
    }

    /// `∂/∂z_j`.
    pub fn d_z(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            let e = a.exponents()[j];
            if e > 0 {
                let mut a2 = a.exponents().to_vec();
                a2[j] -= 1;
                out.accumulate(MultiIndex::new(a2), b.clone(), c * e as f64);
            }
        }
        out
    }

    /// `∂/∂z̄_k`.
    pub fn d_zbar(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            let e = b.exponents()[k];
            if e > 0 {
                let mut b2 = b.exponents().to_vec();
                b2[k] -= 1;
                out.accumulate(a.clone(), MultiIndex::new(b2), c * e as f64);
            }
        }
        out
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((a, b), c) in &self.terms {
            let mut t = *c;
            for (j, zj) in z.iter().enumerate() {
                let (ea, eb) = (a.exponents()[j], b.exponents()[j]);
                if ea > 0 {
                    t *= cpow(*zj, ea);
                }
                if eb > 0 {
                    t *= cpow(zj.conj(), eb);
                }
            }
            acc += t;
        }
        acc
    }
}

impl std::ops::Add for &MixedPoly {
    type Output = MixedPoly;
    fn add(self, rhs: &MixedPoly) -> MixedPoly {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.accumulate(a.clone(), b.clone(), *c);
        }
        out
    }
}

impl std::ops::Sub for &MixedPoly {
    type Output = MixedPoly;
    fn sub(self, rhs: &MixedPoly) -> MixedPoly {
        self + &rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl std::ops::Mul for &MixedPoly {
    type Output = MixedPoly;
    fn mul(self, rhs: &MixedPoly) -> MixedPoly {
        assert_eq!(self.dim, rhs.dim);
        let mut out = MixedPoly::zero(self.dim);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                let a: Vec<u32> = a1.exponents().iter().zip(a2.exponents()).map(|(x, y)| x + y).collect();
                let b: Vec<u32> = b1.exponents().iter().zip(b2.exponents()).map(|(x, y)| x + y).collect();
                out.accumulate(MultiIndex::new(a), MultiIndex::new(b), c1 * c2);
            }
        }
        out
    }
}

impl SmoothField for MixedPoly {
    fn dim(&self) -> usize {
        self.dim
    }

    fn is_identically_zero(&self) -> bool {
        self.is_zero()
    }

    fn value(&self, z: &[C64]) -> C64 {
        self.eval(z)
    }

    fn mixed_hessian(&self, z: &[C64]) -> Option<DMatrix<C64>> {
        let n = self.dim;
        let rows: Vec<MixedPoly> = (0..n).map(|j| self.d_z(j)).collect();
        Some(DMatrix::from_fn(n, n, |j, k| rows[j].d_zbar(k).eval(z)))
    }
}

type ValueFn = dyn Fn(&[C64]) -> C64 + Send + Sync;
type HessFn = dyn Fn(&[C64]) -> DMatrix<C64> + Send + Sync;

/// Closure-backed field, optionally with an analytic mixed Hessian.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    value: Arc<ValueFn>,
    hessian: Option<Arc<HessFn>>,
    support: Option<SupportBall>,
}

impl FnField {
    pub fn new(dim: usize, value: impl Fn(&[C64]) -> C64 + Send + Sync + 'static) -> Self {
        FnField { dim, value: Arc::new(value), hessian: None, support: None }
    }

    pub fn with_mixed_hessian(
        mut self,
        h: impl Fn(&[C64]) -> DMatrix<C64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_support(mut self, support: SupportBall) -> Self {
        self.support = Some(support);
        self
    }
}

impl SmoothField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[C64]) -> C64 {
        (self.value)(z)
    }
    fn mixed_hessian(&self, z: &[C64]) -> Option<DMatrix<C64>> {
        self.hessian.as_ref().map(|h| h(z))
    }
    fn support(&self) -> Option<SupportBall> {
        self.support.clone()
    }
}
