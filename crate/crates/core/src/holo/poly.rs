use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{cpow, CPoint, HolHessian, Part, RealHessian};
use crate::error::{Error, Result};
use crate::C64;

/// Exponent vector `α ∈ ℕⁿ`, ordered graded-lexicographically (total
/// degree first, then exponents left to right).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse holomorphic polynomial `Σ c_α z^α` on `Cⁿ`.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, C64>,
}

impl HoloPoly {
    pub fn zero(dim: usize) -> Self {
        HoloPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        let mut p = Self::zero(dim);
        p.insert(MultiIndex::zero(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C64::new(1.0, 0.0))
    }

    /// The coordinate function `z_j` (0-based).
    pub fn variable(dim: usize, j: usize) -> Self {
        assert!(j < dim, "variable index {j} out of range for dimension {dim}");
        let mut p = Self::zero(dim);
        p.insert(MultiIndex::unit(dim, j), C64::new(1.0, 0.0));
        p
    }

    /// Single term `c z^α`.
    pub fn monomial(exponents: Vec<u32>, c: C64) -> Self {
        let dim = exponents.len();
        let mut p = Self::zero(dim);
        p.insert(MultiIndex(exponents), c);
        p
    }

    /// Build from `(α, c)` pairs; repeated indices are summed.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: alpha.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite coefficient {c}")));
            }
            p.insert(MultiIndex(alpha), c);
        }
        Ok(p)
    }

    /// Accumulate `c` onto the coefficient of `α`, dropping exact zeros.
    fn insert(&mut self, alpha: MultiIndex, c: C64) {
        use std::collections::btree_map::Entry;
        let zero = C64::new(0.0, 0.0);
        match self.terms.entry(alpha) {
            Entry::Vacant(slot) => {
                if c != zero {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == zero {
                    slot.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, exponents: &[u32]) -> C64 {
        self.terms
            .get(&MultiIndex(exponents.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Terms in canonical graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    /// ℓ² norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, z: &CPoint) -> Result<C64> {
        z.check_dim(self.dim)?;
        Ok(self.eval_slice(z))
    }

    /// Unchecked evaluation for hot loops; the caller guarantees `z.len() == dim`.
    ///
    /// Terms are summed from the highest degree down, so the constant term
    /// is added last.
    #[inline]
    pub(crate) fn eval_slice(&self, z: &[C64]) -> C64 {
        debug_assert_eq!(z.len(), self.dim);
        let mut acc = C64::new(0.0, 0.0);
        for (alpha, c) in self.terms.iter().rev() {
            let mut t = *c;
            for (zj, &e) in z.iter().zip(alpha.exponents()) {
                if e > 0 {
                    t *= cpow(*zj, e);
                }
            }
            acc += t;
        }
        acc
    }

    /// `∂p/∂z_j`, exact on coefficients.
    pub fn derivative(&self, j: usize) -> HoloPoly {
        let mut out = Self::zero(self.dim);
        for (alpha, c) in &self.terms {
            let e = alpha.0[j];
            if e == 0 {
                continue;
            }
            let mut beta = alpha.0.clone();
            beta[j] -= 1;
            out.insert(MultiIndex(beta), c * e as f64);
        }
        out
    }

    /// `(∂p/∂z₁, …, ∂p/∂zₙ)`.
    pub fn wirtinger_grad(&self) -> Vec<HoloPoly> {
        (0..self.dim).map(|j| self.derivative(j)).collect()
    }

    /// Second derivative polynomials `∂²p/∂z_j∂z_k`, row-major.
    pub fn hessian_polys(&self) -> Vec<Vec<HoloPoly>> {
        self.wirtinger_grad()
            .iter()
            .map(|g| (0..self.dim).map(|k| g.derivative(k)).collect())
            .collect()
    }

    pub fn hol_hessian(&self, z: &CPoint) -> Result<HolHessian> {
        z.check_dim(self.dim)?;
        let n = self.dim;
        let second = self.hessian_polys();
        let mut q = nalgebra::DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for j in 0..n {
            // ∂_j∂_k p and ∂_k∂_j p are the same polynomial; evaluate once.
            for k in j..n {
                let v = second[j][k].eval_slice(z);
                q[(j, k)] = v;
                q[(k, j)] = v;
            }
        }
        Ok(HolHessian::new(q))
    }

    pub fn real_hessian_of_part(&self, part: Part, z: &CPoint) -> Result<RealHessian> {
        Ok(self.hol_hessian(z)?.real_hessian(part))
    }

    /// `z ↦ Σ_j (z_j − center_j) · direction_j` (bilinear, no conjugation).
    pub fn affine_chart(center: &CPoint, direction: &[C64]) -> Result<HoloPoly> {
        let n = center.dim();
        if direction.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: direction.len() });
        }
        if direction.iter().all(|d| d.norm_sqr() == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let mut p = Self::zero(n);
        let mut constant = C64::new(0.0, 0.0);
        for (j, (d, c)) in direction.iter().zip(center.coords()).enumerate() {
            p.insert(MultiIndex::unit(n, j), *d);
            constant -= d * c;
        }
        p.insert(MultiIndex::zero(n), constant);
        Ok(p)
    }

    pub fn scale(&self, c: C64) -> HoloPoly {
        let mut out = Self::zero(self.dim);
        for (alpha, v) in &self.terms {
            out.insert(alpha.clone(), v * c);
        }
        out
    }

    pub fn square(&self) -> HoloPoly {
        self * self
    }

    fn check_same_dim(&self, other: &HoloPoly) {
        assert_eq!(
            self.dim, other.dim,
            "polynomial dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
    }

    pub fn try_add(&self, other: &HoloPoly) -> Result<HoloPoly> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &HoloPoly) -> Result<HoloPoly> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self * other)
    }

    /// Replace the coefficient of `z^alpha` by `c`.
    pub(crate) fn set_coeff(&mut self, alpha: &[u32], c: C64) {
        let key = MultiIndex::new(alpha.to_vec());
        self.terms.remove(&key);
        if c != C64::new(0.0, 0.0) {
            self.terms.insert(key, c);
        }
    }

    /// Replace the constant coefficient by `c`.
    pub(crate) fn set_constant(&mut self, c: C64) {
        self.set_coeff(&vec![0; self.dim], c);
    }
}

impl Add for &HoloPoly {
    type Output = HoloPoly;
    fn add(self, rhs: &HoloPoly) -> HoloPoly {
        self.check_same_dim(rhs);
        let mut out = self.clone();
        for (alpha, c) in &rhs.terms {
            out.insert(alpha.clone(), *c);
        }
        out
    }
}

impl Sub for &HoloPoly {
    type Output = HoloPoly;
    fn sub(self, rhs: &HoloPoly) -> HoloPoly {
        self + &(-rhs)
    }
}

impl Neg for &HoloPoly {
    type Output = HoloPoly;
    fn neg(self) -> HoloPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &HoloPoly {
    type Output = HoloPoly;
    fn mul(self, rhs: &HoloPoly) -> HoloPoly {
        self.check_same_dim(rhs);
        let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                *acc.entry(a.plus(b)).or_insert(C64::new(0.0, 0.0)) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != C64::new(0.0, 0.0));
        HoloPoly { dim: self.dim, terms: acc }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for HoloPoly {
            type Output = HoloPoly;
            fn $m(self, rhs: HoloPoly) -> HoloPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Serialize, Deserialize)]
struct TermRepr {
    alpha: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

/// JSON layout: `{"dim": n, "terms": [{"alpha": [..], "re": .., "im": ..}]}`.
impl Serialize for HoloPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermRepr { alpha: a.0.clone(), re: c.re, im: c.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoloPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        HoloPoly::from_terms(
            repr.dim,
            repr.terms.into_iter().map(|t| (t.alpha, C64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
