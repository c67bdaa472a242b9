use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// A point `z = (z₁, …, zₙ)` of `Cⁿ` with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint(Vec<C64>);

impl CPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(CPoint(coords))
    }

    pub fn origin(dim: usize) -> Self {
        CPoint(vec![C64::new(0.0, 0.0); dim.max(1)])
    }

    /// Build from `(x, y)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, y)| C64::new(x, y)).collect())
    }

    /// Build from real coordinates in `(x₁..xₙ, y₁..yₙ)` ordering.
    pub fn from_real(real: &[f64]) -> Result<Self> {
        if real.len() % 2 != 0 {
            return Err(Error::InvalidPoint("odd number of real coordinates".into()));
        }
        let n = real.len() / 2;
        Self::new((0..n).map(|j| C64::new(real[j], real[n + j])).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    /// Real coordinates in `(x₁..xₙ, y₁..yₙ)` ordering.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).chain(self.0.iter().map(|c| c.im)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim() });
        }
        Ok(())
    }
}

impl Deref for CPoint {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
                write!(f, "{}-{}i", c.re, -c.im)?;
            } else {
                write!(f, "{}+{}i", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

/// Parses `"0+0i"`, `"1-2i,0.5i"` or `"1;2"`: coordinates separated by
/// commas or semicolons, each a complex literal.
impl FromStr for CPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split([',', ';'])
            .map(|part| {
                let t = part.trim();
                C64::from_str(t).map_err(|_| Error::InvalidPoint(format!("cannot parse {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        CPoint::new(coords)
    }
}

impl Serialize for CPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        CPoint::new(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}
