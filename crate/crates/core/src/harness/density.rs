use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::CPoint;
use crate::kahler::{DomainBox, MixedPoly, SmoothField, SupportBall};
use crate::C64;

/// Monomial `coeff · Π x_j^{x[j]} y_j^{y[j]}` of a polynomial factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorTerm {
    #[serde(default)]
    pub x: Vec<u32>,
    #[serde(default)]
    pub y: Vec<u32>,
    /// `[re, im]`.
    pub coeff: [f64; 2],
}

/// Synthetic density description as it appears in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Zero,
    Bump {
        /// One `[re, im]` pair per complex coordinate.
        center: Vec<[f64; 2]>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    BumpPoly {
        center: Vec<[f64; 2]>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        factor: Vec<FactorTerm>,
    },
}

fn one() -> f64 {
    1.0
}

/// `amplitude · β(|z − c| / width) · P(x, y)` with the flat bump
/// `β(r) = exp(1 − 1/(1 − r²))` for `r < 1` and `0` otherwise.
#[derive(Clone, Debug)]
pub struct TestDensity {
    pub spec: DensitySpec,
    dim: usize,
    center: CPoint,
    width: f64,
    amplitude: f64,
    factor: Option<MixedPoly>,
}

pub fn bump_profile(r2: f64) -> f64 {
    if r2 < 1.0 {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Validate `spec` against `domain` and build the evaluator. The support
/// must lie strictly inside the domain minus its collar.
pub fn make_test_density(spec: &DensitySpec, domain: &DomainBox) -> Result<TestDensity> {
    let n = domain.dim();
    let origin_of = |d: &DomainBox| -> CPoint {
        let (lo, hi) = d.bounding_box();
        CPoint::new((0..n).map(|j| C64::new(0.5 * (lo[j] + hi[j]), 0.5 * (lo[n + j] + hi[n + j]))).collect())
            .expect("finite domain")
    };
    let (center, width, amplitude, factor) = match spec {
        DensitySpec::Zero => (origin_of(domain), 0.0, 0.0, None),
        DensitySpec::Bump { center, width, amplitude } => (parse_center(center, n)?, *width, *amplitude, None),
        DensitySpec::BumpPoly { center, width, amplitude, factor } => {
            (parse_center(center, n)?, *width, *amplitude, Some(build_factor(factor, n)?))
        }
    };
    if !matches!(spec, DensitySpec::Zero) {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Config(format!("density width must be positive, got {width}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::Config("density amplitude must be finite".into()));
        }
        let room = domain.boundary_distance(&center) - width;
        if !(room > domain.margin()) {
            return Err(Error::Config(format!(
                "density support (center {center}, width {width}) is not strictly inside the {} collar",
                domain.margin()
            )));
        }
    }
    Ok(TestDensity { spec: spec.clone(), dim: n, center, width, amplitude, factor })
}

fn parse_center(c: &[[f64; 2]], n: usize) -> Result<CPoint> {
    if c.len() != n {
        return Err(Error::Config(format!("density center has {} coordinates, domain has {n}", c.len())));
    }
    CPoint::new(c.iter().map(|p| C64::new(p[0], p[1])).collect()).map_err(|e| Error::Config(e.to_string()))
}

fn build_factor(terms: &[FactorTerm], n: usize) -> Result<MixedPoly> {
    let mut out = MixedPoly::zero(n);
    for t in terms {
        if t.x.len() > n || t.y.len() > n {
            return Err(Error::Config(format!("factor term has more than {n} exponents")));
        }
        let mut m = MixedPoly::constant(n, C64::new(t.coeff[0], t.coeff[1]));
        for (j, &e) in t.x.iter().enumerate() {
            for _ in 0..e {
                m = &m * &MixedPoly::x(n, j);
            }
        }
        for (j, &e) in t.y.iter().enumerate() {
            for _ in 0..e {
                m = &m * &MixedPoly::y(n, j);
            }
        }
        out = &out + &m;
    }
    Ok(out)
}

impl TestDensity {
    pub fn is_zero(&self) -> bool {
        matches!(self.spec, DensitySpec::Zero) || self.amplitude == 0.0
    }

    pub fn exact(&self, p: &CPoint) -> C64 {
        self.value(p)
    }

    pub fn center(&self) -> &CPoint {
        &self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }
}

impl SmoothField for TestDensity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[C64]) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let r2 = z.iter().zip(self.center.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / (self.width * self.width);
        let b = bump_profile(r2);
        if b == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let base = C64::new(self.amplitude * b, 0.0);
        match &self.factor {
            Some(p) => base * p.eval(z),
            None => base,
        }
    }

    fn support(&self) -> Option<SupportBall> {
        Some(SupportBall { center: self.center.clone(), radius: self.width })
    }

    fn is_identically_zero(&self) -> bool {
        self.is_zero()
    }
}
