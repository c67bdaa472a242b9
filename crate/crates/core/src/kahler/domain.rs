use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::CPoint;
use crate::C64;

/// Region in a single `z_j`-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Disk { center: [f64; 2], radius: f64 },
    Square { center: [f64; 2], half_width: f64 },
}

impl Region {
    fn center(&self) -> C64 {
        match *self {
            Region::Disk { center, .. } | Region::Square { center, .. } => C64::new(center[0], center[1]),
        }
    }

    fn extent(&self) -> f64 {
        match *self {
            Region::Disk { radius, .. } => radius,
            Region::Square { half_width, .. } => half_width,
        }
    }

    /// Signed distance to the boundary, positive inside.
    fn inner_distance(&self, z: C64) -> f64 {
        let d = z - self.center();
        match *self {
            Region::Disk { radius, .. } => radius - d.norm(),
            Region::Square { half_width, .. } => {
                let (ax, ay) = (d.re.abs(), d.im.abs());
                if ax <= half_width && ay <= half_width {
                    (half_width - ax).min(half_width - ay)
                } else {
                    let ox = (ax - half_width).max(0.0);
                    let oy = (ay - half_width).max(0.0);
                    -(ox * ox + oy * oy).sqrt()
                }
            }
        }
    }
}

/// Product domain `Π_j R_j ⊂ Cⁿ` with an interior collar of width `margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    regions: Vec<Region>,
    margin: f64,
}

impl DomainBox {
    pub fn new(regions: Vec<Region>, margin: f64) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Config("domain needs at least one coordinate region".into()));
        }
        if !(margin.is_finite() && margin > 0.0) {
            return Err(Error::Config(format!("domain margin must be positive, got {margin}")));
        }
        for r in &regions {
            let e = r.extent();
            if !(e.is_finite() && e > margin) {
                return Err(Error::Config(format!(
                    "region {r:?} has empty interior for margin {margin}"
                )));
            }
        }
        Ok(DomainBox { regions, margin })
    }

    /// Polydisk of common radius centred at `center`.
    pub fn polydisk(center: &CPoint, radius: f64, margin: f64) -> Result<Self> {
        Self::new(
            center.iter().map(|c| Region::Disk { center: [c.re, c.im], radius }).collect(),
            margin,
        )
    }

    pub fn dim(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `min_j` signed distance of `z_j` to `∂R_j` (positive inside).
    pub fn boundary_distance(&self, z: &[C64]) -> f64 {
        self.regions
            .iter()
            .zip(z)
            .map(|(r, zj)| r.inner_distance(*zj))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        z.len() == self.dim() && self.boundary_distance(z) >= 0.0
    }

    /// At least `margin` away from the boundary.
    pub fn is_interior(&self, z: &[C64]) -> bool {
        z.len() == self.dim() && self.boundary_distance(z) >= self.margin
    }

    /// Axis-aligned bounding box in `(x₁..xₙ, y₁..yₙ)` ordering.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = vec![0.0; 2 * n];
        let mut hi = vec![0.0; 2 * n];
        for (j, r) in self.regions.iter().enumerate() {
            let (c, e) = (r.center(), r.extent());
            lo[j] = c.re - e;
            hi[j] = c.re + e;
            lo[n + j] = c.im - e;
            hi[n + j] = c.im + e;
        }
        (lo, hi)
    }

    /// Rejection-sample points at least `margin` inside.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<CPoint> {
        let (lo, hi) = self.bounding_box();
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let z: Vec<C64> = (0..n)
                .map(|j| C64::new(rng.random_range(lo[j]..hi[j]), rng.random_range(lo[n + j]..hi[n + j])))
                .collect();
            if self.is_interior(&z) {
                out.push(CPoint::new(z).expect("finite sample"));
            }
        }
        out
    }

    /// Multistart nodes per coordinate plane: a square lattice of spacing
    /// `1/density` clipped to the region grown by one spacing.
    pub fn plane_grids(&self, density: f64) -> Vec<Vec<C64>> {
        let spacing = 1.0 / density;
        self.regions
            .iter()
            .map(|r| {
                let c = r.center();
                let m = (r.extent() * density).ceil() as i64 + 1;
                let mut nodes = Vec::new();
                for a in -m..=m {
                    for b in -m..=m {
                        let z = c + C64::new(a as f64 * spacing, b as f64 * spacing);
                        if r.inner_distance(z) >= -spacing {
                            nodes.push(z);
                        }
                    }
                }
                nodes
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn disk_distances() {
        let d = DomainBox::polydisk(&CPoint::origin(2), 1.0, 0.1).unwrap();
        assert!((d.boundary_distance(&[C64::new(0.5, 0.0), C64::new(0.0, 0.0)]) - 0.5).abs() < 1e-15);
        assert!(d.is_interior(&[C64::new(0.85, 0.0), C64::new(0.0, 0.0)]));
        assert!(!d.is_interior(&[C64::new(0.95, 0.0), C64::new(0.0, 0.0)]));
        assert!(!d.contains(&[C64::new(1.05, 0.0), C64::new(0.0, 0.0)]));
    }

    #[test]
    fn square_distances() {
        let d = DomainBox::new(vec![Region::Square { center: [1.0, 0.0], half_width: 0.5 }], 0.05).unwrap();
        assert!((d.boundary_distance(&[C64::new(1.2, 0.1)]) - 0.3).abs() < 1e-15);
        assert!((d.boundary_distance(&[C64::new(1.8, 0.0)]) + 0.3).abs() < 1e-15);
        let (lo, hi) = d.bounding_box();
        assert_eq!((lo, hi), (vec![0.5, -0.5], vec![1.5, 0.5]));
    }

    #[test]
    fn rejects_degenerate_domains() {
        assert!(DomainBox::new(vec![], 0.1).is_err());
        assert!(DomainBox::polydisk(&CPoint::origin(1), 0.1, 0.2).is_err());
        assert!(DomainBox::polydisk(&CPoint::origin(1), 1.0, 0.0).is_err());
    }

    #[test]
    fn samples_respect_margin() {
        let d = DomainBox::polydisk(&CPoint::origin(2), 1.0, 0.2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for p in d.sample_interior(&mut rng, 200) {
            assert!(d.boundary_distance(&p) >= 0.2);
        }
    }
}
