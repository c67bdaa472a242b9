use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::density::DensitySpec;
use crate::error::{Error, Result};
use crate::holo::CPoint;
use crate::kahler::{DomainBox, Potential, Region};
use crate::morse::{MorseOptions, SearchOptions};
use crate::pairing::QuadratureSpec;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub margin: f64,
    pub regions: Vec<Region>,
}

/// Square lattice `{−r, …, r}` of `per_axis` values on every real axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radius: f64,
    pub per_axis: usize,
    /// `[re, im]` per coordinate; the origin if omitted.
    #[serde(default)]
    pub center: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    /// Explicit points, each a list of `[re, im]` pairs.
    #[serde(default)]
    pub points: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorseConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub retries: usize,
    pub grid_density: f64,
}

impl Default for MorseConfig {
    fn default() -> Self {
        MorseConfig { epsilon: 1e-2, seed: 0, retries: 16, grid_density: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

/// One recovery experiment, as read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub potential: String,
    #[serde(default = "unit")]
    pub scale: f64,
    pub h_schedule: Vec<f64>,
    pub domain: DomainConfig,
    pub density: DensitySpec,
    pub targets: TargetsConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub morse: MorseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::from_config(&self.potential, self.scale)
    }

    pub fn domain(&self) -> Result<DomainBox> {
        if self.domain.regions.len() != self.dim {
            return Err(Error::Config(format!(
                "domain has {} regions for dimension {}",
                self.domain.regions.len(),
                self.dim
            )));
        }
        DomainBox::new(self.domain.regions.clone(), self.domain.margin)
    }

    pub fn morse_options(&self) -> MorseOptions {
        MorseOptions {
            retries: self.morse.retries,
            search: SearchOptions { grid_density: self.morse.grid_density, ..SearchOptions::default() },
            ..MorseOptions::default()
        }
    }

    pub fn target_points(&self) -> Result<Vec<CPoint>> {
        let n = self.dim;
        let to_point = |p: &[[f64; 2]]| -> Result<CPoint> {
            if p.len() != n {
                return Err(Error::Config(format!("target has {} coordinates, expected {n}", p.len())));
            }
            CPoint::new(p.iter().map(|c| C64::new(c[0], c[1])).collect()).map_err(|e| Error::Config(e.to_string()))
        };
        match (&self.targets.points, &self.targets.grid) {
            (Some(points), None) => points.iter().map(|p| to_point(p)).collect(),
            (None, Some(g)) => {
                if g.per_axis == 0 || !(g.radius >= 0.0) {
                    return Err(Error::Config("target grid needs per_axis ≥ 1 and radius ≥ 0".into()));
                }
                let center = match &g.center {
                    Some(c) => to_point(c)?,
                    None => CPoint::origin(n),
                };
                let ticks: Vec<f64> = if g.per_axis == 1 {
                    vec![0.0]
                } else {
                    (0..g.per_axis).map(|i| -g.radius + 2.0 * g.radius * i as f64 / (g.per_axis - 1) as f64).collect()
                };
                let count = g.per_axis.pow(2 * n as u32);
                let mut out = Vec::with_capacity(count);
                for mut k in 0..count {
                    let mut z = center.coords().to_vec();
                    for a in 0..2 * n {
                        let t = ticks[k % g.per_axis];
                        k /= g.per_axis;
                        if a < n {
                            z[a].re += t;
                        } else {
                            z[a - n].im += t;
                        }
                    }
                    out.push(CPoint::new(z).map_err(|e| Error::Config(e.to_string()))?);
                }
                Ok(out)
            }
            _ => Err(Error::Config("targets need exactly one of `points` or `grid`".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        self.potential()?;
        let domain = self.domain()?;
        if self.h_schedule.len() < 3 {
            return Err(Error::Config("h_schedule needs at least 3 values".into()));
        }
        if !self.h_schedule.iter().all(|h| *h > 0.0 && h.is_finite())
            || !self.h_schedule.windows(2).all(|w| w[0] > w[1])
        {
            return Err(Error::Config("h_schedule must be positive and strictly decreasing".into()));
        }
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.morse.epsilon >= 0.0) || !(self.morse.grid_density >= 4.0) {
            return Err(Error::Config("morse.epsilon must be ≥ 0 and morse.grid_density ≥ 4".into()));
        }
        let targets = self.target_points()?;
        if targets.is_empty() {
            return Err(Error::Config("no targets".into()));
        }
        for t in &targets {
            if !domain.is_interior(t) {
                return Err(Error::Config(format!("target {t} is not {} inside the domain", domain.margin())));
            }
        }
        super::density::make_test_density(&self.density, &domain)?;
        Ok(())
    }
}
