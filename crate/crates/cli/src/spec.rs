//! Experiment descriptions read from TOML files.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use grassradon::affine_radon::{PipelineConfig, RadialConfig};
use grassradon::funk::FunkConfig;
use grassradon::geometry::Cubature;
use grassradon::radon_john::RotationAverage;
use grassradon::StreamHandle;

/// What an experiment computes.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Forward transform against the closed form of a Gaussian phantom.
    Forward,
    /// Dual transform against a closed form.
    Dual,
    /// Quasi-radial inversion of the numerically computed forward image.
    InvertQr,
    /// Two-step inversion at random planes.
    InvertGeneral,
    /// Quasi-radial inversion of the numerically computed dual image.
    InvertDualQr,
    /// Dual inversion through the Kelvin map at random planes.
    InvertDualGeneral,
    /// Remark values and the Erdélyi–Kober identity suite.
    Selftest,
    /// Dual transform of |v·e₂| at the two reference planes.
    Remark,
    /// Left-inverse identity of the Erdélyi–Kober operators.
    EkIdentity,
    /// Gaussian d-plane transforms against their radial closed form.
    RadialReduction,
    /// Band-limited Funk round trip against the harmonic oracle.
    Funk,
    /// Monte Carlo duality relations of the affine and Funk transforms.
    Duality,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Forward => "forward",
            Pipeline::Dual => "dual",
            Pipeline::InvertQr => "invert_qr",
            Pipeline::InvertGeneral => "invert_general",
            Pipeline::InvertDualQr => "invert_dual_qr",
            Pipeline::InvertDualGeneral => "invert_dual_general",
            Pipeline::Selftest => "selftest",
            Pipeline::Remark => "remark",
            Pipeline::EkIdentity => "ek_identity",
            Pipeline::RadialReduction => "radial_reduction",
            Pipeline::Funk => "funk",
            Pipeline::Duality => "duality",
        }
    }
}

/// Named analytic phantom.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    /// gaussian | shifted_gaussian | rational_offset | offset_abs | harmonic | zero
    pub name: String,
    /// Centre of shifted Gaussians (defaults to the last coordinate vector).
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Band limit of harmonic phantoms.
    #[serde(default)]
    pub band: Option<usize>,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec { name: "gaussian".into(), center: None, band: None }
    }
}

/// Optional overrides of the numerical budgets; unset fields keep library defaults.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub outer_circle: Option<usize>,
    pub outer_sphere_order: Option<usize>,
    pub line_nodes: Option<usize>,
    pub funk_circle: Option<usize>,
    pub funk_sphere_order: Option<usize>,
    pub funk_radial_intervals: Option<usize>,
    pub r_max: Option<f64>,
    pub radial_intervals: Option<usize>,
    pub rj_t_max: Option<f64>,
    pub rj_intervals: Option<usize>,
    pub rj_circle: Option<usize>,
    pub rj_sphere_order: Option<usize>,
    /// Use Haar Monte Carlo with this many rotations instead of cubature in d-plane inversions.
    pub rj_mc_samples: Option<usize>,
    /// Monte Carlo samples per side of the duality checks.
    pub mc_samples: Option<usize>,
    /// Grid size of the Erdélyi–Kober identity checks.
    pub grid_intervals: Option<usize>,
}

/// Dimensions and budgets.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub k_prime: Option<usize>,
    /// The auxiliary dimension ϰ; defaults to the smallest admissible value.
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub memoize: bool,
    #[serde(default)]
    pub budget: BudgetSpec,
}

/// A complete experiment.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub seed: u64,
    /// CSV destination; defaults to `<name>.csv`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Number of sample points (planes or subspaces) where applicable.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub phantom: PhantomSpec,
    pub config: ConfigSpec,
    /// Overrides the per-check tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).context("malformed experiment spec")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn output_path(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.name)))
    }

    pub fn k_prime(&self) -> usize {
        self.config.k_prime.unwrap_or(self.config.k + 1)
    }

    /// Smallest admissible ϰ for the pipeline unless set explicitly.
    pub fn kappa(&self) -> usize {
        let (n, k, kp) = (self.config.n, self.config.k, self.k_prime());
        self.config.kappa.unwrap_or(match self.pipeline {
            Pipeline::InvertDualQr | Pipeline::InvertDualGeneral => (n - kp).saturating_sub(1),
            _ => k,
        })
    }

    /// Checks dimensions, inequalities and phantom compatibility before any computation.
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.config.n, self.config.k);
        let kp = self.k_prime();
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                bail!("tolerance must be positive and finite");
            }
        }
        let phantom = self.phantom.name.as_str();
        let known = ["gaussian", "shifted_gaussian", "rational_offset", "offset_abs", "harmonic", "zero"];
        if !known.contains(&phantom) {
            bail!("unknown phantom {phantom:?} (expected one of {})", known.join(", "));
        }
        if let Some(c) = &self.phantom.center {
            if c.len() != n {
                bail!("phantom centre has {} coordinates, expected n = {n}", c.len());
            }
        }
        let allow = |names: &[&str]| -> Result<()> {
            if !names.contains(&phantom) {
                bail!("pipeline {} does not support phantom {phantom:?} (use {})", self.pipeline.name(), names.join(", "));
            }
            Ok(())
        };
        let fixed = |want: (usize, usize, usize)| -> Result<()> {
            if (n, k, kp) != want {
                bail!(
                    "pipeline {} is implemented for (n, k, k') = {want:?}, got ({n}, {k}, {kp})",
                    self.pipeline.name()
                );
            }
            Ok(())
        };
        match self.pipeline {
            Pipeline::EkIdentity | Pipeline::Selftest | Pipeline::Remark | Pipeline::Funk | Pipeline::Duality => {
                if matches!(self.pipeline, Pipeline::Remark | Pipeline::Duality) {
                    fixed((3, 1, 2))?;
                }
                if self.pipeline == Pipeline::Funk {
                    if n != 3 || k != 1 {
                        bail!("the Funk round trip runs from lines to planes in ℝ³ (n = 3, k = 1)");
                    }
                    allow(&["harmonic"])?;
                }
                return Ok(());
            }
            Pipeline::RadialReduction => {
                if n > grassradon::geometry::MAX_DIM || k == 0 || k >= n {
                    bail!("radial reduction needs 0 < d < m ≤ {} (got m = {n}, d = {k})", grassradon::geometry::MAX_DIM);
                }
                return allow(&["gaussian", "zero"]);
            }
            _ => {}
        }
        let cfg = self.pipeline_config()?;
        match self.pipeline {
            Pipeline::Forward => allow(&["gaussian", "shifted_gaussian", "zero"])?,
            Pipeline::Dual => {
                fixed((3, 1, 2))?;
                allow(&["rational_offset", "offset_abs", "zero"])?
            }
            Pipeline::InvertQr => {
                if k != 1 {
                    bail!("quasi-radial inversion is implemented for k = 1");
                }
                if k + kp > n {
                    bail!("k + k' ≤ n required: Funk transform not injective ({k} + {kp} > {n})");
                }
                allow(&["gaussian", "zero"])?
            }
            Pipeline::InvertGeneral => {
                cfg.validate_forward_inversion()?;
                if k != 1 {
                    bail!("the general pipeline is implemented for k = 1");
                }
                allow(&["gaussian", "shifted_gaussian", "zero"])?
            }
            Pipeline::InvertDualQr => {
                cfg.validate_dual_inversion()?;
                if k != 1 || kp != n - 1 {
                    bail!("dual quasi-radial inversion is implemented for k = 1, k' = n − 1");
                }
                allow(&["gaussian", "zero"])?
            }
            Pipeline::InvertDualGeneral => {
                cfg.validate_dual_inversion()?;
                fixed((3, 1, 2))?;
                allow(&["rational_offset", "zero"])?
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Library configuration with the budget overrides applied.
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let b = &self.config.budget;
        let mut cfg = PipelineConfig::new(self.config.n, self.config.k, self.k_prime(), self.kappa())?;
        if b.outer_circle.is_some() || b.outer_sphere_order.is_some() {
            cfg.outer = Cubature::new(
                b.outer_circle.unwrap_or(cfg.outer.circle),
                b.outer_sphere_order.unwrap_or(sphere_order(&cfg.outer)),
            );
        }
        if let Some(v) = b.line_nodes {
            cfg.line_nodes = v;
        }
        if b.funk_circle.is_some() || b.funk_sphere_order.is_some() || b.funk_radial_intervals.is_some() {
            cfg.funk = FunkConfig::coarse(
                b.funk_circle.unwrap_or(cfg.funk.cubature.circle),
                b.funk_sphere_order.unwrap_or(sphere_order(&cfg.funk.cubature)),
                b.funk_radial_intervals.unwrap_or(cfg.funk.radial_intervals),
            );
        }
        cfg.radial = RadialConfig {
            r_max: b.r_max.unwrap_or(cfg.radial.r_max),
            intervals: b.radial_intervals.unwrap_or(cfg.radial.intervals),
        };
        if let Some(v) = b.rj_t_max {
            cfg.radon_john.t_max = v;
        }
        if let Some(v) = b.rj_intervals {
            cfg.radon_john.intervals = v;
        }
        if let RotationAverage::Cubature(c) = &cfg.radon_john.average {
            if b.rj_circle.is_some() || b.rj_sphere_order.is_some() {
                cfg.radon_john.average = RotationAverage::Cubature(Cubature::new(
                    b.rj_circle.unwrap_or(c.circle),
                    b.rj_sphere_order.unwrap_or(sphere_order(c)),
                ));
            }
        }
        if let Some(samples) = b.rj_mc_samples {
            cfg.radon_john.average = RotationAverage::MonteCarlo { samples };
        }
        cfg.memoize = self.config.memoize;
        cfg.seed = StreamHandle::new(self.seed);
        cfg.radon_john.seed = StreamHandle::new(self.seed).split(1);
        Ok(cfg)
    }
}

/// Order of the product sphere rule of a cubature (its number of polar nodes).
fn sphere_order(c: &Cubature) -> usize {
    ((c.sphere.len() / 2) as f64).sqrt().round() as usize
}
