//! Experiment configuration: a versioned JSON document, validated in full
//! before anything is computed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::anchors::Check;
use crate::discrete_space::GeometryParams;
use crate::error::{Error, Result};
use crate::isoperimetry::{Ball, FamilyKind};
use crate::region::BoxRegion;
use crate::weight_spaces::{Sign, WeightSpec};

pub const SCHEMA: &str = "hbmo-experiment/1";

/// The weight inline, or a path to a JSON weight spec (relative paths are
/// resolved against the config file's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightRef {
    Path(PathBuf),
    Inline(WeightSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// `(k_min, k_max)`; chosen from the diameter and separation when absent.
    #[serde(default)]
    pub levels: Option<(i32, i32)>,
}

fn default_delta() -> f64 {
    0.5
}

impl Default for CubeConfig {
    fn default() -> Self {
        CubeConfig {
            delta: default_delta(),
            levels: None,
        }
    }
}

/// Tuning knobs shared by the checks; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    /// Random functions per check.
    pub suite_size: usize,
    /// BMO exponent.
    pub q: f64,
    /// Atom exponent.
    pub r: f64,
    /// Exponent of the sharp-maximal ratio.
    pub p: f64,
    /// Random net-center pairs for the chain check.
    pub pairs: usize,
    /// Additive constant in `b' = 2 C1 + C0`.
    pub c0: f64,
    pub eta_prime: f64,
    /// Test families of the isoperimetric estimate.
    pub families: Vec<FamilyKind>,
    /// Steps per annulus / slab family, or cube unions drawn.
    pub family_steps: usize,
    /// The excluded ball; the heaviest point with a small radius when absent.
    pub b0: Option<Ball>,
    /// The layer-width grid starts at twice the connectivity scale and takes
    /// `kappa_points` steps of `kappa_step`, unless `kappa_grid` is given.
    pub kappa_points: usize,
    pub kappa_step: f64,
    pub kappa_grid: Option<Vec<f64>>,
    /// Samples per axis for the tameness check.
    pub tame_samples: usize,
    /// Shell radius for the admissibility check, where the asymptotic
    /// conditions are sampled; twice `tau0`, and at least 4, when absent.
    pub shell_radius: Option<f64>,
    /// Largest space the dense kernel check accepts.
    pub kernel_limit: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            suite_size: 20,
            q: 1.0,
            r: 2.0,
            p: 2.0,
            pairs: 50,
            c0: 1.0,
            eta_prime: 0.9,
            families: vec![FamilyKind::Annuli, FamilyKind::Slabs],
            family_steps: 12,
            b0: None,
            kappa_points: 20,
            kappa_step: 0.05,
            kappa_grid: None,
            tame_samples: 41,
            shell_radius: None,
            kernel_limit: 4000,
        }
    }
}

impl CheckOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Configuration(format!("options: {what}")));
        if self.suite_size == 0 {
            return bad("suite_size must be positive");
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return bad("q must lie in [1, inf)");
        }
        if !(self.r > 1.0) {
            return bad("r must lie in (1, inf]");
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad("p must lie in (1, inf)");
        }
        if self.pairs == 0 {
            return bad("pairs must be positive");
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad("c0 must be positive");
        }
        if !(self.eta_prime > 0.0 && self.eta_prime < 1.0) {
            return bad("eta_prime must lie in (0, 1)");
        }
        if self.families.is_empty() {
            return bad("families must be nonempty");
        }
        if let Some(b0) = &self.b0 {
            if !(b0.radius >= 0.0 && b0.radius.is_finite()) {
                return bad("b0 radius must be nonnegative");
            }
        }
        if self.family_steps == 0 || self.kappa_points == 0 {
            return bad("family_steps and kappa_points must be positive");
        }
        if !(self.kappa_step > 0.0 && self.kappa_step.is_finite()) {
            return bad("kappa_step must be positive");
        }
        if let Some(g) = &self.kappa_grid {
            if g.is_empty() || g.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
                return bad("kappa_grid must be a nonempty list of positive widths");
            }
        }
        if self.tame_samples < 3 {
            return bad("tame_samples must be at least 3");
        }
        if let Some(r) = self.shell_radius {
            if !(r > 0.0 && r.is_finite()) {
                return bad("shell_radius must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub weight: WeightRef,
    /// Discretization box; for the minus sign it defaults to the box holding
    /// all but `tail_mass` of the measure.
    #[serde(default)]
    pub domain: Option<BoxRegion>,
    #[serde(default = "default_tail_mass")]
    pub tail_mass: f64,
    pub h: f64,
    pub sign: Sign,
    pub geometry: GeometryParams,
    #[serde(default)]
    pub cubes: CubeConfig,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Output directory; relative paths resolve against the config file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: CheckOptions,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_tail_mass() -> f64 {
    1e-4
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Configuration(e.to_string())
}

impl ExperimentConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(config_error)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// The weight, reading it from disk when given by path.
    pub fn weight_spec(&self) -> Result<WeightSpec> {
        match &self.weight {
            WeightRef::Inline(spec) => {
                spec.validate().map_err(config_error)?;
                Ok(spec.clone())
            }
            WeightRef::Path(p) => {
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| config_error(format!("weight spec {}: {e}", path.display())))?;
                WeightSpec::from_json(&text)
                    .map_err(|e| config_error(format!("weight spec {}: {e}", path.display())))
            }
        }
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve(p))
    }

    /// Every invariant that can be checked without discretizing.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(config_error(format!(
                "schema {:?} is not {SCHEMA:?}",
                self.schema
            )));
        }
        let spec = self.weight_spec()?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(config_error("h must be positive"));
        }
        match &self.domain {
            Some(bx) => {
                bx.validate().map_err(config_error)?;
                if bx.dim() != spec.dimension {
                    return Err(config_error(format!(
                        "domain has dimension {} but the weight has dimension {}",
                        bx.dim(),
                        spec.dimension
                    )));
                }
            }
            None if self.sign == Sign::Plus => {
                return Err(config_error(
                    "the plus sign has infinite mass; give an explicit domain",
                ));
            }
            None => {
                if !(self.tail_mass > 0.0 && self.tail_mass < 1.0) {
                    return Err(config_error("tail_mass must lie in (0, 1)"));
                }
            }
        }
        self.geometry.validate().map_err(config_error)?;
        self.geometry
            .require_admissible_scale()
            .map_err(config_error)?;
        if !(self.cubes.delta > 0.0 && self.cubes.delta < 1.0) {
            return Err(config_error("cube delta must lie in (0, 1)"));
        }
        if let Some((lo, hi)) = self.cubes.levels {
            if lo > hi {
                return Err(config_error("cube levels must satisfy k_min <= k_max"));
            }
        }
        self.options.validate()
    }
}
