use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{ConditionOptions, DecayOptions, Estimator, MonteCarloOptions};
use crate::cocycle::{Orbit, RandomOpenSystem, SystemSpec};
use crate::error::{Error, Result};
use crate::quenched::{LambdaOptions, TestFunction};

fn default_resolution() -> usize {
    256
}
fn default_tol_lambda() -> f64 {
    1e-10
}
fn default_n_max() -> usize {
    400
}
fn default_tol_t() -> f64 {
    1e-3
}
fn default_estimator() -> Estimator {
    Estimator::Sandwich
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitWindow {
    pub n_back: usize,
    pub n_fwd: usize,
}

impl Default for OrbitWindow {
    fn default() -> Self {
        OrbitWindow {
            n_back: 64,
            n_fwd: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    /// Monte Carlo orbit count `K`.
    pub orbits: usize,
    /// Forward depth `n` of each orbit.
    pub depth: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            orbits: 64,
            depth: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionSection {
    /// Survivor depths `[lo, hi]` for the box-count comparison; omitted when absent.
    pub box_count_depths: Option<[usize; 2]>,
}

impl Default for DimensionSection {
    fn default() -> Self {
        DimensionSection {
            box_count_depths: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscapeSection {
    pub depth: usize,
}

impl Default for EscapeSection {
    fn default() -> Self {
        EscapeSection { depth: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySection {
    pub depth: usize,
    pub positions: Vec<i64>,
}

impl Default for DensitySection {
    fn default() -> Self {
        DensitySection {
            depth: 30,
            positions: vec![0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub depth: usize,
    pub backward: usize,
    pub correlations: bool,
    /// Test functions; the standard battery when absent.
    pub battery: Option<Vec<TestFunction>>,
}

impl Default for DecaySection {
    fn default() -> Self {
        let d = DecayOptions::default();
        DecaySection {
            depth: d.depth,
            backward: d.backward,
            correlations: false,
            battery: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    pub n1: usize,
    pub n2: usize,
    pub monte_carlo: bool,
    pub samples: usize,
    pub covering_depth: usize,
    /// Depth of the Lasota–Yorke constants.
    pub ly_depth: usize,
}

impl Default for CheckSection {
    fn default() -> Self {
        let c = ConditionOptions::default();
        CheckSection {
            n1: c.n1,
            n2: c.n2,
            monte_carlo: c.monte_carlo,
            samples: c.samples,
            covering_depth: c.covering_depth,
            ly_depth: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub depth: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { depth: 8 }
    }
}

/// One run of the command-line pipeline. Every field except `system` has
/// a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub orbit: OrbitWindow,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_tol_lambda")]
    pub tol_lambda: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_tol_t")]
    pub tol_t: f64,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub dimension: DimensionSection,
    #[serde(default)]
    pub escape: EscapeSection,
    #[serde(default)]
    pub density: DensitySection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

impl RunConfig {
    /// A config around `system` with every other field at its default.
    pub fn new(system: SystemSpec) -> Self {
        serde_json::from_value(serde_json::json!({ "system": system }))
            .expect("defaults always deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        positive(self.tol_lambda, "tol_lambda")?;
        positive(self.tol_t, "tol_t")?;
        if self.resolution < 2 {
            return Err(Error::config("resolution", "need at least 2 cells"));
        }
        if self.n_max == 0 {
            return Err(Error::config("n_max", "must be at least 1"));
        }
        if self.samples.orbits == 0 || self.samples.depth == 0 {
            return Err(Error::config(
                "samples",
                "orbits and depth must be at least 1",
            ));
        }
        if let Some((i, t)) = self.t_grid.iter().enumerate().find(|(_, t)| !t.is_finite()) {
            return Err(Error::config(
                format!("t_grid[{i}]"),
                format!("not finite: {t}"),
            ));
        }
        if let Some([lo, hi]) = self.dimension.box_count_depths {
            if hi < lo + 2 {
                return Err(Error::config(
                    "dimension.box_count_depths",
                    "need at least three depths",
                ));
            }
        }
        if let Some(b) = &self.decay.battery {
            if b.is_empty() {
                return Err(Error::config(
                    "decay.battery",
                    "at least one test function is required",
                ));
            }
        }
        if self.check.ly_depth == 0 {
            return Err(Error::config("check.ly_depth", "must be at least 1"));
        }
        self.system.build()?;
        Ok(())
    }

    pub fn build_system(&self) -> Result<RandomOpenSystem> {
        self.system.build()
    }

    pub fn lambda_options(&self) -> LambdaOptions {
        LambdaOptions {
            n_max: self.n_max,
            tol: self.tol_lambda,
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloOptions {
        MonteCarloOptions {
            orbits: self.samples.orbits,
            depth: self.samples.depth,
            resolution: self.resolution,
            seed: self.seed,
            lambda: self.lambda_options(),
        }
    }

    /// The orbit used by single-orbit commands, sampled from `seed`.
    pub fn orbit(&self, system: &RandomOpenSystem) -> Orbit {
        system
            .driving()
            .sample_orbit(self.seed, self.orbit.n_back, self.orbit.n_fwd)
    }

    /// SHA-256 of the canonical JSON form of the effective config. The
    /// output directory is left out so reruns elsewhere hash the same.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.out = PathBuf::new();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANTOR: &str = r#"{"system": {"driving": {"kind": "iid", "probabilities": [1.0]},
        "fibers": [{"type": "beta", "params": {"beta": 3.0}, "hole": [[0.3333333333333333, 0.6666666666666666]]}]}}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_json(CANTOR).unwrap();
        assert_eq!(cfg.resolution, 256);
        assert_eq!(cfg.estimator, Estimator::Sandwich);
        assert_eq!(cfg.hash().len(), 64);
        assert_eq!(RunConfig::new(cfg.system.clone()), cfg);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = CANTOR.replacen('{', r#"{"tol_t": 0.0, "#, 1);
        assert!(
            matches!(RunConfig::from_json(&bad), Err(Error::Config { field, .. }) if field == "tol_t")
        );
        let unknown = CANTOR.replacen('{', r#"{"tolerance": 1, "#, 1);
        assert!(matches!(
            RunConfig::from_json(&unknown),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn hash_tracks_seed() {
        let mut cfg = RunConfig::from_json(CANTOR).unwrap();
        let h = cfg.hash();
        cfg.out = PathBuf::from("elsewhere");
        assert_eq!(h, cfg.hash());
        cfg.seed = 7;
        assert_ne!(h, cfg.hash());
    }
}
