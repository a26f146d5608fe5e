//! JSON system definitions.
//!
//! ```json
//! {
//!   "driving": {"kind": "iid", "probabilities": [0.5, 0.5]},
//!   "fibers": [
//!     {"type": "beta", "params": {"beta": 2.0}, "hole": [[0.5, 1.0]]},
//!     {"type": "affine", "params": {"breakpoints": [0, 0.5, 1], "slopes": [2, -2]}, "hole": []}
//!   ],
//!   "potential": {"t": 1.0}
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::branch::FiberMap;
use super::driving::DrivingSystem;
use super::system::{
    affine_map, beta_map, AffineFiberSpec, Fiber, Hole, Potential, RandomOpenSystem, StepFunction,
};
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberType {
    Beta,
    Affine,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_non_expanding: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    #[serde(rename = "type")]
    pub kind: FiberType,
    pub params: FiberParams,
    #[serde(default)]
    pub hole: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Geometric { t: f64 },
    Tabulated { tabulated: Vec<StepFunction> },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Geometric { t: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub driving: DrivingSystem,
    pub fibers: Vec<FiberSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub allow_wide_holes: bool,
    #[serde(default)]
    pub full_branch_guarantee: bool,
}

impl FiberSpec {
    pub fn beta(beta: f64, hole: &[[f64; 2]]) -> Self {
        FiberSpec {
            kind: FiberType::Beta,
            params: FiberParams {
                beta: Some(beta),
                ..Default::default()
            },
            hole: hole.to_vec(),
        }
    }

    pub fn affine(breakpoints: &[f64], slopes: &[f64], hole: &[[f64; 2]]) -> Self {
        FiberSpec {
            kind: FiberType::Affine,
            params: FiberParams {
                breakpoints: Some(breakpoints.to_vec()),
                slopes: Some(slopes.to_vec()),
                ..Default::default()
            },
            hole: hole.to_vec(),
        }
    }

    fn map(&self, index: usize) -> Result<FiberMap> {
        let field = |name: &str| format!("fibers[{index}].params.{name}");
        match self.kind {
            FiberType::Beta => {
                let beta = self
                    .params
                    .beta
                    .ok_or_else(|| Error::config(field("beta"), "missing"))?;
                beta_map(beta, index)
            }
            FiberType::Affine => {
                let breakpoints = self
                    .params
                    .breakpoints
                    .clone()
                    .ok_or_else(|| Error::config(field("breakpoints"), "missing"))?;
                let slopes = self
                    .params
                    .slopes
                    .clone()
                    .ok_or_else(|| Error::config(field("slopes"), "missing"))?;
                affine_map(
                    &AffineFiberSpec {
                        breakpoints,
                        slopes,
                        starts: self.params.starts.clone(),
                        allow_non_expanding: self.params.allow_non_expanding,
                    },
                    index,
                )
            }
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<RandomOpenSystem> {
        if self.fibers.is_empty() {
            return Err(Error::config("fibers", "at least one fiber is required"));
        }
        let mut fibers = Vec::with_capacity(self.fibers.len());
        for (s, spec) in self.fibers.iter().enumerate() {
            let map = spec.map(s)?;
            let hole = Hole::from_pairs(&spec.hole)?;
            if spec.kind == FiberType::Beta && !self.allow_wide_holes {
                let overlaps = map
                    .branches()
                    .iter()
                    .filter(|b| {
                        let d: Interval = b.domain();
                        hole.intervals().overlap_length(d.lo, d.hi) > super::branch::ENDPOINT_TOL
                    })
                    .count();
                if overlaps > 2 {
                    return Err(Error::Domain(format!(
                        "hole of fiber {s} meets {overlaps} branches; set allow_wide_holes to permit this"
                    )));
                }
            }
            fibers.push(Fiber { map, hole });
        }
        let potential = match &self.potential {
            PotentialSpec::Geometric { t } => Potential::Geometric { t: *t },
            PotentialSpec::Tabulated { tabulated } => {
                let per_symbol = tabulated
                    .iter()
                    .map(|s| StepFunction::new(s.breakpoints.clone(), s.values.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Potential::Tabulated { per_symbol }
            }
        };
        RandomOpenSystem::new(
            self.driving.clone(),
            fibers,
            potential,
            self.full_branch_guarantee,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"{
          "driving": {"kind": "iid", "probabilities": [0.5, 0.5]},
          "fibers": [
            {"type": "beta", "params": {"beta": 2.0}, "hole": [[0.5, 1.0]]},
            {"type": "affine", "params": {"breakpoints": [0, 0.5, 1], "slopes": [2, -2]}, "hole": []}
          ],
          "potential": {"t": 1.0}
        }"#;
        let sys = SystemSpec::from_json(text).unwrap().build().unwrap();
        assert_eq!(sys.alphabet_size(), 2);
        assert_eq!(sys.fiber(1).map.branches()[1].orientation(), -1);
        assert_eq!(sys.potential().geometric_t(), Some(1.0));
    }

    #[test]
    fn reports_missing_fields() {
        let spec = SystemSpec {
            driving: DrivingSystem::constant(),
            fibers: vec![FiberSpec {
                kind: FiberType::Beta,
                params: FiberParams::default(),
                hole: vec![],
            }],
            potential: PotentialSpec::default(),
            allow_wide_holes: false,
            full_branch_guarantee: false,
        };
        match spec.build() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "fibers[0].params.beta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tabulated_potential_roundtrip() {
        let text = r#"{
          "driving": {"kind": "iid", "probabilities": [1.0]},
          "fibers": [{"type": "beta", "params": {"beta": 2.0}}],
          "potential": {"tabulated": [{"breakpoints": [0, 0.5, 1], "values": [0.0, -1.0]}]}
        }"#;
        let spec = SystemSpec::from_json(text).unwrap();
        let sys = spec.build().unwrap();
        assert!((sys.weight(0, 1, 0.7) - (-1.0f64).exp()).abs() < 1e-15);
        let again: SystemSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
    }
}
