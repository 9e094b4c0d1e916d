//! Scenario files: one JSON object with a `kind` discriminator and a strict
//! schema per kind.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compliance::{ComplianceNetwork, RingSpec};
use crate::error::{invalid, Error, Result};
use crate::junction::{JunctionConfig, Mode};
use crate::tangle::{ArrivalKind, Injection, TangleConfig};

fn default_runs() -> usize {
    100
}

fn default_dt_out() -> f64 {
    0.5
}

fn default_types() -> usize {
    1
}

fn default_one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    TangleAgent(TangleScenario),
    TangleReduced(TangleScenario),
    Fluid(FluidScenario),
    Stability(StabilityScenario),
    ComplianceNet(ComplianceScenario),
    Junction(JunctionScenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangleScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub lambda: f64,
    pub h: f64,
    #[serde(default = "default_types")]
    pub types: usize,
    #[serde(default)]
    pub arrival: ArrivalKind,
    #[serde(default = "default_dt_out")]
    pub dt_out: f64,
    #[serde(default)]
    pub injections: Vec<Injection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub honest_until: Option<f64>,
    /// Also write one CSV per run.
    #[serde(default)]
    pub per_run_csv: bool,
}

impl TangleScenario {
    pub fn config(&self) -> TangleConfig {
        TangleConfig {
            lambda: self.lambda,
            h: self.h,
            types: self.types,
            horizon: self.horizon,
            arrival: self.arrival,
            dt_out: self.dt_out,
            injections: self.injections.clone(),
            honest_until: self.honest_until,
        }
    }
}

/// Constant initial history on `[0, h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidInitial {
    pub x: Vec<f64>,
    pub l: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub h: f64,
    pub initial: FluidInitial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default = "default_one")]
    pub arrival_rate: f64,
    #[serde(default = "default_true")]
    pub consistent_start: bool,
}

/// A network given explicitly or as a symmetric ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case")]
pub enum NetworkSpec {
    Ring(RingSpec),
    Explicit(ComplianceNetwork),
}

impl NetworkSpec {
    pub fn build(&self) -> Result<ComplianceNetwork> {
        match self {
            NetworkSpec::Ring(r) => ComplianceNetwork::ring(r),
            NetworkSpec::Explicit(n) => {
                n.validate()?;
                Ok(n.clone())
            }
        }
    }

    /// Parse a network description on its own (the `stability` command).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }
}

/// Overrides for the right-half-plane sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_max: Option<f64>,
    pub im_max: Option<f64>,
    pub re_points: Option<usize>,
    pub im_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplianceScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Offsets of the initial compliance from the targets; the initial
    /// costs are the static solution.
    #[serde(default)]
    pub perturbation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub config: JunctionConfig,
    pub control: Mode,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Scenario(m) => Error::Scenario(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::TangleAgent(_) => "tangle-agent",
            Scenario::TangleReduced(_) => "tangle-reduced",
            Scenario::Fluid(_) => "fluid",
            Scenario::Stability(_) => "stability",
            Scenario::ComplianceNet(_) => "compliance-net",
            Scenario::Junction(_) => "junction",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.seed,
            Scenario::Fluid(s) => s.seed,
            Scenario::Stability(s) => s.seed,
            Scenario::ComplianceNet(s) => s.seed,
            Scenario::Junction(s) => s.seed,
        }
    }

    pub fn runs(&self) -> usize {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.runs,
            Scenario::Fluid(s) => s.runs,
            Scenario::Stability(s) => s.runs,
            Scenario::ComplianceNet(s) => s.runs,
            Scenario::Junction(s) => s.runs,
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.output.as_deref(),
            Scenario::Fluid(s) => s.output.as_deref(),
            Scenario::Stability(s) => s.output.as_deref(),
            Scenario::ComplianceNet(s) => s.output.as_deref(),
            Scenario::Junction(s) => s.output.as_deref(),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.seed = seed,
            Scenario::Fluid(s) => s.seed = seed,
            Scenario::Stability(s) => s.seed = seed,
            Scenario::ComplianceNet(s) => s.seed = seed,
            Scenario::Junction(s) => s.seed = seed,
        }
    }

    pub fn set_runs(&mut self, runs: usize) {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.runs = runs,
            Scenario::Fluid(s) => s.runs = runs,
            Scenario::Stability(s) => s.runs = runs,
            Scenario::ComplianceNet(s) => s.runs = runs,
            Scenario::Junction(s) => s.runs = runs,
        }
    }

    pub fn set_output(&mut self, out: Option<PathBuf>) {
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.output = out,
            Scenario::Fluid(s) => s.output = out,
            Scenario::Stability(s) => s.output = out,
            Scenario::ComplianceNet(s) => s.output = out,
            Scenario::Junction(s) => s.output = out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs() == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        match self {
            Scenario::TangleAgent(s) | Scenario::TangleReduced(s) => s.config().validate(),
            Scenario::Fluid(s) => {
                let d = s.initial.l.len();
                if d == 0 || s.initial.x.len() != d {
                    return Err(invalid("initial.x and initial.l must have the same non-zero length"));
                }
                if s.initial.x.iter().zip(&s.initial.l).any(|(x, l)| !(*x >= 0.0 && l >= x)) {
                    return Err(invalid("initial state needs l >= x >= 0"));
                }
                if !(s.arrival_rate > 0.0) {
                    return Err(invalid("arrival_rate must be positive"));
                }
                if !(s.h > 0.0 && s.horizon > s.h) {
                    return Err(invalid("need h > 0 and horizon > h"));
                }
                Ok(())
            }
            Scenario::Stability(s) => s.network.build().map(|_| ()),
            Scenario::ComplianceNet(s) => {
                let net = s.network.build()?;
                if !s.perturbation.is_empty() && s.perturbation.len() != net.len() {
                    return Err(invalid("perturbation must have one entry per activity"));
                }
                if !(s.horizon > 0.0) {
                    return Err(invalid("horizon must be positive"));
                }
                Ok(())
            }
            Scenario::Junction(s) => {
                s.config.validate()?;
                s.control.validate()
            }
        }
    }

    /// SHA-256 of the canonical JSON form without the output path.
    pub fn config_hash(&self) -> String {
        let mut copy = self.clone();
        copy.set_output(None);
        // serde_json maps are ordered by key, so this form is canonical
        let value = serde_json::to_value(&copy).expect("scenario serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
