use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::godunov::{BoundaryTrace, GridSpec, InitialProfile};
use crate::pde::GreenshieldsFlux;
use crate::trainer::TrainConfig;

/// Road scenario simulated to produce measurements and the reference field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    pub v_f: f64,
    pub initial: InitialProfile,
    /// Defaults to constant traces equal to the initial values at each end.
    pub boundary: Option<BoundaryTrace>,
}

impl Default for Scenario {
    /// Three constant states 0.8 / 0.2 / 0.6 on thirds of the unit road:
    /// a rarefaction on the left interface and a shock on the right one.
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            v_f: 1.0,
            initial: InitialProfile::Piecewise {
                breakpoints: vec![1.0 / 3.0, 2.0 / 3.0],
                values: vec![0.8, 0.2, 0.6],
            },
            boundary: None,
        }
    }
}

impl Scenario {
    pub fn flux(&self) -> Result<GreenshieldsFlux> {
        GreenshieldsFlux::new(self.v_f)
    }

    pub fn boundary_trace(&self) -> BoundaryTrace {
        self.boundary.clone().unwrap_or_else(|| {
            let (l, r) = self.initial.end_values(self.grid.length);
            BoundaryTrace::constant(l, r)
        })
    }

    /// The same scenario with every default made explicit.
    pub fn resolved(&self) -> Self {
        Self {
            boundary: Some(self.boundary_trace()),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub train: TrainConfig,
    /// Residual-block counts trained by `sweep`.
    pub sweep: Vec<usize>,
    /// Training seeds used by `sweep`.
    pub seeds: Vec<u64>,
    /// Standard deviation of Gaussian noise added to measurements.
    pub noise_std: f64,
    pub noise_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            train: TrainConfig::default(),
            sweep: vec![0, 1, 3, 5],
            seeds: vec![0, 1, 2],
            noise_std: 0.0,
            noise_seed: 0,
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.grid.validate()?;
        self.scenario.flux()?;
        self.scenario.initial.validate()?;
        let bc = self.scenario.boundary_trace();
        bc.left.validate()?;
        bc.right.validate()?;
        self.train.validate()?;
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// Fully explicit configuration, suitable for writing next to results.
    pub fn resolved(&self) -> Self {
        Self {
            scenario: self.scenario.resolved(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
