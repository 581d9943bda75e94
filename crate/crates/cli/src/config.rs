//! Experiment configuration: one JSON document per run. Component indices in
//! the file are 1-based (as in the accompanying reports); everything is
//! converted to 0-based at the boundary.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use nullwave_core::{InitialDatum, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Validate,
    Picard,
    Estimates,
    Stability,
    Glue,
    WaveBridge,
    Blowup,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::Picard => "picard",
            Experiment::Estimates => "estimates",
            Experiment::Stability => "stability",
            Experiment::Glue => "glue",
            Experiment::WaveBridge => "wave-bridge",
            Experiment::Blowup => "blowup",
        }
    }
}

/// What the run is supposed to demonstrate, when that differs from the
/// experiment's default (converged solve / held inequalities).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Converged,
    /// The smallness condition fails and the report must say so.
    Flagged,
    Blowup,
    Bounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub p: usize,
    pub speeds: Vec<f64>,
    /// Sparse tensor entries [i, j, k, value], 1-based components.
    #[serde(default)]
    pub coupling: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dx: f64,
    pub dt: f64,
    /// Absent: solve on the interaction triangle of the data interval.
    /// Present: solve on a rectangle covering the propagation cone up to
    /// this time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Extra space kept left and right of the window, in x units.
    #[serde(default)]
    pub padding: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub system: SystemBlock,
    /// One breakpoint list [[x, value], ...] per component.
    pub data: Vec<Vec<(f64, f64)>>,
    pub grid: GridBlock,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Randomized-sweep size for the estimates experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Perturbed data for the stability experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_bar: Option<Vec<Vec<(f64, f64)>>>,
    /// Partition intervals for the glue experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate_shape()?;
        Ok(config)
    }

    pub fn validate_shape(&self) -> Result<()> {
        let p = self.system.p;
        if p == 0 {
            bail!("system.p must be at least 1");
        }
        if self.system.speeds.len() != p {
            bail!("system.speeds has {} entries, system.p is {p}", self.system.speeds.len());
        }
        for &(i, j, k, v) in &self.system.coupling {
            for (axis, idx) in [("i", i), ("j", j), ("k", k)] {
                if idx == 0 || idx > p {
                    bail!("coupling index {axis} = {idx} outside 1..={p}");
                }
            }
            if !v.is_finite() {
                bail!("coupling entry ({i}, {j}, {k}) is not finite");
            }
        }
        if self.data.len() != p {
            bail!("data lists {} components, system.p is {p}", self.data.len());
        }
        if !(self.grid.dx > 0.0 && self.grid.dx.is_finite()) {
            bail!("grid.dx must be positive, got {}", self.grid.dx);
        }
        if !(self.grid.dt > 0.0 && self.grid.dt.is_finite()) {
            bail!("grid.dt must be positive, got {}", self.grid.dt);
        }
        if let Some(h) = self.grid.horizon {
            if !(h > 0.0 && h.is_finite()) {
                bail!("grid.horizon must be positive, got {h}");
            }
        }
        if !(self.grid.padding >= 0.0 && self.grid.padding.is_finite()) {
            bail!("grid.padding must be non-negative, got {}", self.grid.padding);
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<SystemSpec> {
        let triplets: Vec<(usize, usize, usize, f64)> = self
            .system
            .coupling
            .iter()
            .map(|&(i, j, k, v)| (i - 1, j - 1, k - 1, v))
            .collect();
        SystemSpec::from_triplets(self.system.speeds.clone(), &triplets)
            .context("building the system from config")
    }

    pub fn data(&self) -> Result<Vec<InitialDatum>> {
        build_data(&self.data).context("building initial data from config")
    }

    pub fn data_bar(&self) -> Result<Option<Vec<InitialDatum>>> {
        match &self.data_bar {
            None => Ok(None),
            Some(lists) => {
                if lists.len() != self.system.p {
                    bail!(
                        "data_bar lists {} components, system.p is {}",
                        lists.len(),
                        self.system.p
                    );
                }
                Ok(Some(build_data(lists).context("building perturbed data from config")?))
            }
        }
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

fn build_data(lists: &[Vec<(f64, f64)>]) -> Result<Vec<InitialDatum>> {
    lists
        .iter()
        .enumerate()
        .map(|(i, pts)| {
            if pts.is_empty() {
                return Ok(InitialDatum::zero());
            }
            InitialDatum::new(pts.clone())
                .with_context(|| format!("data component {}", i + 1))
        })
        .collect()
}
