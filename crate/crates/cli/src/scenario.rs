//! JSON scenario files. One file describes one market; command-line flags
//! pick the computation.
//!
//! ```json
//! {
//!   "distribution": { "kind": "uniform", "beta": 1.0 },
//!   "incumbent": { "q1": 1.687 },
//!   "technologies": [
//!     { "name": "split", "qos": { "kind": "linear", "q_bar": 1.633, "c": 0.088 }, "cost": 0.0 }
//!   ],
//!   "prices": { "p1": 1.0, "p2": 1.2 },
//!   "dynamics": { "variant": { "kind": "synchronous" }, "lambda0": 0.0 },
//!   "metadata": { "note": "anything" }
//! }
//! ```
//!
//! Data-file paths are resolved relative to the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nspmarket_core::{
    MarketMode, MonopolyVariant, QosModel, SelectionProblem, Technology, ValuationDistribution,
};
use serde::Deserialize;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub incumbent: Option<IncumbentSpec>,
    pub technologies: Vec<TechnologySpec>,
    #[serde(default)]
    pub prices: Option<PriceSpec>,
    #[serde(default)]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform { beta: f64 },
    /// Tabulated density from a CSV file with header `alpha,pdf`.
    Custom { pdf_file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncumbentSpec {
    pub q1: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologySpec {
    pub name: String,
    pub qos: QosSpec,
    #[serde(default)]
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QosSpec {
    Constant { q: f64 },
    Linear { q_bar: f64, c: f64 },
    /// Table from a CSV file with header `lambda,qos`.
    Tabulated { file: PathBuf },
}

/// `p1` is the incumbent's price and is only needed with an incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSpec {
    #[serde(default)]
    pub p1: Option<f64>,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    #[serde(default)]
    pub variant: VariantSpec,
    pub lambda0: InitialShares,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariantSpec {
    #[default]
    Synchronous,
    Partial { epsilon: f64 },
    SwitchingCost { c_s: f64 },
    PositiveExternality { q_bar: f64, delta: f64, phi: f64, gamma: f64 },
}

impl From<VariantSpec> for MonopolyVariant {
    fn from(v: VariantSpec) -> Self {
        match v {
            VariantSpec::Synchronous => MonopolyVariant::Synchronous,
            VariantSpec::Partial { epsilon } => MonopolyVariant::Partial { epsilon },
            VariantSpec::SwitchingCost { c_s } => MonopolyVariant::SwitchingCost { c_s },
            VariantSpec::PositiveExternality { q_bar, delta, phi, gamma } => {
                MonopolyVariant::PositiveExternality { q_bar, delta, phi, gamma }
            }
        }
    }
}

/// A scalar for the monopoly, a `[λ1, λ2]` pair for the duopoly.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InitialShares {
    Monopoly(f64),
    Duopoly([f64; 2]),
}

/// A validated scenario with every data file loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// File stem, used to name outputs.
    pub name: String,
    pub dist: ValuationDistribution,
    pub q1: Option<f64>,
    /// Entering technologies in file order, not-enter excluded.
    pub technologies: Vec<Technology>,
    pub prices: Option<PriceSpec>,
    pub dynamics: Option<DynamicsSpec>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: ScenarioFile =
            serde_json::from_str(&text).map_err(|e| CliError::config(path, e.to_string()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_file(name, file, base).map_err(|e| e.in_file(path))
    }

    pub fn from_file(name: String, file: ScenarioFile, base: &Path) -> Result<Self> {
        let dist = match &file.distribution {
            DistributionSpec::Uniform { beta } => ValuationDistribution::uniform(*beta)?,
            DistributionSpec::Custom { pdf_file } => {
                let p = base.join(pdf_file);
                ValuationDistribution::from_csv_path(&p).map_err(|e| CliError::data(&p, e))?
            }
        };
        let technologies = file
            .technologies
            .iter()
            .map(|t| {
                let qos = match &t.qos {
                    QosSpec::Constant { q } => QosModel::constant(*q)?,
                    QosSpec::Linear { q_bar, c } => QosModel::linear(*q_bar, *c)?,
                    QosSpec::Tabulated { file } => {
                        let p = base.join(file);
                        QosModel::from_csv_path(&p).map_err(|e| CliError::data(&p, e))?
                    }
                };
                Ok(Technology::new(t.name.clone(), qos, t.cost)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if technologies.is_empty() {
            return Err(CliError::Invalid("at least one technology is required".into()));
        }
        if let Some(d) = &file.dynamics {
            MonopolyVariant::from(d.variant).validate()?;
        }
        let scenario = Scenario {
            name,
            dist,
            q1: file.incumbent.map(|i| i.q1),
            technologies,
            prices: file.prices,
            dynamics: file.dynamics,
            metadata: file.metadata,
        };
        scenario.selection_problem()?;
        Ok(scenario)
    }

    /// The technology called `name`, or the only one when `name` is `None`.
    pub fn technology(&self, name: Option<&str>) -> Result<&Technology> {
        match name {
            Some(n) => self
                .technologies
                .iter()
                .find(|t| t.name == n)
                .ok_or_else(|| CliError::Invalid(format!("no technology named `{n}`"))),
            None if self.technologies.len() == 1 => Ok(&self.technologies[0]),
            None => Err(CliError::Invalid(format!(
                "scenario has {} technologies; pick one with --tech",
                self.technologies.len()
            ))),
        }
    }

    pub fn mode(&self) -> MarketMode {
        match self.q1 {
            Some(q1) => MarketMode::OneIncumbent(q1),
            None => MarketMode::NoIncumbent,
        }
    }

    pub fn selection_problem(&self) -> Result<SelectionProblem> {
        Ok(SelectionProblem::new(self.technologies.clone(), self.mode(), self.dist.clone())?)
    }

    pub fn require_q1(&self) -> Result<f64> {
        self.q1.ok_or_else(|| CliError::Invalid("this command needs an `incumbent` section".into()))
    }
}
