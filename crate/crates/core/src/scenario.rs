//! Scenario files: a JSON description of nodes, behaviors and client
//! submissions whose probe and key files live next to it.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biometric::{ActorRegistry, BiometricError, BiometricTemplate, ScramblingKey};
use crate::consensus::Behavior;
use crate::constants::{DEFAULT_THRESHOLD, DEFAULT_TIMEOUT_TICKS};
use crate::ledger::{Chain, Stage, SupplyChainEvent};
use crate::sim::{NetworkConfig, RejectedSubmission, SimConfig, SimError, Simulation, Submission};

pub const DEFAULT_MAX_TICKS: u64 = 1_000_000;
pub const DEFAULT_MAX_BLOCK_TXS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub nodes: u32,
    pub behaviors: Vec<Behavior>,
    #[serde(default = "default_timeout")]
    pub timeout_ticks: u64,
    pub seed: u64,
    #[serde(default)]
    pub threshold: Option<u64>,
    #[serde(default)]
    pub network: Option<NetworkConfig>,
    #[serde(default)]
    pub max_block_txs: Option<usize>,
    #[serde(default)]
    pub max_ticks: Option<u64>,
    pub registry_file: PathBuf,
    pub submissions: Vec<ScenarioSubmission>,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_TICKS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSubmission {
    pub tick: u64,
    pub node: u32,
    #[serde(flatten)]
    pub event: EventFields,
    pub actor_id: u32,
    pub probe_file: PathBuf,
    pub key_file: PathBuf,
}

/// Event fields as written in a scenario; `event_time` defaults to the
/// submission tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFields {
    pub item_id: String,
    pub stage: Stage,
    #[serde(default)]
    pub batch_number: String,
    #[serde(default)]
    pub origin: String,
    #[serde(default)]
    pub storage_temp: i32,
    #[serde(default)]
    pub expiry: u64,
    #[serde(default)]
    pub event_time: Option<u64>,
    #[serde(default)]
    pub ingredients_added: Vec<String>,
    #[serde(default)]
    pub declared_label: Vec<String>,
}

impl EventFields {
    pub fn to_event(&self, tick: u64) -> SupplyChainEvent {
        SupplyChainEvent {
            item_id: self.item_id.clone(),
            stage: self.stage,
            batch_number: self.batch_number.clone(),
            origin: self.origin.clone(),
            storage_temp: self.storage_temp,
            expiry: self.expiry,
            event_time: self.event_time.unwrap_or(tick),
            ingredients_added: self.ingredients_added.clone(),
            declared_label: self.declared_label.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Biometric { path: PathBuf, source: BiometricError },
    #[error("behaviors lists {behaviors} entries for {nodes} nodes")]
    BehaviorCount { nodes: u32, behaviors: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub committed_blocks: u64,
    pub committed_txs: usize,
    pub rejected_txs: Vec<RejectedSubmission>,
    pub final_tick: u64,
    pub honest_heads_identical: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    /// The reference node's chain (node 0, or the first honest node).
    pub chain: Chain,
    /// Set when the tick budget ran out; `summary` is then partial.
    pub error: Option<SimError>,
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_owned(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    serde_json::from_str(&read(path)?).map_err(|source| ScenarioError::Json { path: path.to_owned(), source })
}

/// A scenario with every referenced file loaded and probes scrambled.
pub struct LoadedScenario {
    pub config: SimConfig,
    pub registry: ActorRegistry,
    pub submissions: Vec<Submission>,
    pub max_ticks: u64,
}

impl LoadedScenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_file(file, base)
    }

    /// Resolves relative file paths against `base`.
    pub fn from_file(file: ScenarioFile, base: &Path) -> Result<Self, ScenarioError> {
        if file.behaviors.len() != file.nodes as usize {
            return Err(ScenarioError::BehaviorCount { nodes: file.nodes, behaviors: file.behaviors.len() });
        }
        let registry: ActorRegistry = read_json(&base.join(&file.registry_file))?;
        let mut submissions = Vec::with_capacity(file.submissions.len());
        for s in &file.submissions {
            let probe_path = base.join(&s.probe_file);
            let probe: BiometricTemplate = read_json(&probe_path)?;
            let key: ScramblingKey = read_json(&base.join(&s.key_file))?;
            let probe = key.scramble(&probe).map_err(|source| ScenarioError::Biometric { path: probe_path, source })?;
            submissions.push(Submission {
                tick: s.tick,
                node: s.node,
                event: s.event.to_event(s.tick),
                actor_id: s.actor_id,
                probe,
            });
        }
        let network = file.network.unwrap_or(NetworkConfig { seed: file.seed, ..NetworkConfig::default() });
        let config = SimConfig {
            behaviors: file.behaviors,
            timeout_ticks: file.timeout_ticks,
            threshold: file.threshold.unwrap_or(DEFAULT_THRESHOLD),
            seed: file.seed,
            network,
            max_block_txs: file.max_block_txs.unwrap_or(DEFAULT_MAX_BLOCK_TXS),
        };
        Ok(LoadedScenario { config, registry, submissions, max_ticks: file.max_ticks.unwrap_or(DEFAULT_MAX_TICKS) })
    }

    pub fn run(self) -> Result<RunOutcome, ScenarioError> {
        let mut sim = Simulation::new(self.config, Arc::new(self.registry), self.submissions)?;
        let result = sim.run_until_quiet(self.max_ticks);
        let chain = sim.reference_node().map(|n| n.head().clone()).unwrap_or_default();
        let summary = RunSummary {
            committed_blocks: chain.height(),
            committed_txs: chain.tx_count(),
            rejected_txs: sim.rejected().to_vec(),
            final_tick: sim.now(),
            honest_heads_identical: sim.honest_heads_identical(),
        };
        Ok(RunOutcome { summary, chain, error: result.err() })
    }
}

pub fn run_scenario(path: &Path) -> Result<RunOutcome, ScenarioError> {
    LoadedScenario::load(path)?.run()
}
