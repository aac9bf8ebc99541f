//! Deterministic discrete-event simulation of the member network.
//!
//! A single loop owns every node and the message queue. At any tick, scripted
//! submissions run first, then message deliveries in `(deliver_at, seq)`
//! order, then node timeouts in node-id order.

mod network;

pub use network::{ConfigError, NetStats, NetworkConfig, Outcome, Partition, SimEvent, SimNetwork, TraceEntry};

use std::sync::Arc;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::biometric::{ActorRegistry, EncryptedTemplate};
use crate::chainfile::encode_chain;
use crate::consensus::{Behavior, Message, Node, NodeConfig, RejectionReason};
use crate::hash::Hash32;
use crate::ledger::{Chain, SupplyChainEvent};
use crate::rng::substream;

/// A client handing a scrambled probe and an event to a gateway node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub tick: u64,
    pub node: u32,
    pub event: SupplyChainEvent,
    pub actor_id: u32,
    pub probe: EncryptedTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedSubmission {
    pub submission: usize,
    pub tick: u64,
    pub node: u32,
    pub actor_id: u32,
    pub item_id: String,
    pub reason: RejectionReason,
    pub score: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub behaviors: Vec<Behavior>,
    pub timeout_ticks: u64,
    pub threshold: u64,
    pub seed: u64,
    pub network: NetworkConfig,
    pub max_block_txs: usize,
}

impl SimConfig {
    pub fn honest(n: u32, seed: u64) -> Self {
        SimConfig {
            behaviors: vec![Behavior::Honest; n as usize],
            timeout_ticks: crate::constants::DEFAULT_TIMEOUT_TICKS,
            threshold: crate::constants::DEFAULT_THRESHOLD,
            seed,
            network: NetworkConfig { seed, ..NetworkConfig::default() },
            max_block_txs: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("tick budget {max_ticks} exhausted at tick {tick} with work pending")]
    BudgetExceeded { max_ticks: u64, tick: u64 },
    #[error(transparent)]
    Network(#[from] ConfigError),
    #[error("a simulation needs at least one node")]
    NoNodes,
    #[error("submission {0} targets a node that does not exist")]
    UnknownGateway(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Submitted { index: usize, tick: u64 },
    Delivered(Box<SimEvent>),
    Timeout { node: u32, tick: u64 },
    Idle,
}

pub struct Simulation {
    net: SimNetwork,
    nodes: Vec<Node>,
    submissions: Vec<Submission>,
    next_submission: usize,
    accepted: Vec<(usize, Hash32)>,
    rejected: Vec<RejectedSubmission>,
    nonce_rng: ChaCha8Rng,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Due {
    Submission,
    Message,
    Timer(u32),
}

impl Simulation {
    pub fn new(
        config: SimConfig,
        registry: Arc<ActorRegistry>,
        mut submissions: Vec<Submission>,
    ) -> Result<Self, SimError> {
        let n = u32::try_from(config.behaviors.len()).expect("node count fits u32");
        if n == 0 {
            return Err(SimError::NoNodes);
        }
        if let Some(i) = submissions.iter().position(|s| s.node >= n) {
            return Err(SimError::UnknownGateway(i));
        }
        let node_config = NodeConfig {
            n,
            timeout_ticks: config.timeout_ticks,
            threshold: config.threshold,
            max_block_txs: config.max_block_txs,
        };
        let nodes = config
            .behaviors
            .iter()
            .enumerate()
            .map(|(id, &b)| Node::new(id as u32, b, node_config, Arc::clone(&registry), config.seed))
            .collect();
        submissions.sort_by_key(|s| s.tick);
        Ok(Simulation {
            net: SimNetwork::new(config.network)?,
            nodes,
            submissions,
            next_submission: 0,
            accepted: Vec::new(),
            rejected: Vec::new(),
            nonce_rng: substream(config.seed, "submission/nonce"),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn network(&self) -> &SimNetwork {
        &self.net
    }

    pub fn now(&self) -> u64 {
        self.net.now()
    }

    pub fn submissions(&self) -> &[Submission] {
        &self.submissions
    }

    /// `(submission index, tx_id)` for every submission accepted by its gateway.
    pub fn accepted(&self) -> &[(usize, Hash32)] {
        &self.accepted
    }

    pub fn rejected(&self) -> &[RejectedSubmission] {
        &self.rejected
    }

    fn next_due(&self) -> Option<(u64, Due)> {
        let sub = self.submissions.get(self.next_submission).map(|s| (s.tick.max(self.now()), Due::Submission));
        let msg = self.net.next_delivery().map(|t| (t, Due::Message));
        let timer = self
            .nodes
            .iter()
            .filter_map(|node| node.deadline().map(|d| (d.max(self.now()), Due::Timer(node.node_id()))))
            .min();
        [sub, msg, timer].into_iter().flatten().min()
    }

    fn dispatch(&mut self, from: u32, out: Vec<crate::consensus::Envelope>) {
        let now = self.now();
        for env in out {
            self.net.send(Message { from, to: env.to, payload: env.payload }, now);
        }
    }

    pub fn step(&mut self) -> Step {
        let Some((tick, due)) = self.next_due() else {
            return Step::Idle;
        };
        match due {
            Due::Submission => {
                self.net.advance_to(tick);
                let index = self.next_submission;
                self.next_submission += 1;
                let nonce = self.nonce_rng.next_u64();
                let s = self.submissions[index].clone();
                let gateway = &mut self.nodes[s.node as usize];
                match gateway.submit(s.event.clone(), s.actor_id, s.probe, nonce, tick) {
                    Ok((tx, out)) => {
                        self.accepted.push((index, tx.tx_id));
                        self.dispatch(s.node, out);
                    }
                    Err(rejection) => self.rejected.push(RejectedSubmission {
                        submission: index,
                        tick,
                        node: s.node,
                        actor_id: s.actor_id,
                        item_id: s.event.item_id,
                        reason: rejection.reason,
                        score: rejection.score,
                    }),
                }
                Step::Submitted { index, tick }
            }
            Due::Message => {
                let ev = self.net.step().expect("queue reported a pending delivery");
                let to = ev.msg.to;
                let out = self.nodes[to as usize].on_message(&ev.msg, ev.deliver_at);
                self.dispatch(to, out);
                Step::Delivered(Box::new(ev))
            }
            Due::Timer(node) => {
                self.net.advance_to(tick);
                let out = self.nodes[node as usize].on_timeout(tick);
                self.dispatch(node, out);
                Step::Timeout { node, tick }
            }
        }
    }

    /// Steps until nothing is left to do. Returns the final tick, or
    /// `BudgetExceeded` if work is still pending past `max_ticks`.
    pub fn run_until_quiet(&mut self, max_ticks: u64) -> Result<u64, SimError> {
        loop {
            match self.next_due() {
                None => return Ok(self.now()),
                Some((tick, _)) if tick > max_ticks => {
                    return Err(SimError::BudgetExceeded { max_ticks, tick: self.now() })
                }
                Some(_) => {
                    self.step();
                }
            }
        }
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.behavior().is_honest())
    }

    /// Node 0 if honest, otherwise the lowest-id honest node.
    pub fn reference_node(&self) -> Option<&Node> {
        self.honest_nodes().next()
    }

    /// No two honest nodes committed different hashes at one height.
    pub fn honest_commits_agree(&self) -> bool {
        let mut seen = std::collections::BTreeMap::new();
        for node in self.honest_nodes() {
            for (&h, &hash) in node.committed_at() {
                if *seen.entry(h).or_insert(hash) != hash {
                    return false;
                }
            }
        }
        true
    }

    /// Every honest node holds a byte-identical chain.
    pub fn honest_heads_identical(&self) -> bool {
        let mut encoded = self.honest_nodes().map(|n| encode_chain(n.head()));
        match encoded.next() {
            Some(first) => encoded.all(|e| e == first),
            None => true,
        }
    }

    pub fn honest_heads(&self) -> Vec<&Chain> {
        self.honest_nodes().map(Node::head).collect()
    }
}
