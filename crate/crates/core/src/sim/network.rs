use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::{Message, MessageKind};
use crate::rng::substream;

/// A set of nodes cut off from everyone else during `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub nodes: BTreeSet<u32>,
    pub start: u64,
    pub end: u64,
}

impl Partition {
    pub fn active_at(&self, tick: u64) -> bool {
        self.start <= tick && tick < self.end
    }

    pub fn separates(&self, a: u32, b: u32) -> bool {
        self.nodes.contains(&a) != self.nodes.contains(&b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub seed: u64,
    pub base_delay: u64,
    pub jitter: u64,
    pub drop_rate: f64,
    pub partitions: Vec<Partition>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { seed: 0, base_delay: 1, jitter: 0, drop_rate: 0.0, partitions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("drop_rate {0} is outside [0, 1]")]
    DropRate(String),
    #[error("partitions {0} and {1} overlap in time but share nodes")]
    OverlappingPartitions(usize, usize),
    #[error("partition {0} has an empty activation range")]
    EmptyRange(usize),
}

impl NetworkConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.drop_rate) {
            return Err(ConfigError::DropRate(self.drop_rate.to_string()));
        }
        for (i, p) in self.partitions.iter().enumerate() {
            if p.start >= p.end {
                return Err(ConfigError::EmptyRange(i));
            }
            for (j, q) in self.partitions.iter().enumerate().skip(i + 1) {
                let overlap = p.start < q.end && q.start < p.end;
                if overlap && !p.nodes.is_disjoint(&q.nodes) {
                    return Err(ConfigError::OverlappingPartitions(i, j));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent {
    pub deliver_at: u64,
    pub seq: u64,
    pub msg: Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Delivered,
    Dropped,
    Partitioned,
}

/// One line of the delivery trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub from: u32,
    pub to: u32,
    pub kind: MessageKind,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NetStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub partitioned: u64,
}

/// Seeded message queue with delay, jitter, random loss and partitions.
///
/// Events are ordered by `(deliver_at, seq)` where `seq` is the insertion
/// counter, so equal-tick deliveries keep send order.
#[derive(Debug, Clone)]
pub struct SimNetwork {
    config: NetworkConfig,
    queue: BTreeMap<(u64, u64), Message>,
    next_seq: u64,
    clock: u64,
    drop_rng: ChaCha8Rng,
    jitter_rng: ChaCha8Rng,
    stats: NetStats,
    trace: Vec<TraceEntry>,
}

impl SimNetwork {
    pub fn new(config: NetworkConfig) -> Result<Self, ConfigError> {
        config.check()?;
        Ok(SimNetwork {
            drop_rng: substream(config.seed, "net/drops"),
            jitter_rng: substream(config.seed, "net/jitter"),
            config,
            queue: BTreeMap::new(),
            next_seq: 0,
            clock: 0,
            stats: NetStats::default(),
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.clock
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn next_delivery(&self) -> Option<u64> {
        self.queue.keys().next().map(|&(t, _)| t)
    }

    /// Moves the clock forward without delivering anything.
    pub fn advance_to(&mut self, tick: u64) {
        self.clock = self.clock.max(tick);
    }

    pub fn send(&mut self, msg: Message, now: u64) {
        self.stats.sent += 1;
        // both streams are drawn on every send so one setting never shifts the other
        let lost = self.drop_rng.gen::<f64>() < self.config.drop_rate;
        let extra = self.jitter_rng.gen_range(0..=self.config.jitter);
        let cut = self.config.partitions.iter().any(|p| p.active_at(now) && p.separates(msg.from, msg.to));
        let outcome = if cut {
            Outcome::Partitioned
        } else if lost {
            Outcome::Dropped
        } else {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.queue.insert((now + self.config.base_delay + extra, seq), msg);
            return;
        };
        match outcome {
            Outcome::Partitioned => self.stats.partitioned += 1,
            _ => self.stats.dropped += 1,
        }
        self.trace.push(TraceEntry { tick: now, from: msg.from, to: msg.to, kind: msg.kind(), outcome });
    }

    /// Pops the earliest event and advances the clock to it.
    pub fn step(&mut self) -> Option<SimEvent> {
        let ((deliver_at, seq), msg) = self.queue.pop_first()?;
        self.clock = self.clock.max(deliver_at);
        self.stats.delivered += 1;
        self.trace.push(TraceEntry {
            tick: deliver_at,
            from: msg.from,
            to: msg.to,
            kind: msg.kind(),
            outcome: Outcome::Delivered,
        });
        Some(SimEvent { deliver_at, seq, msg })
    }

    /// The trace as JSON lines.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.trace {
            out.push_str(&serde_json::to_string(entry).expect("trace entry serializes"));
            out.push('\n');
        }
        out
    }
}
