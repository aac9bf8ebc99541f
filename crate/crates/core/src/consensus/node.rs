use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::{max_faulty, proposer_for, quorum_size, Behavior, Envelope, Message, Payload};
use crate::biometric::{ActorRegistry, BiometricError, EncryptedTemplate};
use crate::hash::Hash32;
use crate::ledger::{make_block, validate_block, BiometricAttestation, Block, Chain, SupplyChainEvent, Transaction};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeConfig {
    pub n: u32,
    pub timeout_ticks: u64,
    pub threshold: u64,
    pub max_block_txs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProposeError {
    #[error("node is not the proposer for this height and view")]
    NotMyTurn,
    #[error("no pending transactions")]
    NoTxs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectionReason {
    NoMatch,
    UnknownActor,
    KeyMismatch,
    InvalidEvent,
    GatewayDown,
}

/// Why a submission never became a transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub score: Option<u64>,
}

/// One consensus participant. All interaction happens through [`Message`]s;
/// handlers return the envelopes to send.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    node_id: u32,
    behavior: Behavior,
    config: NodeConfig,
    registry: Arc<ActorRegistry>,
    head: Chain,
    pending: Vec<Transaction>,
    view: u32,
    vote_tally: BTreeMap<(u64, Hash32), BTreeSet<u32>>,
    committed_at: BTreeMap<u64, Hash32>,
    candidates: BTreeMap<Hash32, Block>,
    commit_notices: BTreeMap<(u64, Hash32), BTreeSet<u32>>,
    voted: BTreeSet<(u64, u32)>,
    proposed: BTreeSet<(u64, u32)>,
    sync_pings: BTreeSet<(u32, u64)>,
    committed_txs: BTreeSet<Hash32>,
    deadline: Option<u64>,
    rng: ChaCha8Rng,
}

impl Node {
    pub fn new(node_id: u32, behavior: Behavior, config: NodeConfig, registry: Arc<ActorRegistry>, seed: u64) -> Self {
        Node {
            node_id,
            behavior,
            config,
            registry,
            head: Chain::new(),
            pending: Vec::new(),
            view: 0,
            vote_tally: BTreeMap::new(),
            committed_at: BTreeMap::new(),
            candidates: BTreeMap::new(),
            commit_notices: BTreeMap::new(),
            voted: BTreeSet::new(),
            proposed: BTreeSet::new(),
            sync_pings: BTreeSet::new(),
            committed_txs: BTreeSet::new(),
            deadline: None,
            rng: substream(seed, &format!("node/{node_id}")),
        }
    }

    pub fn node_id(&self) -> u32 {
        self.node_id
    }

    pub fn behavior(&self) -> Behavior {
        self.behavior
    }

    pub fn head(&self) -> &Chain {
        &self.head
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn view(&self) -> u32 {
        self.view
    }

    pub fn committed_at(&self) -> &BTreeMap<u64, Hash32> {
        &self.committed_at
    }

    pub fn vote_tally(&self) -> &BTreeMap<(u64, Hash32), BTreeSet<u32>> {
        &self.vote_tally
    }

    /// Tick at which [`Node::on_timeout`] should fire, if armed.
    pub fn deadline(&self) -> Option<u64> {
        self.deadline
    }

    fn crashed(&self) -> bool {
        self.behavior == Behavior::Crashed
    }

    fn broadcast(&self, payload: Payload) -> Vec<Envelope> {
        (0..self.config.n)
            .filter(|&to| to != self.node_id)
            .map(|to| Envelope { to, payload: payload.clone() })
            .collect()
    }

    fn rearm(&mut self, now: u64) {
        self.deadline = if self.pending.is_empty() { None } else { Some(now + self.config.timeout_ticks) };
    }

    /// Gateway path: verify the scrambled probe, wrap it into a transaction and
    /// gossip it. Rejected submissions never leave this node.
    pub fn submit(
        &mut self,
        event: SupplyChainEvent,
        actor_id: u32,
        probe: EncryptedTemplate,
        nonce: u64,
        now: u64,
    ) -> Result<(Transaction, Vec<Envelope>), Rejection> {
        let reject = |reason, score| Rejection { reason, score };
        if self.crashed() {
            return Err(reject(RejectionReason::GatewayDown, None));
        }
        if event.check().is_err() {
            return Err(reject(RejectionReason::InvalidEvent, None));
        }
        let decision = self.registry.verify_actor(actor_id, &probe, self.config.threshold).map_err(|e| match e {
            BiometricError::UnknownActor(_) => reject(RejectionReason::UnknownActor, None),
            _ => reject(RejectionReason::KeyMismatch, None),
        })?;
        if !decision.accepted {
            return Err(reject(RejectionReason::NoMatch, Some(decision.score)));
        }
        let attestation = BiometricAttestation {
            actor_id,
            encrypted_probe: probe,
            match_score: decision.score,
            accepted: true,
            verifier_node: self.node_id,
            nonce,
        };
        let tx = Transaction::new(event, attestation).map_err(|_| reject(RejectionReason::InvalidEvent, None))?;
        let mut out = self.broadcast(Payload::Tx { tx: tx.clone() });
        out.extend(self.add_pending(tx.clone(), now));
        Ok((tx, out))
    }

    fn add_pending(&mut self, tx: Transaction, now: u64) -> Vec<Envelope> {
        if self.committed_txs.contains(&tx.tx_id) || self.pending.iter().any(|p| p.tx_id == tx.tx_id) {
            return Vec::new();
        }
        self.pending.push(tx);
        if self.deadline.is_none() {
            self.rearm(now);
        }
        self.propose(now).unwrap_or_default()
    }

    pub fn on_message(&mut self, msg: &Message, now: u64) -> Vec<Envelope> {
        if self.crashed() || msg.to != self.node_id {
            return Vec::new();
        }
        match &msg.payload {
            Payload::Proposal { block, proposer_id, view } => {
                self.on_proposal(msg.from, block, *proposer_id, *view, now)
            }
            Payload::Vote { voter_id, height, block_hash, approve } => {
                self.on_vote(msg.from, *voter_id, *height, *block_hash, *approve, now)
            }
            Payload::Commit { height, block_hash, block } => self.on_commit(msg.from, *height, *block_hash, block, now),
            Payload::Tx { tx } => self.on_tx(tx, now),
        }
    }

    /// Builds and sends a proposal if this node leads `(head + 1, view)`.
    pub fn propose(&mut self, now: u64) -> Result<Vec<Envelope>, ProposeError> {
        if self.crashed() {
            return Ok(Vec::new());
        }
        let height = self.head.height() + 1;
        let view = self.view;
        if proposer_for(height, view, self.config.n) != self.node_id {
            return Err(ProposeError::NotMyTurn);
        }
        if self.pending.is_empty() {
            return Err(ProposeError::NoTxs);
        }
        if !self.proposed.insert((height, view)) {
            return Ok(Vec::new());
        }
        let take = self.pending.len().min(self.config.max_block_txs.max(1));
        let txs = self.pending[..take].to_vec();
        let block = make_block(self.head.tip(), txs.clone(), now, self.node_id)
            .expect("pending transactions always carry accepted attestations");
        let proposal = |block: Block| Payload::Proposal { block, proposer_id: self.node_id, view };

        match self.behavior {
            Behavior::Crashed => unreachable!(),
            Behavior::Honest | Behavior::VoteFlipper => {
                let mut out = self.broadcast(proposal(block.clone()));
                self.voted.insert((height, view));
                let approve = self.behavior != Behavior::VoteFlipper;
                let hash = block.hash();
                self.candidates.insert(hash, block);
                out.extend(self.cast_vote(height, hash, approve, now));
                Ok(out)
            }
            Behavior::Tamperer => {
                let mut tampered = block;
                let i = self.rng.gen_range(0..tampered.transactions.len());
                tampered.transactions[i].event.storage_temp ^= 1;
                let hash = tampered.hash();
                let mut out = self.broadcast(proposal(tampered));
                self.voted.insert((height, view));
                out.extend(self.cast_vote(height, hash, true, now));
                Ok(out)
            }
            Behavior::Equivocator => {
                let twin = make_block(self.head.tip(), txs, now + 1, self.node_id).expect("same inputs as above");
                let mut peers: Vec<u32> = (0..self.config.n).filter(|&p| p != self.node_id).collect();
                peers.shuffle(&mut self.rng);
                let mut out = Vec::with_capacity(peers.len() * 3);
                for (i, &to) in peers.iter().enumerate() {
                    let pick_twin = match i {
                        0 => false,
                        1 => true,
                        _ => self.rng.gen_bool(0.5),
                    };
                    let b = if pick_twin { twin.clone() } else { block.clone() };
                    out.push(Envelope { to, payload: proposal(b) });
                }
                self.voted.insert((height, view));
                let (ha, hb) = (block.hash(), twin.hash());
                self.candidates.insert(ha, block);
                self.candidates.insert(hb, twin);
                out.extend(self.cast_vote(height, ha, true, now));
                out.extend(self.cast_vote(height, hb, true, now));
                Ok(out)
            }
        }
    }

    fn cast_vote(&mut self, height: u64, block_hash: Hash32, approve: bool, now: u64) -> Vec<Envelope> {
        let mut out = self.broadcast(Payload::Vote { voter_id: self.node_id, height, block_hash, approve });
        if approve {
            self.vote_tally.entry((height, block_hash)).or_default().insert(self.node_id);
            out.extend(self.try_commit(height, block_hash, now));
        }
        out
    }

    pub fn on_proposal(&mut self, from: u32, block: &Block, proposer_id: u32, view: u32, now: u64) -> Vec<Envelope> {
        if self.crashed() {
            return Vec::new();
        }
        let height = block.height();
        let mine = self.head.height();
        if height <= mine {
            return self.catch_up(from, height);
        }
        if height > mine + 1 {
            return self.sync_ping(from);
        }
        if from != proposer_id || proposer_for(height, view, self.config.n) != proposer_id || view < self.view {
            return Vec::new();
        }
        if view > self.view {
            self.view = view;
            self.rearm(now);
        }
        if !self.voted.insert((height, view)) {
            return Vec::new();
        }
        let verdict = validate_block(block, self.head.tip(), &self.registry, self.config.threshold).is_ok();
        let approve = if self.behavior == Behavior::VoteFlipper { !verdict } else { verdict };
        let hash = block.hash();
        if verdict {
            self.candidates.insert(hash, block.clone());
        }
        self.cast_vote(height, hash, approve, now)
    }

    pub fn on_vote(
        &mut self,
        from: u32,
        voter_id: u32,
        height: u64,
        hash: Hash32,
        approve: bool,
        now: u64,
    ) -> Vec<Envelope> {
        if self.crashed() || voter_id != from {
            return Vec::new();
        }
        let mine = self.head.height();
        if height <= mine {
            return if height < mine { self.catch_up(from, height) } else { Vec::new() };
        }
        if approve {
            self.vote_tally.entry((height, hash)).or_default().insert(voter_id);
        }
        if height == mine + 1 {
            self.try_commit(height, hash, now)
        } else {
            self.sync_ping(from)
        }
    }

    fn on_commit(&mut self, from: u32, height: u64, hash: Hash32, block: &Block, now: u64) -> Vec<Envelope> {
        let mine = self.head.height();
        if height <= mine {
            return self.catch_up(from, height + 1);
        }
        if block.hash() != hash || block.height() != height {
            return Vec::new();
        }
        self.candidates.entry(hash).or_insert_with(|| block.clone());
        self.commit_notices.entry((height, hash)).or_default().insert(from);
        if height == mine + 1 {
            self.try_commit(height, hash, now)
        } else {
            self.sync_ping(from)
        }
    }

    fn on_tx(&mut self, tx: &Transaction, now: u64) -> Vec<Envelope> {
        if tx.compute_id() != tx.tx_id || tx.event.check().is_err() {
            return Vec::new();
        }
        let a = &tx.attestation;
        match self.registry.verify_actor(a.actor_id, &a.encrypted_probe, self.config.threshold) {
            Ok(d) if d.accepted && a.accepted && d.score == a.match_score => self.add_pending(tx.clone(), now),
            _ => Vec::new(),
        }
    }

    /// Fires the view change if the deadline has passed.
    pub fn on_timeout(&mut self, now: u64) -> Vec<Envelope> {
        if self.crashed() || self.deadline.is_none_or(|d| now < d) {
            return Vec::new();
        }
        self.view += 1;
        self.rearm(now);
        self.propose(now).unwrap_or_default()
    }

    /// Commit blocks `from_height..=head` for a peer that is behind.
    fn catch_up(&self, to: u32, from_height: u64) -> Vec<Envelope> {
        if to == self.node_id {
            return Vec::new();
        }
        (from_height.max(1)..=self.head.height())
            .filter_map(|h| self.head.block_at(h))
            .map(|block| Envelope {
                to,
                payload: Payload::Commit { height: block.height(), block_hash: block.hash(), block: block.clone() },
            })
            .collect()
    }

    /// Tells a peer that is ahead where this node's head is, once per head height.
    fn sync_ping(&mut self, to: u32) -> Vec<Envelope> {
        if to == self.node_id || !self.sync_pings.insert((to, self.head.height())) {
            return Vec::new();
        }
        let tip = self.head.tip();
        vec![Envelope {
            to,
            payload: Payload::Commit { height: tip.height(), block_hash: tip.hash(), block: tip.clone() },
        }]
    }

    fn try_commit(&mut self, height: u64, hash: Hash32, now: u64) -> Vec<Envelope> {
        if height != self.head.height() + 1 || self.committed_at.contains_key(&height) {
            return Vec::new();
        }
        let votes = self.vote_tally.get(&(height, hash)).map_or(0, BTreeSet::len);
        let notices = self.commit_notices.get(&(height, hash)).map_or(0, BTreeSet::len);
        if votes < quorum_size(self.config.n) && notices < max_faulty(self.config.n) + 1 {
            return Vec::new();
        }
        let Some(block) = self.candidates.get(&hash) else {
            return Vec::new();
        };
        if validate_block(block, self.head.tip(), &self.registry, self.config.threshold).is_err() {
            self.candidates.remove(&hash);
            return Vec::new();
        }
        let block = block.clone();
        self.commit(block, now)
    }

    fn commit(&mut self, block: Block, now: u64) -> Vec<Envelope> {
        let height = block.height();
        let hash = block.hash();
        self.committed_at.insert(height, hash);
        self.committed_txs.extend(block.transactions.iter().map(|tx| tx.tx_id));
        let committed = &self.committed_txs;
        self.pending.retain(|tx| !committed.contains(&tx.tx_id));
        self.head.push(block.clone());

        self.vote_tally.retain(|(h, _), _| *h > height);
        self.commit_notices.retain(|(h, _), _| *h > height);
        self.candidates.retain(|_, b| b.height() > height);
        self.voted.retain(|(h, _)| *h > height);
        self.proposed.retain(|(h, _)| *h > height);
        self.view = 0;
        self.rearm(now);

        let mut out = self.broadcast(Payload::Commit { height, block_hash: hash, block });
        let next = height + 1;
        let known: BTreeSet<Hash32> = self
            .vote_tally
            .keys()
            .chain(self.commit_notices.keys())
            .filter(|(h, _)| *h == next)
            .map(|(_, hash)| *hash)
            .collect();
        for hash in known {
            if self.head.height() >= next {
                break;
            }
            out.extend(self.try_commit(next, hash, now));
        }
        if self.head.height() == height {
            out.extend(self.propose(now).unwrap_or_default());
        }
        out
    }
}
