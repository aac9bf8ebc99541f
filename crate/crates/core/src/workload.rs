//! Synthetic actors, probes and item lifecycles for simulations and tests.
//!
//! A [`Cast`] keeps raw templates and keys on the client side, the way capture
//! devices would; only scrambled probes leave it.

use std::collections::BTreeMap;

use rand::Rng;

use crate::biometric::{
    derive_key, synthetic, ActorRegistry, BiometricTemplate, EncryptedTemplate, Role, ScramblingKey,
};
use crate::ledger::{BiometricAttestation, Chain, Stage, SupplyChainEvent, Transaction};
use crate::sim::Submission;

#[derive(Debug, Clone)]
pub struct Member {
    pub actor_id: u32,
    pub role: Role,
    pub template: BiometricTemplate,
    pub key: ScramblingKey,
}

#[derive(Debug, Clone)]
pub struct Cast {
    pub registry: ActorRegistry,
    members: BTreeMap<u32, Member>,
}

pub fn role_for(stage: Stage) -> Role {
    match stage {
        Stage::Farm => Role::Farmer,
        Stage::Processing => Role::Processor,
        Stage::Shipping => Role::Shipper,
        Stage::Retail => Role::Retailer,
    }
}

impl Cast {
    /// Enrolls `per_role` actors for each role. Actor ids are
    /// `100 * (role index + 1) + k`; each actor gets its own key id.
    pub fn generate<R: Rng + ?Sized>(per_role: u32, key_seed: u64, rng: &mut R) -> Self {
        let mut registry = ActorRegistry::new();
        let mut members = BTreeMap::new();
        for (r, stage) in Stage::ALL.iter().enumerate() {
            let role = role_for(*stage);
            for k in 0..per_role {
                let actor_id = 100 * (r as u32 + 1) + k;
                let template = synthetic::template(rng);
                let key = derive_key(key_seed, actor_id);
                registry.enroll(actor_id, role, &template, &key).expect("fresh ids and in-range templates");
                members.insert(actor_id, Member { actor_id, role, template, key });
            }
        }
        Cast { registry, members }
    }

    pub fn member(&self, actor_id: u32) -> Option<&Member> {
        self.members.get(&actor_id)
    }

    pub fn members(&self) -> impl Iterator<Item = &Member> {
        self.members.values()
    }

    pub fn actors_with_role(&self, role: Role) -> Vec<u32> {
        self.members.values().filter(|m| m.role == role).map(|m| m.actor_id).collect()
    }

    /// A fresh noisy capture of the actor, scrambled under their key.
    pub fn genuine_probe<R: Rng + ?Sized>(&self, actor_id: u32, rng: &mut R) -> EncryptedTemplate {
        let m = &self.members[&actor_id];
        let capture = synthetic::genuine_probe(&m.template, synthetic::GENUINE_NOISE, rng);
        m.key.scramble(&capture).expect("noisy capture stays above -32768")
    }

    /// Someone else presenting as the actor: an unrelated template scrambled
    /// under the actor's key.
    pub fn impostor_probe<R: Rng + ?Sized>(&self, actor_id: u32, rng: &mut R) -> EncryptedTemplate {
        let m = &self.members[&actor_id];
        m.key.scramble(&synthetic::template(rng)).expect("uniform template is in range")
    }

    /// Builds an accepted transaction directly, as a gateway node would.
    pub fn attest<R: Rng + ?Sized>(
        &self,
        event: SupplyChainEvent,
        actor_id: u32,
        verifier_node: u32,
        threshold: u64,
        rng: &mut R,
    ) -> Option<Transaction> {
        let probe = self.genuine_probe(actor_id, rng);
        let decision = self.registry.verify_actor(actor_id, &probe, threshold).ok()?;
        if !decision.accepted {
            return None;
        }
        let attestation = BiometricAttestation {
            actor_id,
            encrypted_probe: probe,
            match_score: decision.score,
            accepted: true,
            verifier_node,
            nonce: rng.gen(),
        };
        Transaction::new(event, attestation).ok()
    }
}

pub fn event(item_id: &str, stage: Stage, event_time: u64) -> SupplyChainEvent {
    SupplyChainEvent {
        item_id: item_id.to_string(),
        stage,
        batch_number: format!("{item_id}/batch"),
        origin: "north-field".to_string(),
        storage_temp: 400,
        expiry: event_time + 10_000,
        event_time,
        ingredients_added: Vec::new(),
        declared_label: Vec::new(),
    }
}

/// Farm to retail for one item, with the label matching what was added.
pub fn lifecycle(item_id: &str, start: u64, ingredients: &[&str]) -> Vec<SupplyChainEvent> {
    Stage::ALL
        .iter()
        .enumerate()
        .map(|(i, &stage)| {
            let mut e = event(item_id, stage, start + i as u64);
            match stage {
                Stage::Farm => e.ingredients_added = vec![item_id.split('-').next().unwrap_or(item_id).to_string()],
                Stage::Processing => e.ingredients_added = ingredients.iter().map(|s| s.to_string()).collect(),
                Stage::Retail => {
                    let mut label = vec![item_id.split('-').next().unwrap_or(item_id).to_string()];
                    label.extend(ingredients.iter().map(|s| s.to_string()));
                    e.declared_label = label;
                }
                Stage::Shipping => e.storage_temp = 250,
            }
            e
        })
        .collect()
}

/// Packs transactions into blocks of at most `per_block` without running
/// consensus. Timestamps are the block heights.
pub fn chain_from_transactions(txs: Vec<Transaction>, per_block: usize) -> Chain {
    let mut chain = Chain::new();
    let mut iter = txs.into_iter().peekable();
    while iter.peek().is_some() {
        let batch: Vec<Transaction> = iter.by_ref().take(per_block.max(1)).collect();
        let height = chain.height() + 1;
        chain.extend(batch, height, (height % 4) as u32).expect("attested, non-empty batch");
    }
    chain
}

/// Genuine submissions for each event, spread round-robin over `n` gateways,
/// one every `spacing` ticks starting at `start`. The acting actor is the
/// first one holding the stage's role.
pub fn submissions<R: Rng + ?Sized>(
    cast: &Cast,
    events: &[SupplyChainEvent],
    n: u32,
    start: u64,
    spacing: u64,
    rng: &mut R,
) -> Vec<Submission> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let actor_id = cast.actors_with_role(role_for(e.stage))[0];
            Submission {
                tick: start + i as u64 * spacing,
                node: i as u32 % n.max(1),
                event: e.clone(),
                actor_id,
                probe: cast.genuine_probe(actor_id, rng),
            }
        })
        .collect()
}
