//! Custody traces, responsibility lookup and ingredient-label audits over a
//! validated chain.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biometric::ActorRegistry;
use crate::ledger::{validate_chain, Chain, ChainFault, Stage, Transaction};

/// Position of a transaction: block height and index within the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub height: u64,
    pub tx_index: u32,
}

impl Location {
    pub fn new(height: u64, tx_index: u32) -> Self {
        Location { height, tx_index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustodyRecord {
    pub height: u64,
    pub tx_index: u32,
    pub stage: Stage,
    pub event_time: u64,
    pub actor_id: u32,
    pub origin: String,
    pub batch_number: String,
}

impl CustodyRecord {
    fn new(loc: Location, tx: &Transaction) -> Self {
        CustodyRecord {
            height: loc.height,
            tx_index: loc.tx_index,
            stage: tx.event.stage,
            event_time: tx.event.event_time,
            actor_id: tx.attestation.actor_id,
            origin: tx.event.origin.clone(),
            batch_number: tx.event.batch_number.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    UndeclaredIngredient,
    PhantomIngredient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelViolation {
    pub kind: ViolationKind,
    pub ingredient: String,
    pub introduced_at: Option<Location>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProvenanceError {
    #[error("chain failed validation: {0}")]
    InvalidChain(ChainFault),
    #[error("no transaction records that stage for the item")]
    NotFound,
    #[error("several transactions record that stage for the item")]
    Ambiguous { candidates: Vec<Candidate> },
    #[error("item has no RETAIL event")]
    NotRetailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub height: u64,
    pub tx_index: u32,
    pub actor_id: u32,
}

/// Item id to transaction locations, in commit order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemIndex {
    items: BTreeMap<String, Vec<Location>>,
}

impl ItemIndex {
    /// Builds the index without validating; callers vouch for the chain.
    pub fn from_chain_unchecked(chain: &Chain) -> Self {
        let mut items: BTreeMap<String, Vec<Location>> = BTreeMap::new();
        for block in chain.blocks() {
            for (i, tx) in block.transactions.iter().enumerate() {
                items.entry(tx.event.item_id.clone()).or_default().push(Location::new(block.header.height, i as u32));
            }
        }
        ItemIndex { items }
    }

    pub fn locations(&self, item_id: &str) -> &[Location] {
        self.items.get(item_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

pub fn build_index(chain: &Chain, registry: &ActorRegistry, threshold: u64) -> Result<ItemIndex, ProvenanceError> {
    validate_chain(chain, registry, threshold).map_err(ProvenanceError::InvalidChain)?;
    Ok(ItemIndex::from_chain_unchecked(chain))
}

fn tx_at(chain: &Chain, loc: Location) -> &Transaction {
    chain
        .block_at(loc.height)
        .and_then(|b| b.transactions.get(loc.tx_index as usize))
        .expect("index built from this chain")
}

fn item_txs<'c>(
    idx: &'c ItemIndex,
    chain: &'c Chain,
    item_id: &str,
) -> impl Iterator<Item = (Location, &'c Transaction)> + 'c {
    idx.locations(item_id).iter().map(move |&loc| (loc, tx_at(chain, loc)))
}

pub fn trace_item(idx: &ItemIndex, chain: &Chain, item_id: &str) -> Vec<CustodyRecord> {
    trace_item_counted(idx, chain, item_id).0
}

/// Like [`trace_item`], also returning how many transactions were read.
pub fn trace_item_counted(idx: &ItemIndex, chain: &Chain, item_id: &str) -> (Vec<CustodyRecord>, usize) {
    let records: Vec<_> = item_txs(idx, chain, item_id).map(|(loc, tx)| CustodyRecord::new(loc, tx)).collect();
    let visits = records.len();
    (records, visits)
}

/// Reference trace that reads every transaction in the chain.
pub fn trace_item_scan(chain: &Chain, item_id: &str) -> (Vec<CustodyRecord>, usize) {
    let mut visits = 0;
    let mut records = Vec::new();
    for block in chain.blocks() {
        for (i, tx) in block.transactions.iter().enumerate() {
            visits += 1;
            if tx.event.item_id == item_id {
                records.push(CustodyRecord::new(Location::new(block.header.height, i as u32), tx));
            }
        }
    }
    (records, visits)
}

pub fn responsible_actor(idx: &ItemIndex, chain: &Chain, item_id: &str, stage: Stage) -> Result<u32, ProvenanceError> {
    let candidates: Vec<Candidate> = item_txs(idx, chain, item_id)
        .filter(|(_, tx)| tx.event.stage == stage)
        .map(|(loc, tx)| Candidate { height: loc.height, tx_index: loc.tx_index, actor_id: tx.attestation.actor_id })
        .collect();
    match candidates.as_slice() {
        [] => Err(ProvenanceError::NotFound),
        [only] => Ok(only.actor_id),
        _ => Err(ProvenanceError::Ambiguous { candidates }),
    }
}

/// Compares everything added along the item's path with the retail label.
/// With several RETAIL events the last committed label is audited.
pub fn audit_labels(idx: &ItemIndex, chain: &Chain, item_id: &str) -> Result<Vec<LabelViolation>, ProvenanceError> {
    let mut introduced: BTreeMap<&str, Location> = BTreeMap::new();
    let mut label = None;
    for (loc, tx) in item_txs(idx, chain, item_id) {
        for ingredient in &tx.event.ingredients_added {
            introduced.entry(ingredient.as_str()).or_insert(loc);
        }
        if tx.event.stage == Stage::Retail {
            label = Some(&tx.event.declared_label);
        }
    }
    let label: BTreeSet<&str> = label.ok_or(ProvenanceError::NotRetailed)?.iter().map(String::as_str).collect();

    let mut out: Vec<LabelViolation> = introduced
        .iter()
        .filter(|(ingredient, _)| !label.contains(*ingredient))
        .map(|(ingredient, &loc)| LabelViolation {
            kind: ViolationKind::UndeclaredIngredient,
            ingredient: ingredient.to_string(),
            introduced_at: Some(loc),
        })
        .chain(label.iter().filter(|l| !introduced.contains_key(*l)).map(|l| LabelViolation {
            kind: ViolationKind::PhantomIngredient,
            ingredient: l.to_string(),
            introduced_at: None,
        }))
        .collect();
    out.sort_by(|a, b| a.ingredient.cmp(&b.ingredient));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::constants::DEFAULT_THRESHOLD;
    use crate::workload::{chain_from_transactions, lifecycle, role_for, Cast};

    fn chain_of(events: Vec<crate::ledger::SupplyChainEvent>, per_block: usize) -> (Cast, Chain) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cast = Cast::generate(2, 11, &mut rng);
        let txs = events
            .into_iter()
            .map(|e| {
                let actor = cast.actors_with_role(role_for(e.stage))[0];
                cast.attest(e, actor, 0, DEFAULT_THRESHOLD, &mut rng).unwrap()
            })
            .collect();
        (cast, chain_from_transactions(txs, per_block))
    }

    #[test]
    fn genesis_only_chain_gives_empty_index() {
        let idx = build_index(&Chain::new(), &ActorRegistry::new(), DEFAULT_THRESHOLD).unwrap();
        assert!(idx.is_empty());
        assert!(trace_item(&idx, &Chain::new(), "x").is_empty());
    }

    #[test]
    fn lifecycle_trace_and_responsibility() {
        let (cast, chain) = chain_of(lifecycle("lettuce-42", 0, &[]), 3);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        let stages: Vec<_> = trace_item(&idx, &chain, "lettuce-42").iter().map(|r| r.stage).collect();
        assert_eq!(stages, Stage::ALL);
        assert_eq!(trace_item(&idx, &chain, "lettuce-42"), trace_item_scan(&chain, "lettuce-42").0);
        assert_eq!(responsible_actor(&idx, &chain, "lettuce-42", Stage::Processing), Ok(200));
        assert_eq!(responsible_actor(&idx, &chain, "lettuce-7", Stage::Farm), Err(ProvenanceError::NotFound));
        assert_eq!(audit_labels(&idx, &chain, "lettuce-42"), Ok(vec![]));
    }

    #[test]
    fn duplicate_stage_is_ambiguous() {
        let mut events = lifecycle("kale-1", 0, &[]);
        events.insert(2, events[1].clone());
        let (cast, chain) = chain_of(events, 2);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        match responsible_actor(&idx, &chain, "kale-1", Stage::Processing) {
            Err(ProvenanceError::Ambiguous { candidates }) => assert_eq!(
                candidates,
                [
                    Candidate { height: 1, tx_index: 1, actor_id: 200 },
                    Candidate { height: 2, tx_index: 0, actor_id: 200 }
                ]
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_and_phantom_ingredients() {
        let mut events = lifecycle("sandwich-1", 0, &["peanut", "bread"]);
        events[3].declared_label = vec!["sandwich".into(), "bread".into(), "organic-basil".into()];
        let (cast, chain) = chain_of(events, 8);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        let got = audit_labels(&idx, &chain, "sandwich-1").unwrap();
        assert_eq!(
            got,
            [
                LabelViolation {
                    kind: ViolationKind::PhantomIngredient,
                    ingredient: "organic-basil".into(),
                    introduced_at: None
                },
                LabelViolation {
                    kind: ViolationKind::UndeclaredIngredient,
                    ingredient: "peanut".into(),
                    introduced_at: Some(Location::new(1, 1))
                },
            ]
        );
    }

    #[test]
    fn unretailed_item_cannot_be_audited() {
        let mut events = lifecycle("beet-1", 0, &[]);
        events.pop();
        let (cast, chain) = chain_of(events, 8);
        let idx = build_index(&chain, &cast.registry, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(audit_labels(&idx, &chain, "beet-1"), Err(ProvenanceError::NotRetailed));
    }

    #[test]
    fn tampered_chain_is_refused() {
        let (cast, mut chain) = chain_of(lifecycle("leek-1", 0, &[]), 2);
        chain.blocks_mut()[1].transactions[0].event.storage_temp ^= 1;
        assert!(matches!(
            build_index(&chain, &cast.registry, DEFAULT_THRESHOLD),
            Err(ProvenanceError::InvalidChain(_))
        ));
    }

    #[test]
    fn json_uses_field_names() {
        let v = serde_json::to_value(LabelViolation {
            kind: ViolationKind::UndeclaredIngredient,
            ingredient: "peanut".into(),
            introduced_at: Some(Location::new(2, 0)),
        })
        .unwrap();
        assert_eq!(
            v,
            serde_json::json!({"kind": "UNDECLARED_INGREDIENT", "ingredient": "peanut", "introduced_at": {"height": 2, "tx_index": 0}})
        );
    }
}
